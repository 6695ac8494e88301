#include "owlaudit/model.hpp"

#include <algorithm>
#include <functional>

#include "owlaudit/reasoner.hpp"

namespace owlaudit::model {

using turtle::Graph;
using turtle::Term;
using turtle::Triple;
namespace ns = turtle::ns;

std::string_view facet_local_name(FacetKind kind) {
  switch (kind) {
    case FacetKind::MinExclusive: return "minExclusive";
    case FacetKind::MinInclusive: return "minInclusive";
    case FacetKind::MaxExclusive: return "maxExclusive";
    case FacetKind::MaxInclusive: return "maxInclusive";
  }
  return "";
}

DatatypeRestriction DatatypeRestriction::decimal(std::vector<Facet> facets) {
  return {ns::xsd("decimal"), std::move(facets)};
}

DatatypeRestriction DatatypeRestriction::integer(std::vector<Facet> facets) {
  return {ns::xsd("integer"), std::move(facets)};
}

bool DatatypeRestriction::integral() const { return base == ns::xsd("integer"); }

namespace {

std::string local_name(const std::string& iri) {
  auto pos = iri.find_last_of("#/:");
  return pos == std::string::npos ? iri : iri.substr(pos + 1);
}

}  // namespace

std::string DatatypeRestriction::to_string() const {
  std::string out = local_name(base);
  if (facets.empty()) return out;
  out += "[";
  for (std::size_t i = 0; i < facets.size(); ++i) {
    if (i > 0) out += ", ";
    switch (facets[i].kind) {
      case FacetKind::MinExclusive: out += "> "; break;
      case FacetKind::MinInclusive: out += ">= "; break;
      case FacetKind::MaxExclusive: out += "< "; break;
      case FacetKind::MaxInclusive: out += "<= "; break;
    }
    out += facets[i].value.to_string();
  }
  return out + "]";
}

// --- ClassExpr --------------------------------------------------------------

ClassExpr ClassExpr::named(std::string iri) {
  ClassExpr e;
  e.kind_ = Kind::Named;
  e.iri_ = std::move(iri);
  return e;
}

ClassExpr ClassExpr::intersection(std::vector<ClassExpr> operands) {
  if (operands.empty()) throw std::invalid_argument("intersection of zero class expressions");
  ClassExpr e;
  e.kind_ = Kind::Intersection;
  e.operands_ = std::move(operands);
  return e;
}

ClassExpr ClassExpr::union_of(std::vector<ClassExpr> operands) {
  if (operands.empty()) throw std::invalid_argument("union of zero class expressions");
  ClassExpr e;
  e.kind_ = Kind::Union;
  e.operands_ = std::move(operands);
  return e;
}

ClassExpr ClassExpr::data_some(std::string property, DatatypeRestriction filler) {
  ClassExpr e;
  e.kind_ = Kind::DataSome;
  e.iri_ = std::move(property);
  e.filler_ = std::move(filler);
  return e;
}

ClassExpr ClassExpr::negation(ClassExpr operand) {
  ClassExpr e;
  e.kind_ = Kind::Not;
  e.operands_.push_back(std::move(operand));
  return e;
}

std::string ClassExpr::to_string() const {
  auto joined = [&](std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < operands_.size(); ++i) {
      if (i > 0) out += sep;
      const auto& op = operands_[i];
      bool wrap = op.is(Kind::Intersection) || op.is(Kind::Union);
      out += wrap ? "(" + op.to_string() + ")" : op.to_string();
    }
    return out;
  };
  switch (kind_) {
    case Kind::Named: return local_name(iri_);
    case Kind::Intersection: return joined(" and ");
    case Kind::Union: return joined(" or ");
    case Kind::DataSome: return "(" + local_name(iri_) + " some " + filler_.to_string() + ")";
    case Kind::Not: {
      const auto& op = operand();
      return op.is(Kind::Named) ? "not " + op.to_string() : "not (" + op.to_string() + ")";
    }
  }
  return "";
}

bool operator==(const ClassExpr& a, const ClassExpr& b) {
  return a.kind_ == b.kind_ && a.iri_ == b.iri_ && a.filler_ == b.filler_ && a.operands_ == b.operands_;
}

std::strong_ordering operator<=>(const ClassExpr& a, const ClassExpr& b) {
  if (a.kind_ != b.kind_) return a.kind_ <=> b.kind_;
  if (auto c = a.iri_ <=> b.iri_; c != 0) return c;
  if (auto c = a.filler_ <=> b.filler_; c != 0) return c;
  return std::lexicographical_compare_three_way(a.operands_.begin(), a.operands_.end(),
                                                b.operands_.begin(), b.operands_.end());
}

ClassExpr nnf(const ClassExpr& e) {
  using K = ClassExpr::Kind;
  auto map_all = [](const std::vector<ClassExpr>& ops, bool negate) {
    std::vector<ClassExpr> out;
    out.reserve(ops.size());
    for (const auto& op : ops) out.push_back(nnf(negate ? ClassExpr::negation(op) : op));
    return out;
  };
  switch (e.kind()) {
    case K::Named:
    case K::DataSome: return e;
    case K::Intersection: return ClassExpr::intersection(map_all(e.operands(), false));
    case K::Union: return ClassExpr::union_of(map_all(e.operands(), false));
    case K::Not: {
      const ClassExpr& inner = e.operand();
      switch (inner.kind()) {
        case K::Named:
        case K::DataSome: return e;
        case K::Not: return nnf(inner.operand());
        case K::Intersection: return ClassExpr::union_of(map_all(inner.operands(), true));
        case K::Union: return ClassExpr::intersection(map_all(inner.operands(), true));
      }
    }
  }
  return e;
}

void collect_signature(const ClassExpr& e, std::set<std::string>& classes,
                       std::set<std::string>& properties) {
  if (e.is(ClassExpr::Kind::Named)) classes.insert(e.iri());
  if (e.is(ClassExpr::Kind::DataSome)) properties.insert(e.iri());
  for (const auto& op : e.operands()) collect_signature(op, classes, properties);
}

// --- Ontology ---------------------------------------------------------------

std::set<Individual> Ontology::individuals() const {
  std::set<Individual> out;
  for (const auto& a : class_assertions) out.insert({a.individual});
  for (const auto& a : data_assertions) out.insert({a.individual});
  for (const auto& i : declared_individuals) out.insert({i});
  return out;
}

const ClassExpr* Ontology::definition(const std::string& cls) const {
  auto it = equivalences.find(cls);
  return it == equivalences.end() ? nullptr : &it->second;
}

bool Ontology::mentions_individual(const std::string& iri) const {
  return individuals().contains(Individual{iri});
}

bool Ontology::mentions_class(const std::string& iri) const {
  if (classes.contains(iri)) return true;
  std::set<std::string> cs;
  std::set<std::string> ps;
  for (const auto& [k, v] : equivalences) {
    cs.insert(k);
    collect_signature(v, cs, ps);
  }
  for (const auto& ax : subclass_axioms) {
    collect_signature(ax.sub, cs, ps);
    collect_signature(ax.super, cs, ps);
  }
  for (const auto& a : class_assertions) collect_signature(a.type, cs, ps);
  for (const auto& d : disjoint_sets) cs.insert(d.begin(), d.end());
  return cs.contains(iri);
}

void check_acyclic(const Ontology& o) {
  enum class Mark { None, Active, Done };
  std::map<std::string, Mark> mark;
  std::vector<std::string> path;
  std::function<void(const std::string&)> visit = [&](const std::string& cls) {
    auto& m = mark[cls];
    if (m == Mark::Done) return;
    if (m == Mark::Active) {
      std::string cycle;
      auto start = std::find(path.begin(), path.end(), cls);
      for (auto it = start; it != path.end(); ++it) cycle += local_name(*it) + " -> ";
      throw ExtractError("cyclic class definitions: " + cycle + local_name(cls));
    }
    const ClassExpr* def = o.definition(cls);
    if (def == nullptr) {
      m = Mark::Done;
      return;
    }
    m = Mark::Active;
    path.push_back(cls);
    std::set<std::string> deps;
    std::set<std::string> props;
    collect_signature(*def, deps, props);
    for (const auto& d : deps) visit(d);
    path.pop_back();
    mark[cls] = Mark::Done;
  };
  for (const auto& [cls, def] : o.equivalences) visit(cls);
}

// --- extraction ---------------------------------------------------------------

namespace {

bool reserved(const std::string& iri) {
  return iri.starts_with(ns::kRdf) || iri.starts_with(ns::kRdfs) || iri.starts_with(ns::kOwl) ||
         iri.starts_with(ns::kXsd);
}

bool is_annotation(const std::string& pred) {
  return pred == ns::rdfs("label") || pred == ns::rdfs("comment") || pred == ns::rdfs("seeAlso") ||
         pred == ns::rdfs("isDefinedBy") || pred == ns::owl("versionInfo");
}

std::string describe(const Triple& t) {
  auto term = [](const Term& x) {
    if (x.is_blank()) return "_:" + x.blank_label();
    if (x.is_literal()) return "\"" + x.literal().lexical + "\"";
    return "<" + x.iri_value() + ">";
  };
  return term(t.subject) + " " + term(t.predicate) + " " + term(t.object);
}

class Extractor {
 public:
  explicit Extractor(const Graph& g) : g_(g), consumed_(g.size(), false) {
    for (std::size_t i = 0; i < g.triples().size(); ++i) by_subject_[g.triples()[i].subject].push_back(i);
  }

  Ontology run() {
    const auto& ts = g_.triples();
    // Pass 1: declarations, so later passes know which IRIs are properties.
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const Triple& t = ts[i];
      if (!t.predicate.is_iri(ns::rdf("type")) || !t.object.is_iri()) continue;
      const std::string& type = t.object.iri_value();
      if (type == ns::owl("ObjectProperty") || type == ns::owl("InverseFunctionalProperty") ||
          type == ns::owl("TransitiveProperty") || type == ns::owl("SymmetricProperty")) {
        throw ExtractError("object properties are outside the supported fragment: " + describe(t));
      }
      if (!t.subject.is_iri()) continue;
      const std::string& s = t.subject.iri_value();
      if (type == ns::owl("Class") || type == ns::rdfs("Class")) {
        o_.classes.insert(s);
        consumed_[i] = true;
      } else if (type == ns::owl("DatatypeProperty")) {
        o_.data_properties[s];
        consumed_[i] = true;
      } else if (type == ns::owl("FunctionalProperty")) {
        o_.data_properties[s].functional = true;
        consumed_[i] = true;
      } else if (type == ns::owl("NamedIndividual")) {
        o_.declared_individuals.insert(s);
        consumed_[i] = true;
      } else if (type == ns::owl("Ontology")) {
        for (auto j : by_subject_[t.subject]) consumed_[j] = true;
      }
    }
    // Pass 2: axioms and assertions rooted at named subjects.
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (consumed_[i]) continue;
      const Triple& t = ts[i];
      if (t.subject.is_blank()) {
        if (t.predicate.is_iri(ns::rdf("type")) && t.object.is_iri(ns::owl("AllDisjointClasses"))) {
          all_disjoint(t.subject);
        } else if (t.predicate.is_iri(ns::rdfs("subClassOf"))) {
          consumed_[i] = true;
          o_.subclass_axioms.push_back({class_expr(t.subject), class_expr(t.object)});
        }
        continue;
      }
      top_level(i, t);
    }
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (!consumed_[i]) throw ExtractError("unrecognized OWL construct: " + describe(ts[i]));
    }

    for (const auto& [p, dp] : o_.data_properties) {
      if (o_.classes.contains(p)) throw ExtractError("IRI used as both class and property: " + p);
    }
    check_acyclic(o_);
    for (const auto& a : o_.data_assertions) check_range(a);
    return std::move(o_);
  }

 private:
  void top_level(std::size_t i, const Triple& t) {
    const std::string& s = t.subject.iri_value();
    const std::string& p = t.predicate.iri_value();
    consumed_[i] = true;
    if (p == ns::rdf("type")) {
      if (t.object.is_iri()) {
        const std::string& cls = t.object.iri_value();
        if (reserved(cls)) throw ExtractError("unrecognized OWL construct: " + describe(t));
        o_.classes.insert(cls);
        o_.class_assertions.push_back({s, ClassExpr::named(cls)});
      } else if (t.object.is_blank()) {
        o_.class_assertions.push_back({s, class_expr(t.object)});
      } else {
        throw ExtractError("literal used as a class: " + describe(t));
      }
    } else if (p == ns::owl("equivalentClass")) {
      if (o_.equivalences.contains(s)) throw ExtractError("duplicate definition for class " + s);
      o_.classes.insert(s);
      o_.equivalences.emplace(s, class_expr(t.object));
    } else if (p == ns::rdfs("subClassOf")) {
      o_.classes.insert(s);
      o_.subclass_axioms.push_back({ClassExpr::named(s), class_expr(t.object)});
    } else if (p == ns::owl("disjointWith")) {
      if (!t.object.is_iri()) throw ExtractError("owl:disjointWith expects a named class: " + describe(t));
      o_.classes.insert(s);
      o_.classes.insert(t.object.iri_value());
      o_.disjoint_sets.push_back({s, t.object.iri_value()});
    } else if (p == ns::rdfs("range")) {
      if (o_.classes.contains(s)) throw ExtractError("rdfs:range on a class: " + describe(t));
      if (t.object.is_iri() && !t.object.iri_value().starts_with(ns::kXsd)) {
        throw ExtractError("object properties are outside the supported fragment: " + describe(t));
      }
      auto& dp = o_.data_properties[s];
      if (dp.range) throw ExtractError("multiple rdfs:range declarations for " + s);
      dp.range = data_range(t.object);
    } else if (p == ns::rdfs("domain")) {
      throw ExtractError("rdfs:domain is outside the supported fragment: " + describe(t));
    } else if (is_annotation(p)) {
      // annotations carry no semantics here
    } else if (reserved(p)) {
      throw ExtractError("unrecognized OWL construct: " + describe(t));
    } else if (t.object.is_literal()) {
      o_.data_properties[p];
      o_.data_assertions.push_back({s, p, t.object.literal()});
    } else {
      throw ExtractError("object property assertion is outside the supported fragment: " + describe(t));
    }
  }

  void all_disjoint(const Term& node) {
    std::optional<Term> members;
    for (auto j : by_subject_[node]) {
      const Triple& t = g_.triples()[j];
      consumed_[j] = true;
      if (t.predicate.is_iri(ns::rdf("type"))) continue;
      if (t.predicate.is_iri(ns::owl("members")) && !members) {
        members = t.object;
      } else {
        throw ExtractError("unrecognized OWL construct: " + describe(t));
      }
    }
    if (!members) throw ExtractError("owl:AllDisjointClasses without owl:members");
    std::set<std::string> set;
    for (const auto& m : list(*members)) {
      if (!m.is_iri()) throw ExtractError("owl:members expects named classes");
      o_.classes.insert(m.iri_value());
      set.insert(m.iri_value());
    }
    if (set.size() < 2) throw ExtractError("owl:AllDisjointClasses needs at least two members");
    o_.disjoint_sets.push_back(std::move(set));
  }

  std::vector<Term> list(const Term& head) {
    std::vector<Term> items;
    try {
      items = turtle::read_list(g_, head);
    } catch (const std::runtime_error& e) {
      throw ExtractError(e.what());
    }
    Term node = head;
    while (node.is_blank()) {
      Term next = Term::iri(ns::rdf("nil"));
      for (auto j : by_subject_[node]) {
        consumed_[j] = true;
        if (g_.triples()[j].predicate.is_iri(ns::rdf("rest"))) next = g_.triples()[j].object;
      }
      node = next;
    }
    return items;
  }

  ClassExpr class_expr(const Term& node) {
    if (node.is_iri()) {
      const std::string& iri = node.iri_value();
      if (reserved(iri)) throw ExtractError("unsupported class expression <" + iri + ">");
      if (o_.data_properties.contains(iri)) throw ExtractError("property used as a class: " + iri);
      o_.classes.insert(iri);
      return ClassExpr::named(iri);
    }
    if (node.is_literal()) throw ExtractError("literal used as a class: " + node.text());

    std::optional<Term> inter;
    std::optional<Term> on_property;
    std::optional<Term> some_values;
    for (auto j : by_subject_[node]) {
      const Triple& t = g_.triples()[j];
      consumed_[j] = true;
      const std::string& p = t.predicate.iri_value();
      if (p == ns::rdf("type") &&
          (t.object.is_iri(ns::owl("Class")) || t.object.is_iri(ns::owl("Restriction")))) {
        continue;
      }
      if (p == ns::owl("intersectionOf") && !inter) {
        inter = t.object;
      } else if (p == ns::owl("onProperty") && !on_property) {
        on_property = t.object;
      } else if (p == ns::owl("someValuesFrom") && !some_values) {
        some_values = t.object;
      } else {
        throw ExtractError("unsupported class expression construct: " + describe(t));
      }
    }
    if (inter && !on_property && !some_values) {
      std::vector<ClassExpr> ops;
      for (const auto& item : list(*inter)) ops.push_back(class_expr(item));
      if (ops.empty()) throw ExtractError("empty owl:intersectionOf");
      return ClassExpr::intersection(std::move(ops));
    }
    if (!inter && on_property && some_values) {
      if (!on_property->is_iri()) throw ExtractError("owl:onProperty expects a property IRI");
      const std::string& prop = on_property->iri_value();
      if (o_.classes.contains(prop)) throw ExtractError("class used as a property: " + prop);
      o_.data_properties[prop];
      return ClassExpr::data_some(prop, data_range(*some_values));
    }
    throw ExtractError("unsupported or incomplete class expression at _:" + node.text());
  }

  DatatypeRestriction data_range(const Term& node) {
    auto base_of = [](const Term& t) {
      if (t.is_iri(ns::xsd("decimal"))) return DatatypeRestriction::decimal();
      if (t.is_iri(ns::xsd("integer"))) return DatatypeRestriction::integer();
      throw ExtractError("unsupported datatype " + t.text() + " (only xsd:decimal and xsd:integer)");
    };
    if (node.is_iri()) return base_of(node);
    if (!node.is_blank()) throw ExtractError("literal used as a data range");

    std::optional<Term> on_datatype;
    std::optional<Term> restrictions;
    for (auto j : by_subject_[node]) {
      const Triple& t = g_.triples()[j];
      consumed_[j] = true;
      const std::string& p = t.predicate.iri_value();
      if (p == ns::rdf("type") && t.object.is_iri(ns::rdfs("Datatype"))) continue;
      if (p == ns::owl("onDatatype") && !on_datatype) {
        on_datatype = t.object;
      } else if (p == ns::owl("withRestrictions") && !restrictions) {
        restrictions = t.object;
      } else {
        throw ExtractError("unsupported data range construct: " + describe(t));
      }
    }
    if (!on_datatype) throw ExtractError("datatype restriction without owl:onDatatype");
    DatatypeRestriction dr = base_of(*on_datatype);
    if (!restrictions) return dr;
    for (const auto& facet_node : list(*restrictions)) {
      if (!facet_node.is_blank() || by_subject_[facet_node].size() != 1) {
        throw ExtractError("each facet restriction must be a blank node with one facet");
      }
      auto j = by_subject_[facet_node].front();
      const Triple& t = g_.triples()[j];
      consumed_[j] = true;
      const std::string& p = t.predicate.iri_value();
      FacetKind kind;
      if (p == ns::xsd("minExclusive")) kind = FacetKind::MinExclusive;
      else if (p == ns::xsd("minInclusive")) kind = FacetKind::MinInclusive;
      else if (p == ns::xsd("maxExclusive")) kind = FacetKind::MaxExclusive;
      else if (p == ns::xsd("maxInclusive")) kind = FacetKind::MaxInclusive;
      else throw ExtractError("unsupported facet: " + describe(t));
      if (!t.object.is_literal() || !t.object.literal().value) {
        throw ExtractError("facet value must be a numeric literal: " + describe(t));
      }
      dr.facets.push_back({kind, *t.object.literal().value});
    }
    return dr;
  }

  void check_range(const DataAssertion& a) const {
    const auto& dp = o_.data_properties.at(a.property);
    if (!dp.range) return;
    bool ok = false;
    try {
      ok = reasoner::membership_value(a.value, *dp.range);
    } catch (const reasoner::ReasonerError&) {
      ok = false;
    }
    if (!ok) {
      throw ExtractError("value \"" + a.value.lexical + "\" of " + local_name(a.property) + " on " +
                         local_name(a.individual) + " violates the declared range " + dp.range->to_string());
    }
  }

  const Graph& g_;
  std::vector<bool> consumed_;
  std::map<Term, std::vector<std::size_t>> by_subject_;
  Ontology o_;
};

}  // namespace

Ontology extract_ontology(const Graph& g) { return Extractor(g).run(); }

}  // namespace owlaudit::model
