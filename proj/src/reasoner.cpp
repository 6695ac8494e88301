#include "owlaudit/reasoner.hpp"

#include <algorithm>

namespace owlaudit::reasoner {

using model::ClassExpr;
using model::DatatypeRestriction;
using model::FacetKind;
using model::Ontology;
using K = ClassExpr::Kind;

// --- intervals ----------------------------------------------------------------

namespace {

// Tighter lower bound: larger value, and exclusive beats inclusive on ties.
Bound tighter_lower(const Bound& a, const Bound& b) {
  if (a.value != b.value) return a.value > b.value ? a : b;
  return a.inclusive ? b : a;
}

Bound tighter_upper(const Bound& a, const Bound& b) {
  if (a.value != b.value) return a.value < b.value ? a : b;
  return a.inclusive ? b : a;
}

bool is_integral_value(const Decimal& v) { return v.is_integer(); }

}  // namespace

FacetInterval FacetInterval::from_restriction(const DatatypeRestriction& dr) {
  FacetInterval iv = unbounded(dr.integral());
  for (const auto& f : dr.facets) {
    FacetInterval one = unbounded(dr.integral());
    switch (f.kind) {
      case FacetKind::MinExclusive: one.lower = Bound{f.value, false}; break;
      case FacetKind::MinInclusive: one.lower = Bound{f.value, true}; break;
      case FacetKind::MaxExclusive: one.upper = Bound{f.value, false}; break;
      case FacetKind::MaxInclusive: one.upper = Bound{f.value, true}; break;
    }
    iv = iv.intersect(one);
  }
  return iv;
}

bool FacetInterval::contains(const Decimal& v) const {
  if (integral && !is_integral_value(v)) return false;
  if (lower && (v < lower->value || (v == lower->value && !lower->inclusive))) return false;
  if (upper && (v > upper->value || (v == upper->value && !upper->inclusive))) return false;
  return true;
}

FacetInterval FacetInterval::intersect(const FacetInterval& other) const {
  FacetInterval out;
  out.integral = integral || other.integral;
  if (lower && other.lower) out.lower = tighter_lower(*lower, *other.lower);
  else out.lower = lower ? lower : other.lower;
  if (upper && other.upper) out.upper = tighter_upper(*upper, *other.upper);
  else out.upper = upper ? upper : other.upper;
  return out;
}

std::string FacetInterval::to_string() const {
  std::string out = lower ? (lower->inclusive ? "[" : "(") + lower->value.to_string() : "(-inf";
  out += ", ";
  out += upper ? upper->value.to_string() + (upper->inclusive ? "]" : ")") : "+inf)";
  return integral ? out + " integer" : out;
}

bool interval_empty(const FacetInterval& iv) {
  if (iv.integral) {
    std::optional<Decimal> lo;
    std::optional<Decimal> hi;
    if (iv.lower) {
      Decimal c = iv.lower->value.ceil();
      lo = (c == iv.lower->value && !iv.lower->inclusive) ? c + Decimal(1) : c;
    }
    if (iv.upper) {
      Decimal f = iv.upper->value.floor();
      hi = (f == iv.upper->value && !iv.upper->inclusive) ? f - Decimal(1) : f;
    }
    return lo && hi && *lo > *hi;
  }
  if (!iv.lower || !iv.upper) return false;
  if (iv.lower->value < iv.upper->value) return false;
  if (iv.lower->value > iv.upper->value) return true;
  return !(iv.lower->inclusive && iv.upper->inclusive);
}

namespace {

// Some non-integer strictly between lo and hi (lo < hi); unbounded ends allowed.
Decimal non_integer_between(const std::optional<Decimal>& lo, const std::optional<Decimal>& hi) {
  Decimal a;
  Decimal b;
  if (!lo && !hi) return Decimal::parse("0.5");
  if (!lo) {
    b = *hi;
    a = b.floor() - Decimal(1);
  } else {
    a = *lo;
    b = hi ? *hi : a + Decimal(2);
  }
  Decimal next_int = a.floor() + Decimal(1);
  Decimal cap = std::min(b, next_int);
  return (a + cap).half();
}

// Smallest integer strictly between lo and hi, if any.
std::optional<Decimal> integer_between(const std::optional<Decimal>& lo, const std::optional<Decimal>& hi) {
  Decimal candidate;
  if (lo) {
    candidate = lo->floor() + Decimal(1);
  } else {
    candidate = hi ? hi->ceil() - Decimal(1) : Decimal(0);
  }
  if (hi && !(candidate < *hi)) return std::nullopt;
  return candidate;
}

}  // namespace

bool has_witness(const FacetInterval& required, std::span<const FacetInterval> excluded) {
  if (interval_empty(required)) return false;
  auto admissible = [&](const Decimal& v) {
    if (!required.contains(v)) return false;
    return std::none_of(excluded.begin(), excluded.end(), [&](const FacetInterval& x) { return x.contains(v); });
  };

  std::vector<Decimal> points;
  auto add_bounds = [&](const FacetInterval& iv) {
    if (iv.lower) points.push_back(iv.lower->value);
    if (iv.upper) points.push_back(iv.upper->value);
  };
  add_bounds(required);
  for (const auto& x : excluded) add_bounds(x);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  for (const auto& p : points) {
    if (admissible(p)) return true;
  }
  // Open segments between consecutive endpoints, plus the two unbounded tails.
  // Membership in every set is constant on a segment up to integrality, so one
  // integer and one non-integer probe decide it.
  std::vector<std::pair<std::optional<Decimal>, std::optional<Decimal>>> segments;
  if (points.empty()) {
    segments.emplace_back(std::nullopt, std::nullopt);
  } else {
    segments.emplace_back(std::nullopt, points.front());
    for (std::size_t i = 0; i + 1 < points.size(); ++i) segments.emplace_back(points[i], points[i + 1]);
    segments.emplace_back(points.back(), std::nullopt);
  }
  for (const auto& [lo, hi] : segments) {
    if (admissible(non_integer_between(lo, hi))) return true;
    if (auto n = integer_between(lo, hi); n && admissible(*n)) return true;
  }
  return false;
}

bool membership_value(const turtle::Literal& v, const DatatypeRestriction& dr) {
  if (dr.base != turtle::ns::xsd("decimal") && dr.base != turtle::ns::xsd("integer")) {
    throw ReasonerError("unsupported datatype " + dr.base);
  }
  if (!v.value) {
    throw ReasonerError("datatype mismatch: literal \"" + v.lexical + "\" of type " + v.datatype +
                        " is not numeric");
  }
  return FacetInterval::from_restriction(dr).contains(*v.value);
}

// --- completion -------------------------------------------------------------------

namespace {

struct Clash : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string short_name(const std::string& iri) {
  auto pos = iri.find_last_of("#/:");
  return pos == std::string::npos ? iri : iri.substr(pos + 1);
}

class Completion {
 public:
  explicit Completion(const Ontology& o) : o_(o) {
    for (const auto& ax : o.subclass_axioms) {
      if (ax.sub.is(K::Named)) {
        told_supers_[ax.sub.iri()].push_back(model::nnf(ax.super));
      } else {
        // General inclusion: every individual satisfies (not sub) or super.
        gcis_.push_back(ClassExpr::union_of({model::nnf(ClassExpr::negation(ax.sub)), model::nnf(ax.super)}));
      }
    }
    for (const auto& [cls, def] : o.equivalences) {
      unfold_pos_.emplace(cls, model::nnf(def));
      unfold_neg_.emplace(cls, model::nnf(ClassExpr::negation(def)));
    }
    for (const auto& d : o.disjoint_sets) {
      for (const auto& c : d) disjoint_index_[c].push_back(&d);
    }
    for (const auto& a : o.data_assertions) values_[a.individual][a.property].push_back(&a.value);
  }

  ConsistencyTrace run() {
    Labels labels;
    for (const auto& ind : o_.individuals()) {
      auto& set = labels[ind.iri];
      for (const auto& g : gcis_) set.insert(g);
    }
    for (const auto& a : o_.class_assertions) labels[a.individual].insert(model::nnf(a.type));
    for (const auto& [ind, props] : values_) labels[ind];

    ConsistencyTrace trace;
    trace.consistent = search(std::move(labels), trace);
    return trace;
  }

 private:
  using LabelSet = std::set<ClassExpr>;
  using Labels = std::map<std::string, LabelSet>;

  bool search(Labels labels, ConsistencyTrace& trace) {
    ++trace.branches_explored;
    try {
      saturate(labels);
      check_clashes(labels);
    } catch (const Clash& c) {
      if (trace.first_clash.empty()) trace.first_clash = c.what();
      return false;
    }
    // First unresolved union, in deterministic order.
    for (const auto& [ind, set] : labels) {
      for (const auto& e : set) {
        if (!e.is(K::Union)) continue;
        bool resolved = std::any_of(e.operands().begin(), e.operands().end(),
                                    [&](const ClassExpr& d) { return set.contains(d); });
        if (resolved) continue;
        for (const auto& disjunct : e.operands()) {
          Labels branch = labels;
          branch[ind].insert(disjunct);
          if (search(std::move(branch), trace)) return true;
        }
        return false;
      }
    }
    return true;
  }

  void saturate(Labels& labels) const {
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto& [ind, set] : labels) {
        std::vector<ClassExpr> additions;
        for (const auto& e : set) expand(e, additions);
        add_satisfied_definitions(ind, set, additions);
        for (auto& a : additions) {
          if (set.insert(std::move(a)).second) changed = true;
        }
      }
    }
  }

  // Deterministic consequences of one label.
  void expand(const ClassExpr& e, std::vector<ClassExpr>& out) const {
    switch (e.kind()) {
      case K::Intersection:
        out.insert(out.end(), e.operands().begin(), e.operands().end());
        break;
      case K::Named: {
        if (auto it = unfold_pos_.find(e.iri()); it != unfold_pos_.end()) out.push_back(it->second);
        if (auto it = told_supers_.find(e.iri()); it != told_supers_.end()) {
          out.insert(out.end(), it->second.begin(), it->second.end());
        }
        break;
      }
      case K::Not: {
        const ClassExpr& inner = e.operand();
        if (inner.is(K::Named)) {
          if (auto it = unfold_neg_.find(inner.iri()); it != unfold_neg_.end()) out.push_back(it->second);
        } else if (!inner.is(K::DataSome)) {
          throw ReasonerError("class expression not in negation normal form: " + e.to_string());
        }
        break;
      }
      case K::DataSome:
      case K::Union:
        break;
    }
  }

  // Reverse unfolding: A is added when the labels already establish A's definition.
  void add_satisfied_definitions(const std::string& ind, const LabelSet& set, std::vector<ClassExpr>& out) const {
    for (const auto& [cls, def] : unfold_pos_) {
      ClassExpr named = ClassExpr::named(cls);
      if (!set.contains(named) && satisfied(ind, set, def)) out.push_back(std::move(named));
    }
  }

  bool satisfied(const std::string& ind, const LabelSet& set, const ClassExpr& e) const {
    if (set.contains(e)) return true;
    switch (e.kind()) {
      case K::Named: return false;
      case K::Intersection:
        return std::all_of(e.operands().begin(), e.operands().end(),
                           [&](const ClassExpr& op) { return satisfied(ind, set, op); });
      case K::Union:
        return std::any_of(e.operands().begin(), e.operands().end(),
                           [&](const ClassExpr& op) { return satisfied(ind, set, op); });
      case K::DataSome: {
        FacetInterval iv = FacetInterval::from_restriction(e.filler());
        for (const auto* v : asserted(ind, e.iri())) {
          if (v->value && iv.contains(*v->value)) return true;
        }
        return false;
      }
      case K::Not: {
        const ClassExpr& inner = e.operand();
        if (!inner.is(K::DataSome)) return false;
        // Functional closure: the single asserted value lies outside the filler.
        const auto& dp = property(inner.iri());
        auto vals = asserted(ind, inner.iri());
        if (!dp.functional || vals.empty()) return false;
        FacetInterval iv = FacetInterval::from_restriction(inner.filler());
        return std::none_of(vals.begin(), vals.end(),
                            [&](const turtle::Literal* v) { return v->value && iv.contains(*v->value); });
      }
    }
    return false;
  }

  void check_clashes(const Labels& labels) const {
    for (const auto& [ind, set] : labels) {
      for (const auto& e : set) {
        if (e.is(K::Not) && set.contains(e.operand())) {
          throw Clash(short_name(ind) + " is labelled both " + e.operand().to_string() + " and its complement");
        }
        if (e.is(K::Named)) {
          auto it = disjoint_index_.find(e.iri());
          if (it == disjoint_index_.end()) continue;
          for (const auto* group : it->second) {
            for (const auto& other : *group) {
              if (other != e.iri() && set.contains(ClassExpr::named(other))) {
                throw Clash(short_name(ind) + " is in disjoint classes " + short_name(e.iri()) + " and " +
                            short_name(other));
              }
            }
          }
        }
      }
      check_data(ind, set);
    }
  }

  void check_data(const std::string& ind, const LabelSet& set) const {
    std::set<std::string> props;
    if (auto it = values_.find(ind); it != values_.end()) {
      for (const auto& [p, vs] : it->second) props.insert(p);
    }
    for (const auto& e : set) {
      if (e.is(K::DataSome)) props.insert(e.iri());
      if (e.is(K::Not) && e.operand().is(K::DataSome)) props.insert(e.operand().iri());
    }

    for (const auto& p : props) {
      const auto& dp = property(p);
      auto vals = asserted(ind, p);
      std::optional<FacetInterval> range;
      if (dp.range) range = FacetInterval::from_restriction(*dp.range);
      const std::string who = short_name(ind) + "." + short_name(p);

      for (const auto* v : vals) {
        if (range && !(v->value && range->contains(*v->value))) {
          throw Clash(who + " value " + v->lexical + " is outside the declared range");
        }
      }
      if (dp.functional) {
        for (std::size_t i = 1; i < vals.size(); ++i) {
          bool same = vals[0]->value && vals[i]->value ? *vals[0]->value == *vals[i]->value : *vals[0] == *vals[i];
          if (!same) {
            throw Clash(who + " is functional but has values " + vals[0]->lexical + " and " + vals[i]->lexical);
          }
        }
      }

      std::vector<FacetInterval> negatives;
      std::vector<FacetInterval> positives;
      for (const auto& e : set) {
        if (e.is(K::DataSome) && e.iri() == p) positives.push_back(FacetInterval::from_restriction(e.filler()));
        if (e.is(K::Not) && e.operand().is(K::DataSome) && e.operand().iri() == p) {
          negatives.push_back(FacetInterval::from_restriction(e.operand().filler()));
        }
      }
      for (const auto& neg : negatives) {
        for (const auto* v : vals) {
          if (v->value && neg.contains(*v->value)) {
            throw Clash(who + " value " + v->lexical + " falls in the excluded range " + neg.to_string());
          }
        }
      }
      if (positives.empty()) continue;

      FacetInterval base = range ? *range : FacetInterval::unbounded();
      if (dp.functional && !vals.empty()) {
        // The asserted value is the only value; it must satisfy every existential.
        for (const auto& pos : positives) {
          if (!(vals[0]->value && pos.contains(*vals[0]->value))) {
            throw Clash(who + " is functional with value " + vals[0]->lexical + ", which is not in " +
                        pos.to_string());
          }
        }
      } else if (dp.functional) {
        FacetInterval all = base;
        for (const auto& pos : positives) all = all.intersect(pos);
        if (!has_witness(all, negatives)) {
          throw Clash(who + " is functional and no single value satisfies " + all.to_string());
        }
      } else {
        for (const auto& pos : positives) {
          if (!has_witness(base.intersect(pos), negatives)) {
            throw Clash(who + " has no admissible value in " + pos.to_string());
          }
        }
      }
    }
  }

  const model::DataProperty& property(const std::string& p) const {
    auto it = o_.data_properties.find(p);
    if (it == o_.data_properties.end()) throw ReasonerError("undeclared data property " + p);
    return it->second;
  }

  std::vector<const turtle::Literal*> asserted(const std::string& ind, const std::string& p) const {
    auto it = values_.find(ind);
    if (it == values_.end()) return {};
    auto jt = it->second.find(p);
    if (jt == it->second.end()) return {};
    return jt->second;
  }

  const Ontology& o_;
  std::map<std::string, ClassExpr> unfold_pos_;
  std::map<std::string, ClassExpr> unfold_neg_;
  std::map<std::string, std::vector<ClassExpr>> told_supers_;
  std::vector<ClassExpr> gcis_;
  std::map<std::string, std::vector<const std::set<std::string>*>> disjoint_index_;
  std::map<std::string, std::map<std::string, std::vector<const turtle::Literal*>>> values_;
};

}  // namespace

ConsistencyTrace check_consistency(const Ontology& o) { return Completion(o).run(); }

bool is_consistent(const Ontology& o) { return check_consistency(o).consistent; }

}  // namespace owlaudit::reasoner
