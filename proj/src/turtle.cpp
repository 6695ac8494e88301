#include "owlaudit/turtle.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <unordered_map>

namespace owlaudit::turtle {

namespace {

bool is_numeric_datatype(std::string_view dt) {
  return dt == ns::xsd("integer") || dt == ns::xsd("decimal") || dt == ns::xsd("double");
}

}  // namespace

Literal make_literal(std::string lexical, std::string datatype) {
  Literal lit{std::move(lexical), std::move(datatype), std::nullopt};
  if (is_numeric_datatype(lit.datatype)) lit.value = Decimal::parse(lit.lexical);
  return lit;
}

const std::string& Term::text() const {
  return std::visit(
      [](const auto& v) -> const std::string& {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Iri>) return v.value;
        else if constexpr (std::is_same_v<T, BlankNode>) return v.label;
        else return v.lexical;
      },
      value_);
}

std::size_t TripleHash::operator()(const Triple& t) const {
  std::hash<std::string> h;
  auto term_hash = [&](const Term& x) {
    std::size_t kind = x.is_iri() ? 1 : x.is_blank() ? 2 : 3;
    std::size_t v = h(x.text()) * 31 + kind;
    if (x.is_literal()) v ^= h(x.literal().datatype) << 1;
    return v;
  };
  std::size_t seed = term_hash(t.subject);
  seed ^= term_hash(t.predicate) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
  seed ^= term_hash(t.object) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
  return seed;
}

bool Graph::add(Triple t) {
  if (index_.contains(t)) return false;
  if (t.subject.is_blank() || t.object.is_blank()) {
    // Keep fresh labels from colliding with labels inserted by hand.
    auto bump = [&](const Term& x) {
      if (!x.is_blank()) return;
      const auto& l = x.blank_label();
      if (l.size() > 1 && l[0] == 'b' &&
          std::all_of(l.begin() + 1, l.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        next_blank_ = std::max(next_blank_, static_cast<std::size_t>(std::stoull(l.substr(1))) + 1);
      }
    };
    bump(t.subject);
    bump(t.object);
  }
  index_.insert(t);
  triples_.push_back(std::move(t));
  return true;
}

Term Graph::fresh_blank() { return Term::blank("b" + std::to_string(next_blank_++)); }

std::vector<Term> Graph::objects(const Term& subject, std::string_view predicate) const {
  std::vector<Term> out;
  for (const auto& t : triples_) {
    if (t.subject == subject && t.predicate.is_iri(predicate)) out.push_back(t.object);
  }
  return out;
}

bool operator==(const Graph& a, const Graph& b) {
  if (a.size() != b.size()) return false;
  return std::all_of(a.triples_.begin(), a.triples_.end(),
                     [&](const Triple& t) { return b.contains(t); });
}

ParseError::ParseError(std::size_t line, std::size_t column, std::string token,
                       const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + message + " (at '" + token + "')"),
      line_(line),
      column_(column),
      token_(std::move(token)) {}

// ---------------------------------------------------------------------------
// Parser

namespace {

bool is_pn_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool is_delimiter(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '.' || c == ';' || c == ',' ||
         c == '[' || c == ']' || c == '(' || c == ')' || c == '#' || c == '"' || c == '\'';
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Graph run() {
    while (true) {
      skip_ws();
      if (at_end()) break;
      statement();
    }
    return std::move(graph_);
  }

 private:
  // --- low level ----------------------------------------------------------

  [[nodiscard]] bool at_end() const { return pos_ >= src_.size(); }
  [[nodiscard]] char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }
  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  [[nodiscard]] bool looking_at(std::string_view s) const { return src_.substr(pos_).starts_with(s); }
  [[nodiscard]] bool looking_at_keyword(std::string_view kw, bool ignore_case) const {
    if (src_.size() - pos_ < kw.size()) return false;
    for (std::size_t i = 0; i < kw.size(); ++i) {
      char a = src_[pos_ + i];
      char b = kw[i];
      if (ignore_case ? std::tolower(static_cast<unsigned char>(a)) != std::tolower(static_cast<unsigned char>(b))
                      : a != b) {
        return false;
      }
    }
    std::size_t end = pos_ + kw.size();
    return end >= src_.size() || (!is_pn_char(src_[end]) && src_[end] != ':');
  }

  void skip_ws() {
    while (!at_end()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '#') {
        while (!at_end() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  [[nodiscard]] std::string current_token() const {
    if (at_end()) return "end-of-input";
    std::size_t end = pos_;
    if (is_delimiter(src_[end]) && !std::isspace(static_cast<unsigned char>(src_[end]))) return std::string(1, src_[end]);
    while (end < src_.size() && !std::isspace(static_cast<unsigned char>(src_[end])) &&
           end - pos_ < 40) {
      ++end;
    }
    return std::string(src_.substr(pos_, end - pos_));
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(line_, col_, current_token(), message);
  }

  void expect(char c) {
    skip_ws();
    if (at_end()) fail(std::string("expected '") + c + "' but reached end-of-input");
    if (peek() != c) fail(std::string("expected '") + c + "'");
    advance();
  }

  // --- grammar ------------------------------------------------------------

  void statement() {
    if (looking_at_keyword("@prefix", false)) {
      prefix_directive(true);
    } else if (looking_at_keyword("PREFIX", true)) {
      prefix_directive(false);
    } else if (looking_at_keyword("@base", false) || looking_at_keyword("BASE", true)) {
      fail("@base is not supported");
    } else {
      triples();
      expect('.');
    }
  }

  void prefix_directive(bool turtle_style) {
    for (std::size_t i = 0, n = turtle_style ? 7 : 6; i < n; ++i) advance();
    skip_ws();
    std::string label;
    while (!at_end() && peek() != ':') {
      if (!is_pn_char(peek()) && peek() != '.') fail("malformed prefix label");
      label += advance();
    }
    if (at_end()) fail("expected ':' in prefix declaration");
    advance();
    skip_ws();
    if (peek() != '<') fail("expected <namespace IRI>");
    std::string ns_iri = iriref();
    prefixes_[label] = ns_iri;
    graph_.set_prefix(label, ns_iri);
    if (turtle_style) expect('.');
  }

  void triples() {
    skip_ws();
    if (peek() == '[') {
      Term subject = blank_node_property_list();
      skip_ws();
      if (peek() != '.') predicate_object_list(subject);
    } else {
      Term subject = subject_term();
      predicate_object_list(subject);
    }
  }

  Term subject_term() {
    skip_ws();
    if (at_end()) fail("expected subject but reached end-of-input");
    char c = peek();
    if (c == '<') return Term::iri(iriref());
    if (c == '_' && peek(1) == ':') return labelled_blank();
    if (c == '(') return collection();
    if (c == '"' || c == '\'' || std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-') {
      fail("literal in subject position");
    }
    return Term::iri(prefixed_name());
  }

  void predicate_object_list(const Term& subject) {
    while (true) {
      Term verb = verb_term();
      object_list(subject, verb);
      skip_ws();
      if (peek() != ';') break;
      while (peek() == ';') {
        advance();
        skip_ws();
      }
      if (at_end() || peek() == '.' || peek() == ']') break;
    }
  }

  Term verb_term() {
    skip_ws();
    if (at_end()) fail("expected predicate but reached end-of-input");
    if (peek() == 'a' && (pos_ + 1 >= src_.size() || is_delimiter(src_[pos_ + 1]) || src_[pos_ + 1] == '<')) {
      advance();
      return Term::iri(ns::rdf("type"));
    }
    if (peek() == '<') return Term::iri(iriref());
    if (peek() == '[' || peek() == '(' || peek() == '"' || (peek() == '_' && peek(1) == ':')) {
      fail("predicate must be an IRI");
    }
    return Term::iri(prefixed_name());
  }

  void object_list(const Term& subject, const Term& predicate) {
    while (true) {
      Term obj = object_term();
      graph_.add(subject, predicate, std::move(obj));
      skip_ws();
      if (peek() != ',') break;
      advance();
    }
  }

  Term object_term() {
    skip_ws();
    if (at_end()) fail("expected object but reached end-of-input");
    char c = peek();
    if (c == '<') return Term::iri(iriref());
    if (c == '[') return blank_node_property_list();
    if (c == '(') return collection();
    if (c == '_' && peek(1) == ':') return labelled_blank();
    if (c == '"' || c == '\'') return string_literal();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
        (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      return numeric_literal();
    }
    if (looking_at_keyword("true", false) || looking_at_keyword("false", false)) {
      std::string lex = looking_at("true") ? "true" : "false";
      for (std::size_t i = 0; i < lex.size(); ++i) advance();
      return Literal{lex, ns::xsd("boolean"), std::nullopt};
    }
    return Term::iri(prefixed_name());
  }

  Term blank_node_property_list() {
    advance();  // [
    skip_ws();
    Term node = graph_.fresh_blank();
    if (peek() == ']') {
      advance();
      return node;
    }
    predicate_object_list(node);
    expect(']');
    return node;
  }

  Term collection() {
    advance();  // (
    std::vector<Term> items;
    while (true) {
      skip_ws();
      if (at_end()) fail("unterminated collection");
      if (peek() == ')') {
        advance();
        break;
      }
      items.push_back(object_term());
    }
    if (items.empty()) return Term::iri(ns::rdf("nil"));
    Term head = graph_.fresh_blank();
    Term node = head;
    for (std::size_t i = 0; i < items.size(); ++i) {
      graph_.add(node, Term::iri(ns::rdf("first")), items[i]);
      Term next = i + 1 == items.size() ? Term::iri(ns::rdf("nil")) : graph_.fresh_blank();
      graph_.add(node, Term::iri(ns::rdf("rest")), next);
      node = next;
    }
    return head;
  }

  Term labelled_blank() {
    advance();
    advance();  // _:
    std::string label;
    while (!at_end() && (is_pn_char(peek()) || (peek() == '.' && is_pn_char(peek(1))))) label += advance();
    if (label.empty()) fail("empty blank node label");
    auto it = blank_labels_.find(label);
    if (it != blank_labels_.end()) return it->second;
    Term t = graph_.fresh_blank();
    blank_labels_.emplace(label, t);
    return t;
  }

  std::string iriref() {
    advance();  // <
    std::string out;
    while (true) {
      if (at_end()) fail("unterminated IRI");
      char c = advance();
      if (c == '>') break;
      if (std::isspace(static_cast<unsigned char>(c))) fail("whitespace in IRI");
      out += c;
    }
    if (out.find(':') == std::string::npos) fail("relative IRI <" + out + "> (no @base support)");
    return out;
  }

  std::string prefixed_name() {
    std::size_t start_line = line_;
    std::size_t start_col = col_;
    std::string prefix;
    while (!at_end() && peek() != ':' && (is_pn_char(peek()) || peek() == '.')) prefix += advance();
    if (peek() != ':') {
      throw ParseError(start_line, start_col, prefix.empty() ? current_token() : prefix,
                       "expected a term");
    }
    advance();
    std::string local;
    while (!at_end()) {
      char c = peek();
      if (is_pn_char(c) || c == ':' || c == '%') {
        local += advance();
      } else if (c == '.' && (is_pn_char(peek(1)) || peek(1) == ':')) {
        local += advance();
      } else {
        break;
      }
    }
    auto it = prefixes_.find(prefix);
    if (it == prefixes_.end()) {
      throw ParseError(start_line, start_col, prefix + ":" + local,
                       "unresolved prefix '" + prefix + ":'");
    }
    return it->second + local;
  }

  Term string_literal() {
    char quote = advance();
    bool long_form = peek() == quote && peek(1) == quote;
    if (long_form) {
      advance();
      advance();
    }
    std::string lex;
    while (true) {
      if (at_end()) fail("unterminated string literal");
      char c = advance();
      if (c == quote) {
        if (!long_form) break;
        if (peek() == quote && peek(1) == quote) {
          advance();
          advance();
          break;
        }
        lex += c;
        continue;
      }
      if (c == '\n' && !long_form) fail("newline in string literal");
      if (c == '\\') {
        if (at_end()) fail("unterminated escape");
        char e = advance();
        switch (e) {
          case 't': lex += '\t'; break;
          case 'n': lex += '\n'; break;
          case 'r': lex += '\r'; break;
          case 'b': lex += '\b'; break;
          case 'f': lex += '\f'; break;
          case '"': lex += '"'; break;
          case '\'': lex += '\''; break;
          case '\\': lex += '\\'; break;
          case 'u':
          case 'U': {
            std::size_t digits = e == 'u' ? 4 : 8;
            std::uint32_t cp = 0;
            for (std::size_t i = 0; i < digits; ++i) {
              if (at_end() || !std::isxdigit(static_cast<unsigned char>(peek()))) fail("bad unicode escape");
              char h = advance();
              cp = cp * 16 + static_cast<std::uint32_t>(std::isdigit(static_cast<unsigned char>(h))
                                                          ? h - '0'
                                                          : std::tolower(static_cast<unsigned char>(h)) - 'a' + 10);
            }
            append_utf8(lex, cp);
            break;
          }
          default: fail(std::string("unknown escape \\") + e);
        }
        continue;
      }
      lex += c;
    }
    if (peek() == '@') fail("language tags are not supported");
    std::string datatype = ns::xsd("string");
    if (peek() == '^' && peek(1) == '^') {
      advance();
      advance();
      datatype = peek() == '<' ? iriref() : prefixed_name();
    }
    try {
      return make_literal(std::move(lex), std::move(datatype));
    } catch (const DecimalError& e) {
      fail(e.what());
    }
  }

  Term numeric_literal() {
    std::size_t start_line = line_;
    std::size_t start_col = col_;
    std::string lex;
    if (peek() == '+' || peek() == '-') lex += advance();
    while (std::isdigit(static_cast<unsigned char>(peek()))) lex += advance();
    bool has_dot = false;
    bool has_exp = false;
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      has_dot = true;
      lex += advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) lex += advance();
    }
    if (peek() == 'e' || peek() == 'E') {
      has_exp = true;
      lex += advance();
      if (peek() == '+' || peek() == '-') lex += advance();
      if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("malformed exponent");
      while (std::isdigit(static_cast<unsigned char>(peek()))) lex += advance();
    }
    if (!at_end() && !is_delimiter(peek())) fail("malformed numeric literal");
    std::string dt = has_exp ? ns::xsd("double") : has_dot ? ns::xsd("decimal") : ns::xsd("integer");
    try {
      return make_literal(std::move(lex), std::move(dt));
    } catch (const DecimalError& e) {
      throw ParseError(start_line, start_col, lex, e.what());
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
  Graph graph_;
  std::map<std::string, std::string> prefixes_;
  std::map<std::string, Term> blank_labels_;
};

}  // namespace

Graph parse_turtle(std::string_view source) { return Parser(source).run(); }

// ---------------------------------------------------------------------------
// Serializer

namespace {

const std::map<std::string, std::string>& standard_prefixes() {
  static const std::map<std::string, std::string> kStd = {
      {"owl", std::string(ns::kOwl)},
      {"rdf", std::string(ns::kRdf)},
      {"rdfs", std::string(ns::kRdfs)},
      {"xsd", std::string(ns::kXsd)},
  };
  return kStd;
}

bool valid_local(std::string_view s) {
  if (s.empty()) return true;
  if (s.front() == '-' || s.front() == '.' || s.back() == '.') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

bool matches_integer(std::string_view s) {
  std::size_t i = (!s.empty() && (s[0] == '+' || s[0] == '-')) ? 1 : 0;
  if (i >= s.size()) return false;
  return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool matches_decimal(std::string_view s) {
  auto dot = s.find('.');
  if (dot == std::string_view::npos || dot + 1 >= s.size()) return false;
  std::string_view whole = s.substr(0, dot);
  std::string_view frac = s.substr(dot + 1);
  bool whole_ok = whole.empty() || whole == "+" || whole == "-" || matches_integer(whole);
  return whole_ok && std::all_of(frac.begin(), frac.end(),
                                 [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool matches_double(std::string_view s) {
  auto e = s.find_first_of("eE");
  if (e == std::string_view::npos) return false;
  std::string_view mant = s.substr(0, e);
  std::string_view exp = s.substr(e + 1);
  return (matches_integer(mant) || matches_decimal(mant)) && matches_integer(exp);
}

std::string escape_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

class Serializer {
 public:
  explicit Serializer(const Graph& g) {
    prefixes_ = standard_prefixes();
    for (const auto& [k, v] : g.prefixes()) prefixes_[k] = v;
    for (const auto& t : g.triples()) {
      auto [it, inserted] = by_subject_.try_emplace(t.subject);
      if (inserted) subject_order_.push_back(t.subject);
      auto& plist = it->second;
      auto pit = std::find_if(plist.begin(), plist.end(),
                              [&](const auto& e) { return e.first == t.predicate; });
      if (pit == plist.end()) {
        plist.emplace_back(t.predicate, std::vector<Term>{t.object});
      } else {
        pit->second.push_back(t.object);
      }
      if (t.object.is_blank()) ++refcount_[t.object.blank_label()];
    }
    // Blank nodes on a cycle are never nested; they keep a labelled block.
    for (auto& [label, count] : refcount_) {
      if (on_cycle(label)) count = std::max<std::size_t>(count, 2);
    }
  }

  std::string run() {
    std::string out;
    for (const auto& [label, ns_iri] : prefixes_) out += "@prefix " + label + ": <" + ns_iri + "> .\n";
    auto emit_block = [&](const std::string& block) { out += "\n" + block; };
    for (const auto& subject : subject_order_) {
      if (subject.is_blank()) continue;
      emit_block(render_subject_block(subject));
    }
    for (const auto& subject : subject_order_) {
      if (!subject.is_blank() || visited_.contains(subject.blank_label())) continue;
      if (refs(subject) == 1) continue;  // nested under its single referrer
      emit_block(render_subject_block(subject));
    }
    // Blank nodes left over sit on reference cycles; anchor them by label.
    for (const auto& subject : subject_order_) {
      if (!subject.is_blank() || visited_.contains(subject.blank_label())) continue;
      emit_block(render_subject_block(subject));
    }
    return out;
  }

 private:
  [[nodiscard]] bool on_cycle(const std::string& start) const {
    std::set<std::string> seen;
    std::vector<std::string> stack = {start};
    while (!stack.empty()) {
      auto it = by_subject_.find(Term::blank(stack.back()));
      stack.pop_back();
      if (it == by_subject_.end()) continue;
      for (const auto& [pred, objs] : it->second) {
        for (const auto& o : objs) {
          if (!o.is_blank()) continue;
          if (o.blank_label() == start) return true;
          if (seen.insert(o.blank_label()).second) stack.push_back(o.blank_label());
        }
      }
    }
    return false;
  }

  // Labels written out are renumbered in order of first appearance.
  std::string blank_ref(const std::string& label) {
    auto [it, inserted] = out_labels_.try_emplace(label, "b" + std::to_string(out_labels_.size()));
    return "_:" + it->second;
  }

  [[nodiscard]] std::size_t refs(const Term& b) const {
    auto it = refcount_.find(b.blank_label());
    return it == refcount_.end() ? 0 : it->second;
  }

  std::string render_subject_block(const Term& subject) {
    std::string head;
    if (subject.is_blank()) {
      visited_.insert(subject.blank_label());
      if (refs(subject) == 0) {
        return "[ " + render_predicates(subject, "  ") + " ] .\n";
      }
      head = blank_ref(subject.blank_label());
    } else {
      head = render_iri(subject.iri_value());
    }
    return head + " " + render_predicates(subject, "    ") + " .\n";
  }

  std::string render_predicates(const Term& subject, const std::string& indent) {
    auto it = by_subject_.find(subject);
    if (it == by_subject_.end()) return "";
    std::string out;
    bool first = true;
    for (const auto& [pred, objs] : it->second) {
      if (!first) out += " ;\n" + indent;
      first = false;
      out += pred.is_iri(ns::rdf("type")) ? "a" : render_iri(pred.iri_value());
      out += " ";
      for (std::size_t i = 0; i < objs.size(); ++i) {
        if (i > 0) out += " , ";
        out += render_object(objs[i], indent + "    ");
      }
    }
    return out;
  }

  struct ListShape {
    std::vector<Term> items;
    std::vector<std::string> nodes;
  };

  // A blank node is written as ( ... ) when it heads a chain of single-use
  // nodes carrying exactly one rdf:first and one rdf:rest each.
  std::optional<ListShape> as_list(const Term& head) const {
    ListShape shape;
    std::set<std::string> seen;
    Term node = head;
    while (!node.is_iri(ns::rdf("nil"))) {
      if (!node.is_blank() || refs(node) != 1 || !seen.insert(node.blank_label()).second) return std::nullopt;
      if (visited_.contains(node.blank_label())) return std::nullopt;
      auto it = by_subject_.find(node);
      if (it == by_subject_.end() || it->second.size() != 2) return std::nullopt;
      const Term* first = nullptr;
      const Term* rest = nullptr;
      for (const auto& [pred, objs] : it->second) {
        if (objs.size() != 1) return std::nullopt;
        if (pred.is_iri(ns::rdf("first"))) first = &objs[0];
        else if (pred.is_iri(ns::rdf("rest"))) rest = &objs[0];
      }
      if (first == nullptr || rest == nullptr) return std::nullopt;
      shape.items.push_back(*first);
      shape.nodes.push_back(node.blank_label());
      node = *rest;
    }
    return shape;
  }

  std::string render_object(const Term& obj, const std::string& indent) {
    if (obj.is_iri()) return render_iri(obj.iri_value());
    if (obj.is_literal()) return render_literal(obj.literal());
    const std::string& label = obj.blank_label();
    if (refs(obj) != 1 || visited_.contains(label)) return blank_ref(label);
    if (auto list = as_list(obj)) {
      visited_.insert(list->nodes.begin(), list->nodes.end());
      std::string out = "(";
      for (const auto& item : list->items) out += " " + render_object(item, indent);
      return out + " )";
    }
    visited_.insert(label);
    if (!by_subject_.contains(obj)) return "[]";
    return "[ " + render_predicates(obj, indent) + " ]";
  }

  std::string render_iri(const std::string& iri) const {
    const std::string* best_label = nullptr;
    std::size_t best_len = 0;
    for (const auto& [label, ns_iri] : prefixes_) {
      if (iri.size() >= ns_iri.size() && iri.compare(0, ns_iri.size(), ns_iri) == 0 &&
          ns_iri.size() > best_len && valid_local(std::string_view(iri).substr(ns_iri.size()))) {
        best_label = &label;
        best_len = ns_iri.size();
      }
    }
    if (best_label != nullptr) return *best_label + ":" + iri.substr(best_len);
    return "<" + iri + ">";
  }

  std::string render_literal(const Literal& lit) const {
    const std::string& dt = lit.datatype;
    const std::string& lex = lit.lexical;
    if (dt == ns::xsd("integer") && matches_integer(lex)) return lex;
    if (dt == ns::xsd("decimal") && matches_decimal(lex)) return lex;
    if (dt == ns::xsd("double") && matches_double(lex)) return lex;
    if (dt == ns::xsd("boolean") && (lex == "true" || lex == "false")) return lex;
    if (dt == ns::xsd("string")) return escape_string(lex);
    return escape_string(lex) + "^^" + render_iri(dt);
  }

  std::map<std::string, std::string> prefixes_;
  std::map<Term, std::vector<std::pair<Term, std::vector<Term>>>> by_subject_;
  std::vector<Term> subject_order_;
  std::map<std::string, std::size_t> refcount_;
  std::set<std::string> visited_;
  std::map<std::string, std::string> out_labels_;
};

}  // namespace

std::string serialize_turtle(const Graph& g) { return Serializer(g).run(); }

// ---------------------------------------------------------------------------
// Isomorphism

namespace {

struct BlankIndex {
  std::vector<std::string> labels;
  std::map<std::string, std::size_t> id;
  std::vector<std::vector<const Triple*>> incident;
};

BlankIndex index_blanks(const Graph& g) {
  BlankIndex ix;
  auto note = [&](const Term& t) {
    if (t.is_blank() && !ix.id.contains(t.blank_label())) {
      ix.id[t.blank_label()] = ix.labels.size();
      ix.labels.push_back(t.blank_label());
      ix.incident.emplace_back();
    }
  };
  for (const auto& t : g.triples()) {
    note(t.subject);
    note(t.object);
  }
  for (const auto& t : g.triples()) {
    if (t.subject.is_blank()) ix.incident[ix.id[t.subject.blank_label()]].push_back(&t);
    if (t.object.is_blank() && !(t.subject == t.object)) ix.incident[ix.id[t.object.blank_label()]].push_back(&t);
  }
  return ix;
}

std::vector<std::size_t> refine_colors(const BlankIndex& ix) {
  std::hash<std::string> h;
  std::vector<std::size_t> color(ix.labels.size(), 0);
  auto term_sig = [&](const Term& t, const std::vector<std::size_t>& c) -> std::size_t {
    if (t.is_blank()) return 0xb1a4c ^ (c[ix.id.at(t.blank_label())] * 1099511628211ULL);
    std::size_t v = h(t.text());
    if (t.is_literal()) v ^= h(t.literal().datatype) * 31;
    return v;
  };
  for (std::size_t round = 0; round <= ix.labels.size() && round < 32; ++round) {
    std::vector<std::size_t> next(color.size());
    for (std::size_t i = 0; i < color.size(); ++i) {
      std::vector<std::size_t> parts;
      for (const Triple* t : ix.incident[i]) {
        bool as_subject = t->subject.is_blank() && ix.id.at(t->subject.blank_label()) == i;
        std::size_t other = as_subject ? term_sig(t->object, color) : term_sig(t->subject, color);
        parts.push_back((as_subject ? 17 : 29) ^ (h(t->predicate.text()) * 3) ^ (other * 7));
      }
      std::sort(parts.begin(), parts.end());
      std::size_t v = color[i] * 0x100000001b3ULL;
      for (auto p : parts) v = (v ^ p) * 0x100000001b3ULL;
      next[i] = v;
    }
    if (next == color) break;
    color = std::move(next);
  }
  return color;
}

}  // namespace

bool isomorphic(const Graph& a, const Graph& b) {
  if (a.size() != b.size()) return false;
  for (const auto& t : a.triples()) {
    if (!t.subject.is_blank() && !t.object.is_blank() && !b.contains(t)) return false;
  }
  BlankIndex ia = index_blanks(a);
  BlankIndex ib = index_blanks(b);
  if (ia.labels.size() != ib.labels.size()) return false;
  auto ca = refine_colors(ia);
  auto cb = refine_colors(ib);
  {
    auto sa = ca;
    auto sb = cb;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb) return false;
  }

  const std::size_t n = ia.labels.size();
  std::vector<std::ptrdiff_t> map_ab(n, -1);
  std::vector<bool> used_b(n, false);

  auto image = [&](const Term& t) -> std::optional<Term> {
    if (!t.is_blank()) return t;
    auto m = map_ab[ia.id.at(t.blank_label())];
    if (m < 0) return std::nullopt;
    return Term::blank(ib.labels[static_cast<std::size_t>(m)]);
  };
  auto consistent = [&](std::size_t i) {
    for (const Triple* t : ia.incident[i]) {
      auto s = image(t->subject);
      auto o = image(t->object);
      if (s && o && !b.contains(Triple{*s, t->predicate, *o})) return false;
    }
    return true;
  };

  // Most constrained first: nodes whose colour class is smallest.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::map<std::size_t, std::size_t> class_size;
  for (auto c : ca) ++class_size[c];
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return class_size[ca[x]] < class_size[ca[y]]; });

  std::function<bool(std::size_t)> assign = [&](std::size_t k) -> bool {
    if (k == n) return true;
    std::size_t i = order[k];
    for (std::size_t j = 0; j < n; ++j) {
      if (used_b[j] || cb[j] != ca[i]) continue;
      map_ab[i] = static_cast<std::ptrdiff_t>(j);
      used_b[j] = true;
      if (consistent(i) && assign(k + 1)) return true;
      used_b[j] = false;
      map_ab[i] = -1;
    }
    return false;
  };
  return assign(0);
}

std::vector<Term> read_list(const Graph& g, const Term& head) {
  std::vector<Term> items;
  std::set<Term> seen;
  Term node = head;
  while (!node.is_iri(ns::rdf("nil"))) {
    if (!seen.insert(node).second) throw std::runtime_error("cyclic rdf:List at " + head.text());
    auto firsts = g.objects(node, ns::rdf("first"));
    auto rests = g.objects(node, ns::rdf("rest"));
    if (firsts.size() != 1 || rests.size() != 1) {
      throw std::runtime_error("malformed rdf:List node " + node.text());
    }
    items.push_back(firsts[0]);
    node = rests[0];
  }
  return items;
}

}  // namespace owlaudit::turtle
