#include "drillscope/chart/filter_expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <variant>

#include <fmt/format.h>

#include "drillscope/error.hpp"

namespace drillscope::chart {

using tabular::kInf;
using tabular::Predicate;
using tabular::Range;
using tabular::Scalar;

namespace {

Error unparseable(std::string_view what, std::string_view source) {
  return Error(ErrorCode::UnparseableFilterExpression,
               fmt::format("cannot parse filter '{}': {}", source, what));
}

enum class Tok { Ident, Number, String, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (pos_ >= src_.size()) break;
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' || src_[pos_] == '$')) {
          ++pos_;
        }
        out.push_back({Tok::Ident, std::string(src_.substr(start, pos_ - start)), 0});
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        double v = 0;
        auto res = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), v);
        if (res.ec != std::errc{}) throw unparseable("bad number", src_);
        std::size_t len = static_cast<std::size_t>(res.ptr - (src_.data() + pos_));
        out.push_back({Tok::Number, std::string(src_.substr(pos_, len)), v});
        pos_ += len;
      } else if (c == '\'' || c == '"') {
        out.push_back({Tok::String, read_string(c), 0});
      } else {
        static constexpr std::string_view kPuncts[] = {"===", "!==", "==", "!=", "<=", ">=", "&&",
                                                       "||",  "<",   ">",  "(",  ")",  "[",  "]",
                                                       ",",   ".",   "-",  "!"};
        bool matched = false;
        for (auto p : kPuncts) {
          if (src_.substr(pos_, p.size()) == p) {
            out.push_back({Tok::Punct, std::string(p), 0});
            pos_ += p.size();
            matched = true;
            break;
          }
        }
        if (!matched) throw unparseable(fmt::format("unexpected character '{}'", c), src_);
      }
    }
    out.push_back({Tok::End, "", 0});
    return out;
  }

 private:
  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  std::string read_string(char quote) {
    ++pos_;
    std::string out;
    while (pos_ < src_.size() && src_[pos_] != quote) {
      if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) ++pos_;
      out.push_back(src_[pos_++]);
    }
    if (pos_ >= src_.size()) throw unparseable("unterminated string", src_);
    ++pos_;
    return out;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

// Either a reference to a field or a literal value.
struct Operand {
  std::optional<std::string> field;
  Scalar literal;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src), toks_(Lexer(src).run()) {}

  std::vector<Predicate> parse() {
    std::vector<Predicate> atoms;
    conjunction(atoms);
    if (peek().kind != Tok::End) throw unparseable(fmt::format("unexpected '{}'", peek().text), src_);
    return atoms;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(i_ + ahead, toks_.size() - 1)];
  }
  bool accept(std::string_view punct) {
    if (peek().kind == Tok::Punct && peek().text == punct) {
      ++i_;
      return true;
    }
    return false;
  }
  void expect(std::string_view punct) {
    if (!accept(punct)) throw unparseable(fmt::format("expected '{}'", punct), src_);
  }
  bool is_ident(std::string_view name, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Ident && peek(ahead).text == name;
  }

  void conjunction(std::vector<Predicate>& out) {
    term(out);
    while (true) {
      if (accept("&&")) {
        term(out);
      } else if (peek().kind == Tok::Punct && peek().text == "||") {
        throw unparseable("disjunctions are not supported", src_);
      } else {
        return;
      }
    }
  }

  void term(std::vector<Predicate>& out) {
    if (accept("(")) {
      conjunction(out);
      expect(")");
      return;
    }
    if (is_ident("isValid") && peek(1).text == "(") {
      i_ += 2;
      auto field = field_ref();
      if (!field) throw unparseable("isValid expects a field", src_);
      expect(")");
      out.push_back(Predicate::range(*field, -kInf, kInf));
      return;
    }
    if (is_ident("indexof") && peek(1).text == "(") {
      i_ += 2;
      expect("[");
      std::vector<Scalar> values;
      if (!accept("]")) {
        do {
          values.push_back(literal());
        } while (accept(","));
        expect("]");
      }
      expect(",");
      auto field = field_ref();
      if (!field) throw unparseable("indexof expects a field", src_);
      expect(")");
      std::string op = comparator();
      auto bound = literal();
      const double* n = std::get_if<double>(&bound);
      bool member = n && ((op == ">=" && *n == 0) || (op == ">" && *n == -1) ||
                          ((op == "!=" || op == "!==") && *n == -1));
      if (!member) throw unparseable("only membership tests on indexof are supported", src_);
      out.push_back(Predicate::in_set(*field, std::move(values)));
      return;
    }
    Operand lhs = operand();
    std::string op = comparator();
    Operand rhs = operand();
    if (lhs.field && rhs.field) throw unparseable("field-to-field comparisons are not supported", src_);
    if (!lhs.field && !rhs.field) throw unparseable("comparison without a field", src_);
    if (rhs.field) {
      std::swap(lhs, rhs);
      if (op == "<") op = ">";
      else if (op == "<=") op = ">=";
      else if (op == ">") op = "<";
      else if (op == ">=") op = "<=";
    }
    const std::string& field = *lhs.field;
    if (op == "==" || op == "===") {
      out.push_back(Predicate::equals(field, rhs.literal));
      return;
    }
    if (op == "!=" || op == "!==") throw unparseable("inequality filters are not supported", src_);
    const double* v = std::get_if<double>(&rhs.literal);
    if (!v) throw unparseable("ordered comparison needs a number or time(...)", src_);
    if (op == "<") out.push_back(Predicate::range(field, -kInf, *v, true, false));
    if (op == "<=") out.push_back(Predicate::range(field, -kInf, *v, true, true));
    if (op == ">") out.push_back(Predicate::range(field, *v, kInf, false, true));
    if (op == ">=") out.push_back(Predicate::range(field, *v, kInf, true, true));
  }

  std::string comparator() {
    static constexpr std::string_view kOps[] = {"===", "!==", "==", "!=", "<=", ">=", "<", ">"};
    for (auto op : kOps) {
      if (accept(op)) return std::string(op);
    }
    throw unparseable("expected a comparison operator", src_);
  }

  // datum.f | datum['f'] | time(<field>) | toNumber(<field>) | bare identifier
  std::optional<std::string> field_ref() {
    if (is_ident("datum")) {
      ++i_;
      if (accept(".")) {
        if (peek().kind != Tok::Ident) throw unparseable("expected a field name", src_);
        return toks_[i_++].text;
      }
      expect("[");
      if (peek().kind != Tok::String) throw unparseable("expected a quoted field name", src_);
      std::string name = toks_[i_++].text;
      expect("]");
      return name;
    }
    if ((is_ident("time") || is_ident("toNumber") || is_ident("toDate")) && peek(1).text == "(" &&
        (is_ident("datum", 2) || (peek(2).kind == Tok::Ident && peek(3).text == ")"))) {
      i_ += 2;
      auto f = field_ref();
      expect(")");
      return f;
    }
    if (peek().kind == Tok::Ident && !is_keyword(peek().text)) return toks_[i_++].text;
    return std::nullopt;
  }

  static bool is_keyword(std::string_view s) {
    return s == "true" || s == "false" || s == "null" || s == "time" || s == "datetime";
  }

  Scalar literal() {
    if (accept("-")) {
      if (peek().kind != Tok::Number) throw unparseable("expected a number after '-'", src_);
      return -toks_[i_++].number;
    }
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      ++i_;
      return t.number;
    }
    if (t.kind == Tok::String) {
      ++i_;
      return t.text;
    }
    if (is_ident("true") || is_ident("false")) {
      ++i_;
      return t.text == "true";
    }
    if ((is_ident("time") || is_ident("datetime")) && peek(1).text == "(" && peek(2).kind == Tok::String) {
      i_ += 2;
      std::string iso = toks_[i_++].text;
      expect(")");
      auto ms = tabular::parse_iso8601_ms(iso);
      if (!ms) throw unparseable(fmt::format("bad date '{}'", iso), src_);
      return *ms;
    }
    throw unparseable(fmt::format("expected a literal, found '{}'", t.text), src_);
  }

  Operand operand() {
    if (auto f = field_ref()) return {std::move(f), {}};
    return {std::nullopt, literal()};
  }

  std::string_view src_;
  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

// Collapses same-field range atoms into one range, keeping first-seen order.
Predicate merge_atoms(std::vector<Predicate> atoms, std::string_view source) {
  std::vector<Predicate> out;
  for (auto& a : atoms) {
    const auto* r = std::get_if<Range>(&a.node);
    bool merged = false;
    if (r) {
      for (auto& existing : out) {
        auto* er = std::get_if<Range>(&existing.node);
        if (er && er->field == r->field) {
          auto both = intersect(*er, *r);
          if (!both) {
            throw Error(ErrorCode::ConflictingFilter,
                        fmt::format("filter '{}' has an empty range on '{}'", source, r->field));
          }
          *er = *both;
          merged = true;
          break;
        }
      }
    }
    if (!merged) out.push_back(std::move(a));
  }
  if (out.empty()) throw unparseable("empty filter", source);
  return Predicate::all_of(std::move(out));
}

std::vector<Predicate> object_atoms(const nlohmann::json& j) {
  const std::string src = j.dump();
  if (j.contains("and")) {
    if (!j["and"].is_array()) throw unparseable("'and' must be an array", src);
    std::vector<Predicate> out;
    for (const auto& inner : j["and"]) {
      std::vector<Predicate> sub;
      if (inner.is_string()) {
        sub = Parser(inner.get<std::string>()).parse();
      } else {
        sub = object_atoms(inner);
      }
      out.insert(out.end(), sub.begin(), sub.end());
    }
    return out;
  }
  if (j.contains("or") || j.contains("not")) throw unparseable("'or'/'not' are not supported", src);
  if (!j.contains("field") || !j["field"].is_string()) throw unparseable("missing field", src);
  for (const auto& [key, _] : j.items()) {
    static const std::set<std::string> kKnown{"field", "equal", "lt", "lte", "gt", "gte", "range", "oneOf", "valid"};
    if (!kKnown.count(key)) throw unparseable(fmt::format("unsupported key '{}'", key), src);
  }
  const std::string field = j["field"].get<std::string>();
  auto literal = [&](const nlohmann::json& v) -> Scalar {
    if (v.is_object() && v.size() == 1 && v.contains("expr") && v["expr"].is_string()) {
      throw unparseable("expression literals are not supported", src);
    }
    try {
      return tabular::scalar_from_json(v);
    } catch (const Error&) {
      throw unparseable("bad literal", src);
    }
  };
  auto number = [&](const nlohmann::json& v) {
    if (!v.is_number()) throw unparseable("ordered comparison needs a number", src);
    return v.get<double>();
  };
  std::vector<Predicate> out;
  if (j.contains("equal")) out.push_back(Predicate::equals(field, literal(j["equal"])));
  if (j.contains("oneOf")) {
    if (!j["oneOf"].is_array()) throw unparseable("'oneOf' must be an array", src);
    std::vector<Scalar> values;
    for (const auto& v : j["oneOf"]) values.push_back(literal(v));
    out.push_back(Predicate::in_set(field, std::move(values)));
  }
  if (j.contains("lt")) out.push_back(Predicate::range(field, -kInf, number(j["lt"]), true, false));
  if (j.contains("lte")) out.push_back(Predicate::range(field, -kInf, number(j["lte"])));
  if (j.contains("gt")) out.push_back(Predicate::range(field, number(j["gt"]), kInf, false, true));
  if (j.contains("gte")) out.push_back(Predicate::range(field, number(j["gte"]), kInf));
  if (j.contains("range")) {
    const auto& r = j["range"];
    if (!r.is_array() || r.size() != 2) throw unparseable("'range' must have two entries", src);
    double lo = r[0].is_null() ? -kInf : number(r[0]);
    double hi = r[1].is_null() ? kInf : number(r[1]);
    if (lo > hi) throw unparseable("range bounds are reversed", src);
    out.push_back(Predicate::range(field, lo, hi));
  }
  if (j.contains("valid")) {
    if (j["valid"] != true) throw unparseable("only valid: true is supported", src);
    out.push_back(Predicate::range(field, -kInf, kInf));
  }
  if (out.empty()) throw unparseable("no predicate key", src);
  return out;
}

std::string js_quoted(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

std::string number_text(double v) { return fmt::format("{}", v); }

std::string literal_text(const Scalar& s) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) return number_text(v);
        else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else return js_quoted(v);
      },
      s);
}

std::string field_text(std::string_view field) { return "datum[" + js_quoted(field) + "]"; }

}  // namespace

std::optional<Range> intersect(const Range& a, const Range& b) {
  Range out = a;
  if (b.low > a.low || (b.low == a.low && !b.low_inclusive)) {
    out.low = b.low;
    out.low_inclusive = b.low_inclusive && (b.low != a.low || a.low_inclusive);
  }
  if (b.high < a.high || (b.high == a.high && !b.high_inclusive)) {
    out.high = b.high;
    out.high_inclusive = b.high_inclusive && (b.high != a.high || a.high_inclusive);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

Predicate parse_filter_expression(std::string_view expression) {
  return merge_atoms(Parser(expression).parse(), expression);
}

Predicate parse_filter(const nlohmann::json& filter) {
  if (filter.is_string()) return parse_filter_expression(filter.get<std::string>());
  if (filter.is_object()) return merge_atoms(object_atoms(filter), filter.dump());
  throw unparseable("filter must be a string or an object", filter.dump());
}

std::string filter_expression(const Predicate& predicate) {
  std::vector<std::string> parts;
  for (const auto& atom : predicate.atoms()) {
    std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, tabular::Equals>) {
            parts.push_back(field_text(a.field) + " === " + literal_text(a.value));
          } else if constexpr (std::is_same_v<T, tabular::InSet>) {
            std::vector<std::string> values;
            for (const auto& v : a.values) values.push_back(literal_text(v));
            parts.push_back(fmt::format("indexof([{}], {}) >= 0", fmt::join(values, ", "), field_text(a.field)));
          } else if constexpr (std::is_same_v<T, Range>) {
            bool lo = std::isfinite(a.low), hi = std::isfinite(a.high);
            if (!lo && !hi) parts.push_back("isValid(" + field_text(a.field) + ")");
            if (lo) parts.push_back(field_text(a.field) + (a.low_inclusive ? " >= " : " > ") + number_text(a.low));
            if (hi) parts.push_back(field_text(a.field) + (a.high_inclusive ? " <= " : " < ") + number_text(a.high));
          }
        },
        atom.node);
  }
  if (parts.empty()) return "true";
  return fmt::format("{}", fmt::join(parts, " && "));
}

}  // namespace drillscope::chart
