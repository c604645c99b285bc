#pragma once

// Factored rational functions of one complex variable and the rational
// curves they parametrize. Everything downstream (density, quadrature,
// sheet counting, limit sets) reads its divisor data from here.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace amoeba {

using cplx = std::complex<double>;

class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& message, std::size_t offset)
      : std::runtime_error(message + " (at byte " + std::to_string(offset) + ")"),
        message_(message),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  std::size_t offset_;
};

// Evaluation at a pole, log-derivative at a root, and similar requests
// outside an operation's domain.
class domain_error : public std::runtime_error {
 public:
  domain_error(const std::string& what, cplx where)
      : std::runtime_error(what), where_(where) {}
  cplx where() const { return where_; }

 private:
  cplx where_;
};

// A curve sitting in a one-dimensional subtorus, handed to an operation
// that needs the generic case.
class degenerate_error : public std::runtime_error {
 public:
  explicit degenerate_error(const std::string& what) : std::runtime_error(what) {}
};

// Iteration budgets exhausted, non-convergent refinements.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Either a finite point of the parameter plane or the point at infinity.
struct ExtendedPoint {
  cplx value{0.0, 0.0};
  bool infinite = false;

  static ExtendedPoint infinity() { return ExtendedPoint{cplx{}, true}; }
  static ExtendedPoint finite(cplx z) { return ExtendedPoint{z, false}; }

  bool operator==(const ExtendedPoint& o) const {
    if (infinite != o.infinite) return false;
    return infinite || value == o.value;
  }
};

struct Factor {
  cplx root;
  int multiplicity;  // negative for poles

  bool operator==(const Factor& o) const {
    return root == o.root && multiplicity == o.multiplicity;
  }
};

namespace detail {

inline bool lex_less(cplx a, cplx b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

// Integer power by repeated squaring; negative exponents invert at the end.
inline cplx ipow(cplx base, int exponent) {
  if (exponent == 0) return cplx{1.0, 0.0};
  unsigned n = exponent < 0 ? static_cast<unsigned>(-(long long)exponent)
                            : static_cast<unsigned>(exponent);
  cplx acc{1.0, 0.0};
  cplx b = base;
  while (n != 0) {
    if (n & 1U) acc *= b;
    b *= b;
    n >>= 1U;
  }
  return exponent < 0 ? cplx{1.0, 0.0} / acc : acc;
}

inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Canonical complex literal: "3", "-1.5", "2i", "2+3i".
inline std::string format_cplx(cplx v) {
  if (v.imag() == 0.0) return format_double(v.real());
  if (v.real() == 0.0) return format_double(v.imag()) + "i";
  std::string s = format_double(v.real());
  if (v.imag() > 0.0 || std::isnan(v.imag())) s += "+";
  s += format_double(v.imag()) + "i";
  return s;
}

}  // namespace detail

// One coordinate function c * prod (z - root)^mult in fully factored form.
// Roots are pairwise distinct; the constant and all multiplicities are
// nonzero. Instances are immutable after construction.
class RationalComponent {
 public:
  // Merges duplicate roots by summing multiplicities and drops factors whose
  // merged multiplicity is zero. Distinct roots closer than 1e-12 are
  // rejected: downstream quadrature needs a positive minimum root separation.
  RationalComponent(cplx constant, std::vector<Factor> factors)
      : constant_(constant) {
    if (constant_ == cplx{0.0, 0.0})
      throw std::invalid_argument("component constant must be nonzero");
    std::stable_sort(factors.begin(), factors.end(),
                     [](const Factor& a, const Factor& b) {
                       return detail::lex_less(a.root, b.root);
                     });
    for (const Factor& f : factors) {
      if (!factors_.empty() && factors_.back().root == f.root) {
        factors_.back().multiplicity += f.multiplicity;
        continue;
      }
      if (!factors_.empty() && std::abs(factors_.back().root - f.root) < 1e-12)
        throw std::invalid_argument(
            "roots closer than 1e-12 are rejected as duplicates");
      factors_.push_back(f);
    }
    std::erase_if(factors_, [](const Factor& f) { return f.multiplicity == 0; });
  }

  const cplx& constant() const { return constant_; }
  const std::vector<Factor>& factors() const { return factors_; }

  bool operator==(const RationalComponent& o) const {
    return constant_ == o.constant_ && factors_ == o.factors_;
  }

  // Total degree sum(m_l); order at infinity is its negative.
  int degree() const {
    int d = 0;
    for (const Factor& f : factors_) d += f.multiplicity;
    return d;
  }

 private:
  cplx constant_;
  std::vector<Factor> factors_;
};

// The map f: C -> (C*)^n given by an ordered list of components, n >= 2.
class RationalCurve {
 public:
  explicit RationalCurve(std::vector<RationalComponent> components)
      : components_(std::move(components)) {
    if (components_.size() < 2)
      throw std::invalid_argument("a rational curve needs at least 2 components");
  }

  const std::vector<RationalComponent>& components() const { return components_; }
  std::size_t dimension() const { return components_.size(); }

 private:
  std::vector<RationalComponent> components_;
};

// --- evaluation -------------------------------------------------------------

inline cplx eval(const RationalComponent& c, cplx z) {
  cplx acc = c.constant();
  for (const Factor& f : c.factors()) {
    if (z == f.root && f.multiplicity < 0)
      throw domain_error("evaluation at a pole", f.root);
    acc *= detail::ipow(z - f.root, f.multiplicity);
  }
  return acc;
}

// f'(z)/f(z) as the partial-fraction sum over factors. Never forms the
// product, so high multiplicities cannot overflow.
inline cplx log_derivative(const RationalComponent& c, cplx z) {
  cplx acc{0.0, 0.0};
  for (const Factor& f : c.factors()) {
    if (z == f.root)
      throw domain_error("log-derivative at a zero or pole", f.root);
    acc += static_cast<double>(f.multiplicity) / (z - f.root);
  }
  return acc;
}

// Order of vanishing at p: the factor multiplicity at finite roots (0 when
// absent), minus the total degree at infinity.
inline int order_at(const RationalComponent& c, const ExtendedPoint& p) {
  if (p.infinite) return -c.degree();
  for (const Factor& f : c.factors())
    if (f.root == p.value) return f.multiplicity;
  return 0;
}

// Number of zeros and poles counted with multiplicity: sum |m_l|. A
// constant-only component returns 0 and contributes no pairs to the
// pairwise volume bound.
inline long long pole_zero_count(const RationalComponent& c) {
  long long n = 0;
  for (const Factor& f : c.factors()) n += std::llabs(f.multiplicity);
  return n;
}

// Union of all component roots, deduplicated and sorted lexicographically
// by (re, im).
inline std::vector<cplx> singular_support(const RationalCurve& f) {
  std::vector<cplx> pts;
  for (const RationalComponent& c : f.components())
    for (const Factor& fac : c.factors()) pts.push_back(fac.root);
  std::sort(pts.begin(), pts.end(), detail::lex_less);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// --- parsing ----------------------------------------------------------------
//
// Grammar (whitespace ignored, atoms multiply implicitly):
//   component := atom+
//   atom      := 'z' | '(' 'z' (sign literal)+ ')' | literal    [ '^' int ]
//   literal   := number | number 'i' | 'i' | number sign number 'i'
// A sign is only accepted where the grammar shows one; sums of atoms are not
// part of the factored form, so "z-1" (without parentheses) is an error.

namespace detail {

class ComponentParser {
 public:
  explicit ComponentParser(std::string_view text) : text_(text) {}

  RationalComponent parse() {
    cplx constant{1.0, 0.0};
    std::vector<Factor> factors;
    skip_ws();
    if (done()) throw parse_error("empty component", pos_);
    bool first_atom = true;
    while (!done()) {
      parse_atom(constant, factors, first_atom);
      first_atom = false;
      skip_ws();
    }
    if (constant == cplx{0.0, 0.0})
      throw parse_error("component has zero constant", 0);
    return RationalComponent(constant, std::move(factors));
  }

 private:
  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  void parse_atom(cplx& constant, std::vector<Factor>& factors, bool first) {
    skip_ws();
    char c = peek();
    bool is_linear = false;  // z or (z +- c): a root-bearing atom
    cplx root{0.0, 0.0};
    cplx literal{0.0, 0.0};

    if (c == 'z') {
      ++pos_;
      is_linear = true;
    } else if (c == '(') {
      std::size_t open = pos_++;
      skip_ws();
      if (peek() != 'z')
        throw parse_error("expected 'z' after '('", pos_);
      ++pos_;
      cplx shift{0.0, 0.0};
      skip_ws();
      while (peek() == '+' || peek() == '-') {
        double sign = (peek() == '-') ? -1.0 : 1.0;
        ++pos_;
        skip_ws();
        shift += sign * parse_literal();
        skip_ws();
      }
      if (peek() != ')')
        throw parse_error("unbalanced '(' in linear factor", open);
      ++pos_;
      root = -shift;
      is_linear = true;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
               c == 'i' || ((c == '+' || c == '-') && first)) {
      double sign = 1.0;
      if (c == '+' || c == '-') {
        sign = (c == '-') ? -1.0 : 1.0;
        ++pos_;
        skip_ws();
      }
      literal = sign * parse_literal();
      // Absorb "a+bi" into one literal atom.
      std::size_t save = pos_;
      skip_ws();
      if ((peek() == '+' || peek() == '-') && literal.imag() == 0.0) {
        double s2 = (peek() == '-') ? -1.0 : 1.0;
        std::size_t sign_pos = pos_++;
        skip_ws();
        cplx tail = parse_literal();
        if (tail.imag() == 0.0)
          throw parse_error("expected imaginary part after sign", sign_pos);
        literal += s2 * tail;
      } else {
        pos_ = save;
      }
    } else if (c == '+' || c == '-') {
      throw parse_error("unexpected sign; factored input is a product of atoms",
                        pos_);
    } else {
      throw parse_error("unexpected character", pos_);
    }

    int exponent = 1;
    skip_ws();
    if (peek() == '^') {
      ++pos_;
      exponent = parse_int();
    }

    if (is_linear) {
      if (exponent != 0) factors.push_back(Factor{root, exponent});
      // exponent 0 on a root atom: accepted and dropped
    } else {
      if (literal == cplx{0.0, 0.0})
        throw parse_error("zero constant factor", pos_);
      constant *= ipow(literal, exponent);
    }
  }

  // number, number i, or bare i
  cplx parse_literal() {
    skip_ws();
    if (peek() == 'i') {
      ++pos_;
      return cplx{0.0, 1.0};
    }
    double v = parse_number();
    if (peek() == 'i') {
      ++pos_;
      return cplx{0.0, v};
    }
    return cplx{v, 0.0};
  }

  double parse_number() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '.'))
      ++pos_;
    // exponent notation: 1e-3, 2.5E+4
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_ + 1;
      if (mark < text_.size() && (text_[mark] == '+' || text_[mark] == '-'))
        ++mark;
      if (mark < text_.size() &&
          std::isdigit(static_cast<unsigned char>(text_[mark]))) {
        pos_ = mark;
        while (pos_ < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_])))
          ++pos_;
      }
    }
    if (start == pos_) throw parse_error("expected a number", pos_);
    double value = 0.0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (res.ec != std::errc{} || res.ptr != text_.data() + pos_)
      throw parse_error("malformed number", start);
    return value;
  }

  int parse_int() {
    skip_ws();
    std::size_t start = pos_;
    if (peek() == '+' || peek() == '-') ++pos_;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    int value = 0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (res.ec != std::errc{} || res.ptr != text_.data() + pos_)
      throw parse_error("expected an integer exponent", start);
    return value;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline RationalComponent parse_component(std::string_view text) {
  return detail::ComponentParser(text).parse();
}

// Canonical form: constant (omitted when 1 and factors exist), then factors
// sorted by root; root 0 prints as "z". parse(serialize(c)) == c.
inline std::string serialize(const RationalComponent& c) {
  std::string out;
  if (c.factors().empty() || c.constant() != cplx{1.0, 0.0}) {
    std::string lit = detail::format_cplx(c.constant());
    // A trailing digit/i would glue onto a following literal; factors all
    // start with 'z' or '(' so no separator is needed.
    out += lit;
  }
  for (const Factor& f : c.factors()) {
    if (f.root == cplx{0.0, 0.0}) {
      out += "z";
    } else {
      out += "(z";
      cplx s = -f.root;
      if (s.real() != 0.0) {
        if (s.real() > 0.0) out += "+";
        out += detail::format_double(s.real());
      }
      if (s.imag() != 0.0) {
        if (s.imag() > 0.0) out += "+";
        out += detail::format_double(s.imag()) + "i";
      }
      out += ")";
    }
    if (f.multiplicity != 1)
      out += "^" + std::to_string(f.multiplicity);
  }
  return out;
}

// Curve expression: components separated by ';'.
inline RationalCurve parse_curve(std::string_view text) {
  std::vector<RationalComponent> comps;
  std::size_t begin = 0;
  std::size_t base = 0;
  while (true) {
    std::size_t sep = text.find(';', begin);
    std::string_view piece = text.substr(
        begin, sep == std::string_view::npos ? std::string_view::npos
                                             : sep - begin);
    try {
      comps.push_back(parse_component(piece));
    } catch (const parse_error& e) {
      throw parse_error(e.message(), base + e.offset());
    }
    if (sep == std::string_view::npos) break;
    begin = sep + 1;
    base = begin;
  }
  return RationalCurve(std::move(comps));
}

inline std::string serialize(const RationalCurve& f) {
  std::string out;
  for (std::size_t j = 0; j < f.components().size(); ++j) {
    if (j != 0) out += " ; ";
    out += serialize(f.components()[j]);
  }
  return out;
}

// --- JSON curve format ------------------------------------------------------
// {"components":[{"constant":[re,im],"factors":[{"root":[re,im],"mult":m}..]}..]}

inline nlohmann::json to_json(const RationalComponent& c) {
  nlohmann::json jc;
  jc["constant"] = {c.constant().real(), c.constant().imag()};
  jc["factors"] = nlohmann::json::array();
  for (const Factor& f : c.factors())
    jc["factors"].push_back(
        {{"root", {f.root.real(), f.root.imag()}}, {"mult", f.multiplicity}});
  return jc;
}

inline nlohmann::json to_json(const RationalCurve& f) {
  nlohmann::json j;
  j["components"] = nlohmann::json::array();
  for (const RationalComponent& c : f.components())
    j["components"].push_back(to_json(c));
  return j;
}

inline RationalCurve curve_from_json(const nlohmann::json& j) {
  std::vector<RationalComponent> comps;
  for (const auto& jc : j.at("components")) {
    const auto& k = jc.at("constant");
    cplx constant{k.at(0).get<double>(), k.at(1).get<double>()};
    std::vector<Factor> factors;
    for (const auto& jf : jc.at("factors")) {
      const auto& r = jf.at("root");
      factors.push_back(Factor{cplx{r.at(0).get<double>(), r.at(1).get<double>()},
                               jf.at("mult").get<int>()});
    }
    comps.emplace_back(constant, std::move(factors));
  }
  return RationalCurve(std::move(comps));
}

}  // namespace amoeba
