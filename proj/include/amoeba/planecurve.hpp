#pragma once

// Implicit plane-curve amoebas: Laurent polynomials in (z, w), the Newton
// polygon and its area, the pi^2 * Area(polygon) bound, and a rasterizer
// that walks |z| fibers and solves for w with simultaneous (Aberth-Ehrlich)
// root iteration.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "amoeba/raster.hpp"
#include "amoeba/ratfun.hpp"
#include "amoeba/rng.hpp"

namespace amoeba {

struct LaurentTerm {
  int ez, ew;  // exponents, possibly negative
  cplx coefficient;
};

class LaurentPolynomial {
 public:
  explicit LaurentPolynomial(std::vector<LaurentTerm> terms) {
    std::map<std::pair<int, int>, cplx> acc;
    for (const LaurentTerm& t : terms) acc[{t.ez, t.ew}] += t.coefficient;
    for (const auto& [e, c] : acc)
      if (c != cplx{0.0, 0.0})
        terms_.push_back(LaurentTerm{e.first, e.second, c});
    if (terms_.empty())
      throw std::invalid_argument("laurent polynomial: all terms cancel");
    if (terms_.size() < 2)
      throw std::invalid_argument(
          "laurent polynomial: monomials define empty curves in the torus");
  }

  const std::vector<LaurentTerm>& terms() const { return terms_; }

 private:
  std::vector<LaurentTerm> terms_;  // sorted by (ez, ew), nonzero coefficients
};

struct LatticePoint {
  long long x, y;
  bool operator==(const LatticePoint& o) const { return x == o.x && y == o.y; }
  bool operator<(const LatticePoint& o) const {
    return x != o.x ? x < o.x : y < o.y;
  }
};

// Convex hull of exponent vectors, counterclockwise; collinear input yields
// the two-vertex segment.
struct LatticePolygon {
  std::vector<LatticePoint> vertices;
};

// --- parsing ----------------------------------------------------------------
// Sum of terms; a term is a '*'-separated (or juxtaposed) product of complex
// literals and z^i / w^j powers: "1 + z + w", "z^2 - w - 1", "2i*z^-1*w".

namespace detail {

class LaurentParser {
 public:
  explicit LaurentParser(std::string_view text) : text_(text) {}

  LaurentPolynomial parse() {
    std::vector<LaurentTerm> terms;
    skip_ws();
    if (done()) throw parse_error("empty polynomial", 0);
    bool first = true;
    while (!done()) {
      double sign = 1.0;
      skip_ws();
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1.0 : 1.0;
        ++pos_;
      } else if (!first) {
        throw parse_error("expected '+' or '-' between terms", pos_);
      }
      terms.push_back(parse_term(sign));
      first = false;
      skip_ws();
    }
    return LaurentPolynomial(std::move(terms));
  }

 private:
  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  LaurentTerm parse_term(double sign) {
    cplx coefficient{sign, 0.0};
    int ez = 0, ew = 0;
    bool any = false;
    while (true) {
      skip_ws();
      const char c = peek();
      if (c == 'z' || c == 'w') {
        ++pos_;
        int e = 1;
        skip_ws();
        if (peek() == '^') {
          ++pos_;
          e = parse_int();
        }
        (c == 'z' ? ez : ew) += e;
        any = true;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
                 c == 'i') {
        coefficient *= parse_literal();
        any = true;
      } else if (c == '*') {
        ++pos_;
        continue;
      } else {
        break;
      }
      skip_ws();
      if (peek() == '*') ++pos_;
    }
    if (!any) throw parse_error("empty term", pos_);
    return LaurentTerm{ez, ew, coefficient};
  }

  cplx parse_literal() {
    if (peek() == 'i') {
      ++pos_;
      return cplx{0.0, 1.0};
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '.'))
      ++pos_;
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
    double v = 0.0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc{} || res.ptr != text_.data() + pos_)
      throw parse_error("malformed number", start);
    if (peek() == 'i') {
      ++pos_;
      return cplx{0.0, v};
    }
    return cplx{v, 0.0};
  }

  int parse_int() {
    skip_ws();
    const std::size_t start = pos_;
    if (peek() == '+' || peek() == '-') ++pos_;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    int v = 0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc{} || res.ptr != text_.data() + pos_)
      throw parse_error("expected an integer exponent", start);
    return v;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline LaurentPolynomial parse_laurent(std::string_view text) {
  return detail::LaurentParser(text).parse();
}

// --- Newton polygon ----------------------------------------------------------

inline LatticePolygon newton_polygon(const LaurentPolynomial& p) {
  std::vector<LatticePoint> pts;
  for (const LaurentTerm& t : p.terms())
    pts.push_back(LatticePoint{t.ez, t.ew});
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  auto cross = [](const LatticePoint& o, const LatticePoint& a,
                  const LatticePoint& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  // monotone chain; <= drops collinear interior points
  std::vector<LatticePoint> hull(2 * pts.size());
  std::size_t k = 0;
  for (const LatticePoint& pt : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pt) <= 0) --k;
    hull[k++] = pt;
  }
  const std::size_t lower = k + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);  // already counterclockwise
  if (hull.size() < 2) hull = {pts.front(), pts.back()};
  return LatticePolygon{std::move(hull)};
}

inline double polygon_area(const LatticePolygon& poly) {
  const auto& v = poly.vertices;
  if (v.size() < 3) return 0.0;
  long long twice = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const LatticePoint& a = v[i];
    const LatticePoint& b = v[(i + 1) % v.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return std::fabs(static_cast<double>(twice)) / 2.0;
}

inline double pr_bound(const LaurentPolynomial& p) {
  constexpr double pi = 3.141592653589793238462643383279502884;
  return pi * pi * polygon_area(newton_polygon(p));
}

// --- univariate roots ---------------------------------------------------------

struct FiberRoots {
  std::vector<cplx> roots;
  int expected = 0;      // w-degree spread of the polynomial
  bool degree_drop = false;
  bool converged = true;
};

namespace detail {

// Aberth-Ehrlich simultaneous iteration, ascending coefficients, to relative
// residual 1e-12. 200-iteration cap with a seeded perturbation restart for
// clustered configurations.
inline bool aberth_roots(const std::vector<cplx>& coeff, std::vector<cplx>& roots,
                         std::uint64_t seed) {
  const int deg = static_cast<int>(coeff.size()) - 1;
  roots.clear();
  if (deg < 1) return true;
  if (deg == 1) {
    roots.push_back(-coeff[0] / coeff[1]);
    return true;
  }

  double r0 = std::pow(std::abs(coeff[0] / coeff[deg]), 1.0 / deg);
  r0 = std::clamp(r0, 1e-6, 1e6);
  roots.resize(deg);
  for (int k = 0; k < deg; ++k) {
    const double th = 2.0 * 3.141592653589793 * (k + 0.25) / deg + 0.41;
    roots[k] = r0 * cplx{std::cos(th), std::sin(th)};
  }

  Rng rng(seed ^ 0x61627274ULL);
  std::vector<bool> done(deg, false);
  for (int it = 0; it < 200; ++it) {
    double worst = 0.0;
    for (int k = 0; k < deg; ++k) {
      const cplx w = roots[k];
      cplx p{0.0, 0.0}, dp{0.0, 0.0};
      double scale = 0.0;
      const double aw = std::abs(w);
      for (int j = deg; j >= 0; --j) {
        dp = dp * w + p;
        p = p * w + coeff[j];
        scale = scale * aw + std::abs(coeff[j]);
      }
      const double resid = std::abs(p) / std::max(scale, 1e-300);
      worst = std::max(worst, resid);
      if (resid < 1e-14) {
        done[k] = true;
        continue;
      }
      if (dp == cplx{0.0, 0.0}) {
        roots[k] += 1e-8 * r0 * cplx{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        continue;
      }
      const cplx newton = p / dp;
      cplx repulse{0.0, 0.0};
      bool collide = false;
      for (int l = 0; l < deg; ++l) {
        if (l == k) continue;
        const cplx diff = w - roots[l];
        if (diff == cplx{0.0, 0.0}) {
          collide = true;
          break;
        }
        repulse += 1.0 / diff;
      }
      if (collide) {
        roots[k] += 1e-8 * r0 * cplx{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        continue;
      }
      const cplx denom = 1.0 - newton * repulse;
      roots[k] -= denom == cplx{0.0, 0.0} ? newton : newton / denom;
    }
    if (worst < 1e-12) return true;
    if (it == 120) {
      // restart stragglers off their cluster
      for (int k = 0; k < deg; ++k)
        if (!done[k])
          roots[k] *= 1.0 + 1e-4 * rng.uniform(0.5, 1.5);
    }
  }
  // final residual check
  for (int k = 0; k < deg; ++k) {
    cplx p{0.0, 0.0};
    double scale = 0.0;
    const double aw = std::abs(roots[k]);
    for (int j = deg; j >= 0; --j) {
      p = p * roots[k] + coeff[j];
      scale = scale * aw + std::abs(coeff[j]);
    }
    if (std::abs(p) / std::max(scale, 1e-300) > 1e-12) return false;
  }
  return true;
}

}  // namespace detail

// Roots in w of p(z_value, w) = 0. Laurent w-denominators are cleared; the
// spurious w = 0 roots that clearing introduces are excluded. A vanishing
// leading coefficient at special z_value drops the degree and is reported.
inline FiberRoots fiber_roots(const LaurentPolynomial& p, cplx z_value,
                              std::uint64_t seed = 0) {
  int jmin = p.terms().front().ew, jmax = jmin;
  for (const LaurentTerm& t : p.terms()) {
    jmin = std::min(jmin, t.ew);
    jmax = std::max(jmax, t.ew);
  }
  FiberRoots out;
  out.expected = jmax - jmin;
  if (out.expected == 0) return out;
  if (out.expected > 4096)
    throw std::invalid_argument("fiber_roots: w-degree spread too large");

  std::vector<cplx> coeff(static_cast<std::size_t>(out.expected) + 1,
                          cplx{0.0, 0.0});
  for (const LaurentTerm& t : p.terms())
    coeff[static_cast<std::size_t>(t.ew - jmin)] +=
        t.coefficient * detail::ipow(z_value, t.ez);

  // degree drop at special z: trim vanished leading coefficients
  while (coeff.size() > 1 && coeff.back() == cplx{0.0, 0.0}) {
    coeff.pop_back();
    out.degree_drop = true;
  }
  // cleared denominators put roots at w = 0; they are not torus points
  std::size_t strip = 0;
  while (strip + 1 < coeff.size() && coeff[strip] == cplx{0.0, 0.0}) ++strip;
  if (strip > 0) {
    coeff.erase(coeff.begin(), coeff.begin() + strip);
    out.degree_drop = true;
  }

  out.converged = detail::aberth_roots(coeff, out.roots, seed);
  std::erase_if(out.roots, [](cplx w) { return w == cplx{0.0, 0.0}; });
  std::sort(out.roots.begin(), out.roots.end(), detail::lex_less);
  return out;
}

// --- rasterizer ----------------------------------------------------------------

struct PlaneRasterStats {
  std::uint64_t fibers_solved = 0;
  std::uint64_t fibers_skipped = 0;  // root iteration failed to converge
};

// Forward sampling along |z| fibers: for each x1 column and each angle the
// fiber polynomial is solved and (x1, log|w|) is marked. Undercounts the
// area by construction.
inline AmoebaRaster raster_amoeba(const LaurentPolynomial& p, const Box& window,
                                  int resolution, int fibers, int angles,
                                  PlaneRasterStats* stats = nullptr) {
  if (window.dim() != 2)
    throw std::invalid_argument("raster_amoeba needs a 2-d window");
  AmoebaRaster out;
  out.window = window;
  out.resolution = resolution;
  out.covered.assign(static_cast<std::size_t>(resolution) * resolution, 0);

  PlaneRasterStats local;
  for (int k = 0; k < fibers; ++k) {
    const double x1 =
        window.lo[0] + (k + 0.5) * (window.hi[0] - window.lo[0]) / fibers;
    const double r = std::exp(x1);
    bool solved_any = false;
    bool skipped = false;
    for (int j = 0; j < angles; ++j) {
      const double th = 2.0 * 3.141592653589793 * (j + 0.5) / angles;
      const FiberRoots fr =
          fiber_roots(p, r * cplx{std::cos(th), std::sin(th)},
                      static_cast<std::uint64_t>(k) * angles + j);
      if (!fr.converged) {
        skipped = true;
        continue;
      }
      solved_any = true;
      ++out.samples_used;
      // roots are exact points of the curve, not samples of a region
      for (cplx w : fr.roots) out.mark(x1, std::log(std::abs(w)), true);
    }
    if (solved_any) ++local.fibers_solved;
    if (skipped) ++local.fibers_skipped;
  }
  out.finalize_area();
  if (stats) *stats = local;
  return out;
}

// Same raster split across worker threads by fiber index. Marks are
// idempotent, per-worker grids merge by OR in worker order, and fiber seeds
// depend only on (fiber, angle), so the result is identical for any worker
// count, including the sequential path.
inline AmoebaRaster raster_amoeba_parallel(const LaurentPolynomial& p,
                                           const Box& window, int resolution,
                                           int fibers, int angles, int workers,
                                           PlaneRasterStats* stats = nullptr) {
  workers = std::max(1, std::min(workers, std::max(1, fibers / 16)));
  if (workers == 1) return raster_amoeba(p, window, resolution, fibers, angles, stats);

  std::vector<AmoebaRaster> parts(workers);
  std::vector<PlaneRasterStats> part_stats(workers);
  std::vector<std::thread> pool;
  const double width = window.hi[0] - window.lo[0];
  for (int wkr = 0; wkr < workers; ++wkr) {
    pool.emplace_back([&, wkr]() {
      AmoebaRaster& local = parts[wkr];
      local.window = window;
      local.resolution = resolution;
      local.covered.assign(static_cast<std::size_t>(resolution) * resolution, 0);
      for (int k = wkr; k < fibers; k += workers) {
        const double x1 = window.lo[0] + (k + 0.5) * width / fibers;
        const double r = std::exp(x1);
        bool solved = false, skipped = false;
        for (int j = 0; j < angles; ++j) {
          const double th = 2.0 * 3.141592653589793 * (j + 0.5) / angles;
          const FiberRoots fr =
              fiber_roots(p, r * cplx{std::cos(th), std::sin(th)},
                          static_cast<std::uint64_t>(k) * angles + j);
          if (!fr.converged) {
            skipped = true;
            continue;
          }
          solved = true;
          ++local.samples_used;
          for (cplx w : fr.roots) local.mark(x1, std::log(std::abs(w)), true);
        }
        if (solved) ++part_stats[wkr].fibers_solved;
        if (skipped) ++part_stats[wkr].fibers_skipped;
      }
    });
  }
  for (std::thread& t : pool) t.join();

  AmoebaRaster out;
  out.window = window;
  out.resolution = resolution;
  out.covered.assign(static_cast<std::size_t>(resolution) * resolution, 0);
  PlaneRasterStats total;
  for (int wkr = 0; wkr < workers; ++wkr) {
    for (std::size_t i = 0; i < out.covered.size(); ++i)
      out.covered[i] |= parts[wkr].covered[i];
    out.samples_used += parts[wkr].samples_used;
    total.fibers_solved += part_stats[wkr].fibers_solved;
    total.fibers_skipped += part_stats[wkr].fibers_skipped;
  }
  out.finalize_area();
  if (stats) *stats = total;
  return out;
}

struct PrReport {
  double area_estimate = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
  bool pass = false;
  PlaneRasterStats stats;
};

// Empirical check of the polygon-area bound: raster area against
// pi^2 * Area(newton_polygon), with 2% pixel tolerance.
inline PrReport check_pr(const LaurentPolynomial& p, const Box& window,
                         int resolution, int fibers, int angles) {
  PrReport rep;
  const AmoebaRaster raster =
      raster_amoeba(p, window, resolution, fibers, angles, &rep.stats);
  rep.area_estimate = raster.area_estimate;
  rep.bound = pr_bound(p);
  rep.ratio = rep.bound > 0.0 ? rep.area_estimate / rep.bound : 0.0;
  rep.pass = rep.area_estimate <= rep.bound * 1.02;
  return rep;
}

// --- serialization -------------------------------------------------------------

inline nlohmann::json to_json(const LaurentPolynomial& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const LaurentTerm& t : p.terms())
    terms.push_back({{"exp", {t.ez, t.ew}},
                     {"coef", {t.coefficient.real(), t.coefficient.imag()}}});
  return nlohmann::json{{"terms", terms}};
}

inline LaurentPolynomial laurent_from_json(const nlohmann::json& j) {
  std::vector<LaurentTerm> terms;
  for (const auto& jt : j.at("terms")) {
    const auto& e = jt.at("exp");
    const auto& c = jt.at("coef");
    terms.push_back(LaurentTerm{e.at(0).get<int>(), e.at(1).get<int>(),
                                cplx{c.at(0).get<double>(), c.at(1).get<double>()}});
  }
  return LaurentPolynomial(std::move(terms));
}

inline nlohmann::json to_json(const LatticePolygon& poly) {
  nlohmann::json verts = nlohmann::json::array();
  for (const LatticePoint& v : poly.vertices) verts.push_back({v.x, v.y});
  return nlohmann::json{{"vertices", verts}, {"area", polygon_area(poly)}};
}

inline nlohmann::json to_json(const PrReport& rep) {
  return nlohmann::json{{"area_estimate", rep.area_estimate},
                        {"bound", rep.bound},
                        {"ratio", rep.ratio},
                        {"pass", rep.pass},
                        {"fibers_solved", rep.stats.fibers_solved},
                        {"fibers_skipped", rep.stats.fibers_skipped}};
}

}  // namespace amoeba
