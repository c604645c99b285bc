#pragma once

// Logarithmic limit set of a rational curve: the finite set of rational
// directions its amoeba takes toward infinity. Each support point sends the
// amoeba to infinity along minus its order vector, and the point at infinity
// along the degree vector. end_asymptote_fit verifies a direction
// numerically; hausdorff_distance is the metric used for such comparisons.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include <json.hpp>

#include "amoeba/density.hpp"
#include "amoeba/ratfun.hpp"
#include "amoeba/rng.hpp"

namespace amoeba {

struct DirectionVector {
  std::vector<ExtendedPoint> sources;  // all points producing this direction
  std::vector<long long> integer_rep;  // primitive lattice vector
  std::vector<double> direction;       // unit vector, parallel to integer_rep
};

struct LimitSet {
  std::vector<DirectionVector> directions;
  bool degenerate = false;
};

namespace detail {

inline std::vector<long long> primitive(std::vector<long long> v) {
  long long g = 0;
  for (long long x : v) g = std::gcd(g, std::llabs(x));
  if (g > 1)
    for (long long& x : v) x /= g;
  return v;
}

inline std::vector<double> unit_of(const std::vector<long long>& v) {
  double norm = 0.0;
  for (long long x : v) norm += static_cast<double>(x) * static_cast<double>(x);
  norm = std::sqrt(norm);
  std::vector<double> u(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) u[i] = v[i] / norm;
  return u;
}

inline std::vector<long long> order_vector(const RationalCurve& f,
                                           const ExtendedPoint& p) {
  std::vector<long long> u;
  u.reserve(f.dimension());
  for (const RationalComponent& c : f.components()) u.push_back(order_at(c, p));
  return u;
}

inline bool all_zero(const std::vector<long long>& v) {
  for (long long x : v)
    if (x != 0) return false;
  return true;
}

}  // namespace detail

// Vertices of the logarithmic limit set, deduplicated on the primitive
// integer vector with every source retained. A degenerate curve has a line
// for its amoeba; degree balance makes the same aggregation produce exactly
// the two antipodal line directions, flagged as such.
inline LimitSet limit_directions(const RationalCurve& f) {
  LimitSet out;
  const auto support = singular_support(f);
  const auto inf = ExtendedPoint::infinity();
  out.degenerate = is_degenerate(f);

  auto add = [&](const ExtendedPoint& src, std::vector<long long> v) {
    if (detail::all_zero(v)) return;
    v = detail::primitive(v);
    for (DirectionVector& d : out.directions) {
      if (d.integer_rep == v) {
        d.sources.push_back(src);
        return;
      }
    }
    out.directions.push_back(DirectionVector{{src}, v, detail::unit_of(v)});
  };

  for (cplx a : support) {
    // Log f -> -infinity * u as z -> a, so the end points along -u.
    auto u = detail::order_vector(f, ExtendedPoint::finite(a));
    for (long long& x : u) x = -x;
    add(ExtendedPoint::finite(a), std::move(u));
  }
  {
    auto d = detail::order_vector(f, inf);
    for (long long& x : d) x = -x;  // -order at infinity = degree vector
    add(inf, std::move(d));
  }

  std::sort(out.directions.begin(), out.directions.end(),
            [](const DirectionVector& a, const DirectionVector& b) {
              return a.integer_rep < b.integer_rep;
            });
  return out;
}

struct AsymptoteFit {
  std::vector<double> direction;  // fitted unit vector
  double angular_residual;        // angle to the claimed direction, radians
};

namespace detail {

inline std::vector<double> log_image(const RationalCurve& f, cplx z) {
  std::vector<double> x(f.dimension());
  for (std::size_t j = 0; j < f.dimension(); ++j)
    x[j] = std::log(std::abs(eval(f.components()[j], z)));
  return x;
}

}  // namespace detail

// Samples the curve along a ray into the end's source and fits the dominant
// direction of the Log-image displacements. t_lo/t_hi bound |z - a| for a
// finite source and |z| for the infinite one.
inline AsymptoteFit end_asymptote_fit(const RationalCurve& f,
                                      const DirectionVector& end, double t_lo,
                                      double t_hi, int samples = 33,
                                      std::uint64_t seed = 0) {
  if (end.sources.empty())
    throw std::invalid_argument("end_asymptote_fit: direction has no source");
  const ExtendedPoint src = end.sources.front();
  const auto support = singular_support(f);

  Rng rng(seed ^ 0x61737953ULL);
  std::vector<std::vector<double>> pts;
  for (int attempt = 0; attempt < 32 && pts.empty(); ++attempt) {
    const double theta = rng.uniform(0.0, 2.0 * 3.141592653589793);
    const cplx dir{std::cos(theta), std::sin(theta)};
    std::vector<std::vector<double>> trial;
    bool ok = true;
    for (int i = 0; i < samples && ok; ++i) {
      const double u = static_cast<double>(i) / (samples - 1);
      const double t = t_lo * std::pow(t_hi / t_lo, u);
      const cplx z = src.infinite ? t * dir : src.value + t * dir;
      for (cplx s : support)
        if (std::abs(z - s) < 1e-14 * (1.0 + std::abs(s))) ok = false;
      if (ok) trial.push_back(detail::log_image(f, z));
    }
    if (ok) pts = std::move(trial);
  }
  if (pts.empty())
    throw numeric_error("end_asymptote_fit: could not place a sample ray");

  // Direction of travel toward the source limit; offsets cancel in the
  // difference, leaving the asymptote slope.
  const std::size_t n = f.dimension();
  const auto& toward = src.infinite ? pts.back() : pts.front();
  const auto& away = src.infinite ? pts.front() : pts.back();
  std::vector<double> d(n);
  double norm = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = toward[j] - away[j];
    norm += d[j] * d[j];
  }
  norm = std::sqrt(norm);
  if (norm == 0.0)
    throw numeric_error("end_asymptote_fit: displacement vanished");
  for (double& v : d) v /= norm;

  double dot = 0.0;
  for (std::size_t j = 0; j < n; ++j) dot += d[j] * end.direction[j];
  dot = std::clamp(dot, -1.0, 1.0);
  return AsymptoteFit{std::move(d), std::acos(dot)};
}

// Exact Hausdorff distance between finite point sets under the Euclidean
// metric.
inline double hausdorff_distance(const std::vector<std::vector<double>>& A,
                                 const std::vector<std::vector<double>>& B) {
  if (A.empty() || B.empty())
    throw std::invalid_argument("hausdorff_distance: empty set");
  auto one_sided = [](const std::vector<std::vector<double>>& P,
                      const std::vector<std::vector<double>>& Q) {
    double worst = 0.0;
    for (const auto& p : P) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : Q) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i)
          d2 += (p[i] - q[i]) * (p[i] - q[i]);
        best = std::min(best, d2);
      }
      worst = std::max(worst, best);
    }
    return std::sqrt(worst);
  };
  return std::max(one_sided(A, B), one_sided(B, A));
}

inline nlohmann::json to_json(const ExtendedPoint& p) {
  if (p.infinite) return "inf";
  return nlohmann::json::array({p.value.real(), p.value.imag()});
}

inline nlohmann::json to_json(const DirectionVector& d) {
  nlohmann::json srcs = nlohmann::json::array();
  for (const ExtendedPoint& s : d.sources) srcs.push_back(to_json(s));
  return nlohmann::json{{"sources", srcs},
                        {"int_dir", d.integer_rep},
                        {"unit", d.direction}};
}

inline nlohmann::json to_json(const LimitSet& ls) {
  nlohmann::json dirs = nlohmann::json::array();
  for (const DirectionVector& d : ls.directions) dirs.push_back(to_json(d));
  return nlohmann::json{{"directions", dirs}, {"degenerate", ls.degenerate}};
}

}  // namespace amoeba
