#pragma once

// Pullback volume density of the coordinatewise log-modulus map along a
// rational curve. The density at z is the Euclidean norm of the vector of
// pairwise Jacobian determinants of (log|f_j|, log|f_k|); it vanishes
// exactly on the critical locus and identically iff the curve sits in a
// one-dimensional subtorus.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <utility>
#include <vector>

#include "amoeba/ratfun.hpp"
#include "amoeba/rng.hpp"

namespace amoeba {

struct PairTerm {
  std::size_t j, k;    // component indices, j < k
  double determinant;  // signed
};

struct DensityValue {
  double value = 0.0;  // sqrt of the sum of squared determinants
  std::vector<PairTerm> pair_terms;
};

namespace detail {

// Log-derivatives of every component at z, written into g (resized).
inline void log_derivatives(const RationalCurve& f, cplx z, std::vector<cplx>& g) {
  g.resize(f.dimension());
  for (std::size_t j = 0; j < f.dimension(); ++j)
    g[j] = log_derivative(f.components()[j], z);
}

inline double pair_det_from_logs(cplx gj, cplx gk) {
  // i*det(d_z Log f_{jk}, d_zbar Log f_{jk}) reduces to -Im(g_j conj(g_k))/2.
  return -0.5 * (gj.imag() * gk.real() - gj.real() * gk.imag());
}

}  // namespace detail

inline double pair_determinant(const RationalCurve& f, std::size_t j,
                               std::size_t k, cplx z) {
  const cplx gj = log_derivative(f.components()[j], z);
  const cplx gk = log_derivative(f.components()[k], z);
  return detail::pair_det_from_logs(gj, gk);
}

// Density without the per-pair breakdown; the quadrature hot path.
// Pair terms accumulate in increasing (j,k) order, so the result is
// deterministic regardless of caller context.
inline double density_value(const RationalCurve& f, cplx z,
                            std::vector<cplx>& scratch) {
  detail::log_derivatives(f, z, scratch);
  double sum_sq = 0.0;
  for (std::size_t j = 0; j + 1 < scratch.size(); ++j)
    for (std::size_t k = j + 1; k < scratch.size(); ++k) {
      const double d = detail::pair_det_from_logs(scratch[j], scratch[k]);
      sum_sq += d * d;
    }
  return std::sqrt(sum_sq);
}

inline double density_value(const RationalCurve& f, cplx z) {
  std::vector<cplx> scratch;
  return density_value(f, z, scratch);
}

inline DensityValue density(const RationalCurve& f, cplx z) {
  std::vector<cplx> g;
  detail::log_derivatives(f, z, g);
  DensityValue out;
  double sum_sq = 0.0;
  for (std::size_t j = 0; j + 1 < g.size(); ++j)
    for (std::size_t k = j + 1; k < g.size(); ++k) {
      const double d = detail::pair_det_from_logs(g[j], g[k]);
      out.pair_terms.push_back(PairTerm{j, k, d});
      sum_sq += d * d;
    }
  out.value = std::sqrt(sum_sq);
  return out;
}

namespace detail {

inline double support_scale(const std::vector<cplx>& support) {
  double m = 0.0;
  for (cplx a : support) m = std::max(m, std::abs(a));
  return m;
}

inline double distance_to_support(cplx z, const std::vector<cplx>& support) {
  double d = std::numeric_limits<double>::infinity();
  for (cplx a : support) d = std::min(d, std::abs(z - a));
  return d;
}

}  // namespace detail

// Sampling test for the subtorus degeneration: the density of a degenerate
// curve vanishes identically (monomial relations cancel every pair term
// exactly), so any positive sample settles the question.
inline bool is_degenerate(const RationalCurve& f, int samples = 64,
                          std::uint64_t seed = 0) {
  if (samples < 16) throw std::invalid_argument("is_degenerate needs >= 16 samples");
  const auto support = singular_support(f);
  const double radius = 2.0 + detail::support_scale(support);
  Rng rng(seed ^ 0x64656e73ULL);
  std::vector<cplx> scratch;
  int accepted = 0;
  int guard = 0;
  while (accepted < samples && guard < samples * 64) {
    ++guard;
    const double u = rng.next_double();
    const double theta = rng.uniform(0.0, 6.283185307179586);
    const cplx z = radius * std::sqrt(u) * cplx{std::cos(theta), std::sin(theta)};
    if (detail::distance_to_support(z, support) < 1e-9 * (1.0 + radius)) continue;
    ++accepted;
    if (density_value(f, z, scratch) >= 1e-12) return false;
  }
  return true;
}

struct Window {
  double x0, x1, y0, y1;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

// Grid points whose local density minimum falls below eps_rel times the
// median density over the window. Each grid point gets a short Newton probe
// toward the nearest density zero, capped at one cell diagonal, so points
// within a cell of the critical locus are kept and everything else is not.
// Diagnostic output, not a certified zero set.
inline std::vector<cplx> critical_locus_sample(const RationalCurve& f,
                                               const Window& window,
                                               int resolution,
                                               double eps_rel = 1e-9) {
  if (resolution < 2) throw std::invalid_argument("resolution must be >= 2");
  if (window.width() <= 0.0 || window.height() <= 0.0)
    throw std::invalid_argument("window must have positive measure");
  const auto support = singular_support(f);
  const double dx = window.width() / resolution;
  const double dy = window.height() / resolution;
  const double cell = std::hypot(dx, dy);

  std::vector<cplx> scratch;
  std::vector<double> grid_density;
  grid_density.reserve(static_cast<std::size_t>(resolution) * resolution);
  std::vector<cplx> grid_point;
  grid_point.reserve(grid_density.capacity());
  for (int iy = 0; iy < resolution; ++iy) {
    for (int ix = 0; ix < resolution; ++ix) {
      const cplx z{window.x0 + (ix + 0.5) * dx, window.y0 + (iy + 0.5) * dy};
      if (detail::distance_to_support(z, support) < 0.5 * cell) continue;
      grid_point.push_back(z);
      grid_density.push_back(density_value(f, z, scratch));
    }
  }
  if (grid_point.empty()) return {};

  std::vector<double> sorted = grid_density;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  const double eps_crit = eps_rel * median;

  std::vector<cplx> hits;
  for (std::size_t i = 0; i < grid_point.size(); ++i) {
    const cplx origin = grid_point[i];
    cplx z = origin;
    double d = grid_density[i];
    if (d >= median) continue;  // nowhere near a zero
    // Newton steps on the (nonnegative) density along its gradient. The
    // density grows linearly off the critical locus, so each step divides
    // the distance; the stencil width tracks that distance or the crease
    // breaks the difference quotient. A one-cell trust region around the
    // grid point keeps hits local.
    double h = 0.25 * cell;
    for (int it = 0; it < 6 && d >= eps_crit; ++it) {
      const double dpx = density_value(f, z + cplx{h, 0.0}, scratch) -
                         density_value(f, z - cplx{h, 0.0}, scratch);
      const double dpy = density_value(f, z + cplx{0.0, h}, scratch) -
                         density_value(f, z - cplx{0.0, h}, scratch);
      const double gx = dpx / (2.0 * h), gy = dpy / (2.0 * h);
      const double g2 = gx * gx + gy * gy;
      if (g2 <= 0.0) break;
      const double slope = std::sqrt(g2);
      double step = d / g2;
      cplx delta{-step * gx, -step * gy};
      if (std::abs(delta) > cell) delta *= cell / std::abs(delta);
      cplx znew = z + delta;
      if (std::abs(znew - origin) > cell) {
        const cplx excess = znew - origin;
        znew = origin + excess * (cell / std::abs(excess));
      }
      if (detail::distance_to_support(znew, support) < 0.25 * cell) break;
      double dnew = density_value(f, znew, scratch);
      if (dnew >= d) {  // overshoot across the crease: halve once
        znew = z + 0.5 * (znew - z);
        dnew = density_value(f, znew, scratch);
        if (dnew >= d) break;
      }
      z = znew;
      d = dnew;
      h = std::clamp(0.25 * d / slope, 1e-13 * (1.0 + std::abs(z)), 0.25 * cell);
    }
    if (d < eps_crit) hits.push_back(origin);
  }
  return hits;
}

// CSV rows "re,im", one sample per line.
inline void write_points_csv(std::ostream& os, const std::vector<cplx>& points) {
  for (cplx p : points)
    os << detail::format_double(p.real()) << ","
       << detail::format_double(p.imag()) << "\n";
}

}  // namespace amoeba
