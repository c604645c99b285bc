#pragma once

// Covering-sheet structure of Log f over the amoeba: fiber enumeration by
// seeded least-squares descent, min/max sheet counts over regular samples,
// the recovery of the true amoeba area from the weighted volume, the pair
// bound pi^2 sum n_j n_k, and forward-sampled raster images.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "amoeba/density.hpp"
#include "amoeba/quadrature.hpp"
#include "amoeba/raster.hpp"
#include "amoeba/ratfun.hpp"
#include "amoeba/rng.hpp"

namespace amoeba {

struct FiberSample {
  std::vector<double> target;  // point of R^n, a forward image
  int preimage_count;
};

struct SheetReport {
  std::vector<FiberSample> samples;
  int p_min = 0;
  int p_max = 0;
  bool uniform = false;
};

struct PreimageSet {
  std::vector<cplx> points;  // distinct solutions, sorted by (re, im)
  bool budget_ok = true;     // false when the seed grid had to be capped
};

struct FiberSearch {
  double radius = 0.0;  // 0: use the decomposition R_out
  int grid = 0;         // 0: derive from the support separation
  int max_grid = 480;   // seed-budget cap per axis
};

namespace detail {

inline double fiber_objective(const RationalCurve& f, cplx z,
                              const std::vector<double>& x,
                              std::vector<double>& residual) {
  residual.resize(f.dimension());
  double F = 0.0;
  for (std::size_t j = 0; j < f.dimension(); ++j) {
    residual[j] = std::log(std::abs(eval(f.components()[j], z))) - x[j];
    F += residual[j] * residual[j];
  }
  return F;
}

// Damped Gauss-Newton on F(z) = sum_j (log|f_j(z)| - x_j)^2. The Jacobian
// rows are (Re g_j, -Im g_j) with g_j the log-derivative.
inline bool refine_preimage(const RationalCurve& f, const std::vector<double>& x,
                            const std::vector<cplx>& support, cplx& z,
                            double& F) {
  std::vector<double> r;
  const double support_eps = 1e-13 * (1.0 + support_scale(support));
  if (distance_to_support(z, support) < support_eps) return false;
  F = fiber_objective(f, z, x, r);
  double lambda = 1e-3;
  for (int it = 0; it < 80; ++it) {
    if (F < 1e-20) break;
    double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
    for (std::size_t j = 0; j < f.dimension(); ++j) {
      const cplx g = log_derivative(f.components()[j], z);
      const double jx = g.real(), jy = -g.imag();
      a11 += jx * jx;
      a12 += jx * jy;
      a22 += jy * jy;
      b1 -= jx * r[j];
      b2 -= jy * r[j];
    }
    bool improved = false;
    for (int damp = 0; damp < 12; ++damp) {
      const double d11 = a11 + lambda, d22 = a22 + lambda;
      const double det = d11 * d22 - a12 * a12;
      if (det <= 0.0) {
        lambda *= 3.0;
        continue;
      }
      const cplx step{(b1 * d22 - b2 * a12) / det, (d11 * b2 - a12 * b1) / det};
      const cplx zn = z + step;
      if (distance_to_support(zn, support) < support_eps) {
        lambda *= 3.0;
        continue;
      }
      std::vector<double> rn;
      const double Fn = fiber_objective(f, zn, x, rn);
      if (Fn < F) {
        z = zn;
        F = Fn;
        r = std::move(rn);
        lambda = std::max(lambda / 3.0, 1e-12);
        improved = true;
        if (std::abs(step) < 1e-14 * (1.0 + std::abs(z))) it = 80;
        break;
      }
      lambda *= 3.0;
    }
    if (!improved) break;
  }
  return F < 1e-16;
}

}  // namespace detail

// All parameter points mapping to x under Log f, found by dense grid seeding
// plus damped least-squares refinement. Heuristically complete when the grid
// spacing resolves the support separation; exactness is validated on curves
// with known sheet counts, not certified.
inline PreimageSet enumerate_preimages(const RationalCurve& f,
                                       const std::vector<double>& x,
                                       const FiberSearch& search = {}) {
  if (x.size() != f.dimension())
    throw std::invalid_argument("enumerate_preimages: dimension mismatch");
  const auto support = singular_support(f);
  QuadratureOptions qopt;
  const Decomposition d = decompose_plane(f, qopt);

  double radius = search.radius > 0.0 ? search.radius : d.r_out;
  double min_sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < support.size(); ++i)
    for (std::size_t j = i + 1; j < support.size(); ++j)
      min_sep = std::min(min_sep, std::abs(support[i] - support[j]));
  double spacing = std::min(1.0, min_sep / 3.0);

  PreimageSet out;
  int grid = search.grid > 0
                 ? search.grid
                 : static_cast<int>(std::ceil(2.0 * radius / spacing));
  if (grid > search.max_grid) {
    grid = search.max_grid;
    out.budget_ok = false;
  }

  std::vector<cplx> found;
  auto try_seed = [&](cplx seed) {
    double F = 0.0;
    if (!detail::refine_preimage(f, x, support, seed, F)) return;
    for (cplx p : found)
      if (std::abs(p - seed) < 1e-6) return;
    found.push_back(seed);
  };
  for (int iy = 0; iy < grid; ++iy)
    for (int ix = 0; ix < grid; ++ix)
      try_seed(cplx{-radius + (ix + 0.5) * 2.0 * radius / grid,
                    -radius + (iy + 0.5) * 2.0 * radius / grid});

  std::sort(found.begin(), found.end(), detail::lex_less);
  out.points = std::move(found);
  return out;
}

// Sheet counts over regular amoeba points: draws parameter samples away from
// the critical locus (density above a tenth of the sample median), pushes
// them forward, and counts preimages. Deterministic per seed.
inline SheetReport sheet_report(const RationalCurve& f, int samples = 12,
                                std::uint64_t seed = 0,
                                const FiberSearch& search = {}) {
  if (samples < 8) throw std::invalid_argument("sheet_report needs >= 8 samples");
  if (is_degenerate(f))
    throw degenerate_error(
        "sheet_report: curve lies in a one-dimensional subtorus");
  const auto support = singular_support(f);
  const double radius = 1.0 + detail::support_scale(support);

  Rng rng(seed ^ 0x73686565ULL);
  struct Candidate {
    cplx z;
    double rho;
  };
  std::vector<Candidate> cands;
  std::vector<cplx> scratch;
  for (int guard = 0;
       cands.size() < static_cast<std::size_t>(4 * samples) &&
       guard < 512 * samples;
       ++guard) {
    const double u = rng.next_double();
    const double th = rng.uniform(0.0, 2.0 * detail::kPi);
    const cplx z = radius * std::sqrt(u) * cplx{std::cos(th), std::sin(th)};
    if (detail::distance_to_support(z, support) < 1e-3 * (1.0 + radius)) continue;
    cands.push_back(Candidate{z, density_value(f, z, scratch)});
  }
  std::vector<double> rhos;
  for (const Candidate& c : cands) rhos.push_back(c.rho);
  std::nth_element(rhos.begin(), rhos.begin() + rhos.size() / 2, rhos.end());
  const double floor_rho = rhos[rhos.size() / 2] / 10.0;

  SheetReport rep;
  for (const Candidate& c : cands) {
    if (static_cast<int>(rep.samples.size()) >= samples) break;
    if (c.rho < floor_rho) continue;
    std::vector<double> x(f.dimension());
    for (std::size_t j = 0; j < f.dimension(); ++j)
      x[j] = std::log(std::abs(eval(f.components()[j], c.z)));
    auto fiber = enumerate_preimages(f, x, search);
    if (fiber.points.empty()) continue;  // refinement lost the witness
    rep.samples.push_back(
        FiberSample{std::move(x), static_cast<int>(fiber.points.size())});
  }
  if (rep.samples.empty())
    throw numeric_error("sheet_report: no usable regular samples");
  rep.p_min = rep.p_max = rep.samples.front().preimage_count;
  for (const FiberSample& s : rep.samples) {
    rep.p_min = std::min(rep.p_min, s.preimage_count);
    rep.p_max = std::max(rep.p_max, s.preimage_count);
  }
  rep.uniform = rep.p_min == rep.p_max;
  return rep;
}

// Upper bound pi^2 * sum over component pairs of n_j * n_k, with n_j the
// pole-zero count of component j. vol2 never exceeds it.
inline double pair_product_bound(const RationalCurve& f) {
  const auto& comps = f.components();
  double sum = 0.0;
  for (std::size_t j = 0; j + 1 < comps.size(); ++j)
    for (std::size_t k = j + 1; k < comps.size(); ++k)
      sum += static_cast<double>(pole_zero_count(comps[j])) *
             static_cast<double>(pole_zero_count(comps[k]));
  return detail::kPi * detail::kPi * sum;
}

struct AreaResult {
  QuadratureResult volume;  // vol2
  SheetReport sheets;
  double lower = 0.0;  // vol2 / p_max
  double upper = 0.0;  // vol2 / p_min
  bool exact_covering = false;  // uniform sheet count observed

  double point_estimate() const { return lower; }  // equals upper when exact
};

// True-area recovery: vol2 / p when the sampled sheet count is uniform,
// otherwise the interval [vol2/p_max, vol2/p_min].
inline AreaResult area(const RationalCurve& f, double rel_tol = 1e-6,
                       std::uint64_t seed = 0, int samples = 12) {
  if (is_degenerate(f))
    throw degenerate_error("area: curve lies in a one-dimensional subtorus");
  AreaResult out;
  QuadratureOptions opt;
  opt.rel_tol = rel_tol;
  out.volume = vol2(f, opt);
  if (!out.volume.converged)
    throw numeric_error("area: vol2 did not reach the requested tolerance");
  out.sheets = sheet_report(f, samples, seed);
  out.lower = out.volume.value / out.sheets.p_max;
  out.upper = out.volume.value / out.sheets.p_min;
  out.exact_covering = out.sheets.uniform;
  return out;
}

// Forward-image raster. n = 2 marks pixels and carries the area estimate;
// n = 3 collects the point cloud. The sampler mixes log-radial draws around
// every support point and around the origin so tentacles are reached at all
// window scales, then tops up near the covered-region boundary.
inline AmoebaRaster raster_forward(const RationalCurve& f, const Box& window,
                                   int resolution, std::uint64_t samples,
                                   std::uint64_t seed = 0) {
  const std::size_t n = f.dimension();
  if (n != 2 && n != 3)
    throw std::invalid_argument("raster_forward handles n = 2 or 3 only");
  if (window.dim() != n)
    throw std::invalid_argument("raster_forward: window dimension mismatch");

  AmoebaRaster out;
  out.window = window;
  out.resolution = resolution;
  if (n == 2)
    out.covered.assign(static_cast<std::size_t>(resolution) * resolution, 0);

  const auto support = singular_support(f);
  std::vector<cplx> anchors = support;
  anchors.push_back(cplx{0.0, 0.0});

  double extent = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    extent = std::max(extent,
                      std::max(std::fabs(window.lo[i]), std::fabs(window.hi[i])));
  const double u_max = extent + 2.0;

  Rng rng(seed ^ 0x72617374ULL);
  std::vector<double> x(n);
  auto forward = [&](cplx z, std::vector<double>& img) {
    for (std::size_t j = 0; j < n; ++j) {
      const cplx v = eval(f.components()[j], z);
      if (v == cplx{0.0, 0.0}) return false;
      img[j] = std::log(std::abs(v));
    }
    return true;
  };

  std::vector<cplx> witness;  // one parameter point per boundary-candidate pixel
  if (n == 2) witness.assign(out.covered.size(), cplx{0.0, 0.0});

  auto draw = [&]() {
    const cplx a = anchors[rng.next_u64() % anchors.size()];
    const double u = rng.uniform(-u_max, u_max);
    const double th = rng.uniform(0.0, 2.0 * detail::kPi);
    return a + std::exp(u) * cplx{std::cos(th), std::sin(th)};
  };

  const std::uint64_t primary = n == 2 ? samples - samples / 4 : samples;
  for (std::uint64_t k = 0; k < primary; ++k) {
    const cplx z = draw();
    if (!forward(z, x)) continue;
    ++out.samples_used;
    if (n == 2) {
      const long long idx = out.mark(x[0], x[1]);
      if (idx >= 0) witness[static_cast<std::size_t>(idx)] = z;
    } else if (window.contains(x)) {
      out.cloud.push_back(x);
    }
  }

  if (n == 2) {
    // Top-up rounds: jitter witnesses of partially covered pixels,
    // multiplicatively around their nearest anchor, until their remaining
    // subcells fill in or the budget runs out.
    std::uint64_t budget = samples / 4;
    const double jitter = 2.0 * (window.hi[0] - window.lo[0]) / resolution;
    for (int round = 0; round < 6 && budget > 0; ++round) {
      std::vector<cplx> frontier;
      for (std::size_t idx = 0; idx < out.covered.size(); ++idx)
        if (out.covered[idx] != 0 && out.covered[idx] != AmoebaRaster::kFull)
          frontier.push_back(witness[idx]);
      if (frontier.empty()) break;
      for (const cplx w : frontier) {
        if (budget == 0) break;
        cplx a = anchors.front();
        for (const cplx cand : anchors)
          if (std::abs(w - cand) < std::abs(w - a)) a = cand;
        for (int rep = 0; rep < 6 && budget > 0; ++rep, --budget) {
          const double du = rng.uniform(-jitter, jitter);
          const double dth = rng.uniform(-jitter, jitter);
          const cplx z = a + (w - a) * std::exp(cplx{du, dth});
          if (!forward(z, x)) continue;
          ++out.samples_used;
          out.mark(x[0], x[1]);
        }
      }
    }
    out.finalize_area();
  }
  return out;
}

inline nlohmann::json to_json(const SheetReport& rep) {
  nlohmann::json samples = nlohmann::json::array();
  for (const FiberSample& s : rep.samples)
    samples.push_back({{"target", s.target}, {"count", s.preimage_count}});
  return nlohmann::json{{"samples", samples},
                        {"p_min", rep.p_min},
                        {"p_max", rep.p_max},
                        {"uniform", rep.uniform}};
}

inline nlohmann::json to_json(const AreaResult& a) {
  nlohmann::json j;
  j["vol2"] = to_json(a.volume);
  j["sheets"] = to_json(a.sheets);
  j["lower"] = a.lower;
  j["upper"] = a.upper;
  j["exact_covering"] = a.exact_covering;
  if (a.exact_covering) j["area"] = a.lower;
  return j;
}

}  // namespace amoeba
