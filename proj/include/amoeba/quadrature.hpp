#pragma once

// Weighted amoeba volume vol2 = integral of the pullback density over the
// parameter plane. The plane is cut into pieces on which the transformed
// integrand is bounded and smooth:
//
//   disk      polar chart around each support point; r * density stays
//             bounded because the density has a first-order singularity
//   collar    the gap between a singular disk and its circumscribed square,
//             in the same polar chart with a square outer boundary
//   rect      exact rectangle cover of the bulk square minus those squares
//   outer     the gap between the inscribed square of radius R_out and the
//             circle |z| = R_out
//   exterior  inversion chart w = 1/z over |w| < 1/R_out with area
//             Jacobian |w|^-4; cubic density decay keeps it bounded
//
// Each piece is integrated with a tensor Gauss-Kronrod 7/15 rule under
// global adaptive bisection driven by the embedded error estimate.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "amoeba/density.hpp"
#include "amoeba/ratfun.hpp"

namespace amoeba {

struct SingularDisk {
  cplx center;
  double radius;
};

struct BulkRect {
  double x0, x1, y0, y1;
};

// Geometric plan for the whole-plane integral. Pieces overlap only on
// boundary curves; every support point is the center of exactly one disk.
struct Decomposition {
  std::vector<SingularDisk> singular_disks;
  double r_out = 0.0;            // exterior chart is |w| < 1/r_out
  double bulk_half_width = 0.0;  // inscribed square half-width R_out/sqrt(2)
  std::vector<BulkRect> bulk_rects;
};

struct QuadratureOptions {
  double rel_tol = 1e-6;
  std::uint64_t eval_budget = 10'000'000;  // density evaluations
  double delta_max = 1.0 / 3.0;            // singular disk radius cap
};

struct PieceValue {
  std::string label;
  double value;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::uint64_t cells_evaluated = 0;
  std::vector<PieceValue> piece_breakdown;
  bool degenerate = false;
  bool converged = true;
};

inline nlohmann::json to_json(const QuadratureResult& r) {
  nlohmann::json pieces = nlohmann::json::array();
  for (const PieceValue& p : r.piece_breakdown)
    pieces.push_back({{"label", p.label}, {"value", p.value}});
  return nlohmann::json{{"value", r.value},
                        {"error", r.error_estimate},
                        {"cells", r.cells_evaluated},
                        {"pieces", pieces},
                        {"degenerate", r.degenerate},
                        {"converged", r.converged}};
}

namespace detail {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1]. Odd-indexed Kronrod
// nodes are the embedded Gauss-7 nodes.
constexpr std::array<double, 15> kKronrodNodes = {
    -0.991455371120812639206854697526329, -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926, -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730, -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245, 0.0,
    0.207784955007898467600689403773245,  0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,  0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,  0.949107912342758524526189684047851,
    0.991455371120812639206854697526329};

constexpr std::array<double, 15> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
    0.204432940075298892414161999234649, 0.190350578064785409913256402421014,
    0.169004726639267902826583426598550, 0.140653259715525918745189590510238,
    0.104790010322250183839876322541518, 0.063092092629978553290700663189204,
    0.022935322010529224963732008058970};

// Gauss-7 weights aligned with Kronrod indices 1,3,...,13 (zero elsewhere).
constexpr std::array<double, 15> kGaussWeights = {
    0.0, 0.129484966168869693270611432679082,
    0.0, 0.279705391489276667901467771423780,
    0.0, 0.381830050505118944950369775488975,
    0.0, 0.417959183673469387755102040816327,
    0.0, 0.381830050505118944950369775488975,
    0.0, 0.279705391489276667901467771423780,
    0.0, 0.129484966168869693270611432679082};

// The volume form behind vol2 is i dz ^ dzbar = 2 dx dy, so every piece
// integral carries twice the Lebesgue weight. With this convention the
// density value 1/2 |Im(g_j conj(g_k))| integrates to pi^2 for a line pair
// and vol2 / sheet count is the true Euclidean amoeba area.
constexpr double kVolumeForm = 2.0;

enum class PieceKind { disk, collar, rect, outer_collar, exterior };

// A chart (s,t) in [0,1]^2 -> plane point plus the full area weight, so the
// piece integral is iint density(z(s,t)) * weight(s,t) ds dt.
struct Piece {
  PieceKind kind;
  int group;  // breakdown slot
  cplx center{0.0, 0.0};
  double radius = 0.0;  // disk/collar delta, outer/exterior R_out
  double theta0 = 0.0, theta1 = 0.0;
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;

  void map(double s, double t, cplx& z, double& weight) const {
    switch (kind) {
      case PieceKind::disk: {
        const double r = radius * s;
        const double th = kTwoPi * t;
        z = center + r * cplx{std::cos(th), std::sin(th)};
        weight = r * radius * kTwoPi;
        return;
      }
      case PieceKind::collar: {
        const double th = theta0 + (theta1 - theta0) * t;
        const double c = std::cos(th), sn = std::sin(th);
        const double cm = std::max(std::fabs(c), std::fabs(sn));
        const double rho = radius / cm;
        const double r = radius + s * (rho - radius);
        z = center + r * cplx{c, sn};
        weight = r * (rho - radius) * (theta1 - theta0);
        return;
      }
      case PieceKind::rect: {
        z = cplx{x0 + s * (x1 - x0), y0 + t * (y1 - y0)};
        weight = (x1 - x0) * (y1 - y0);
        return;
      }
      case PieceKind::outer_collar: {
        const double th = theta0 + (theta1 - theta0) * t;
        const double c = std::cos(th), sn = std::sin(th);
        const double cm = std::max(std::fabs(c), std::fabs(sn));
        const double rho_in = radius / (std::sqrt(2.0) * cm);
        const double r = rho_in + s * (radius - rho_in);
        z = r * cplx{c, sn};
        weight = r * (radius - rho_in) * (theta1 - theta0);
        return;
      }
      case PieceKind::exterior: {
        // z = 1/w with w = (s/R) e^{i th}; area element |w|^-4 dA_w, and the
        // polar r_w cancels one power, leaving r_w^-3 * (1/R) * 2 pi.
        const double rw = s / radius;
        const double th = kTwoPi * t;
        const cplx w = rw * cplx{std::cos(th), std::sin(th)};
        z = 1.0 / w;
        weight = kTwoPi / (radius * rw * rw * rw);
        return;
      }
    }
  }
};

struct Cell {
  std::uint32_t piece;
  std::uint32_t id;
  double s0, s1, t0, t1;
  double value;
  double err;
};

struct CellWorse {
  bool operator()(const Cell& a, const Cell& b) const {
    if (a.err != b.err) return a.err < b.err;
    return a.id > b.id;  // deterministic tie-break
  }
};

class PlaneIntegrator {
 public:
  PlaneIntegrator(const RationalCurve& f, std::vector<Piece> pieces,
                  std::vector<std::string> group_labels)
      : f_(f), pieces_(std::move(pieces)), labels_(std::move(group_labels)) {}

  // Global adaptive loop: refine the worst cell until the summed error
  // estimate meets rel_tol or the evaluation budget runs out.
  QuadratureResult run(double rel_tol, std::uint64_t eval_budget) {
    std::priority_queue<Cell, std::vector<Cell>, CellWorse> heap;
    std::vector<Cell> leaves;  // cells accepted only when the loop ends
    long double total_val = 0.0L, total_err = 0.0L;

    auto push_cell = [&](std::uint32_t piece, double s0, double s1, double t0,
                         double t1) {
      Cell c{piece, next_id_++, s0, s1, t0, t1, 0.0, 0.0};
      evaluate(c);
      total_val += c.value;
      total_err += c.err;
      heap.push(c);
    };

    for (std::uint32_t p = 0; p < pieces_.size(); ++p) seed_piece(p, push_cell);

    const double abs_floor = 1e-300;
    while (!heap.empty()) {
      const double tol =
          std::max(rel_tol * std::fabs(static_cast<double>(total_val)), abs_floor);
      if (static_cast<double>(total_err) <= tol) break;
      if (evals_ + 4 * kCellEvals > eval_budget) break;
      Cell worst = heap.top();
      heap.pop();
      if (worst.s1 - worst.s0 < 1e-12 && worst.t1 - worst.t0 < 1e-12) {
        leaves.push_back(worst);  // refinement floor; keep its estimate
        continue;
      }
      total_val -= worst.value;
      total_err -= worst.err;
      const double sm = 0.5 * (worst.s0 + worst.s1);
      const double tm = 0.5 * (worst.t0 + worst.t1);
      push_cell(worst.piece, worst.s0, sm, worst.t0, tm);
      push_cell(worst.piece, sm, worst.s1, worst.t0, tm);
      push_cell(worst.piece, worst.s0, sm, tm, worst.t1);
      push_cell(worst.piece, sm, worst.s1, tm, worst.t1);
    }

    while (!heap.empty()) {
      leaves.push_back(heap.top());
      heap.pop();
    }

    // Canonical gather: leaves in (piece, id) order, grouped sums in group
    // order, grand total as the plain sequential sum of the breakdown.
    std::sort(leaves.begin(), leaves.end(), [](const Cell& a, const Cell& b) {
      if (a.piece != b.piece) return a.piece < b.piece;
      return a.id < b.id;
    });
    const std::size_t groups = labels_.size();
    std::vector<double> group_val(groups, 0.0);
    std::vector<double> group_comp(groups, 0.0);
    double err_sum = 0.0;
    for (const Cell& c : leaves) {
      const int g = pieces_[c.piece].group;
      // Kahan within each group
      const double y = c.value - group_comp[g];
      const double t = group_val[g] + y;
      group_comp[g] = (t - group_val[g]) - y;
      group_val[g] = t;
      err_sum += c.err;
    }

    QuadratureResult out;
    out.cells_evaluated = cells_;
    out.error_estimate = err_sum;
    double total = 0.0;
    for (std::size_t g = 0; g < groups; ++g) {
      out.piece_breakdown.push_back(PieceValue{labels_[g], group_val[g]});
      total += group_val[g];
    }
    out.value = total;
    out.converged =
        err_sum <= std::max(rel_tol * std::fabs(out.value), abs_floor);
    return out;
  }

 private:
  static constexpr std::uint64_t kCellEvals = 15ULL * 15ULL;

  template <typename Push>
  void seed_piece(std::uint32_t p, Push&& push) {
    const Piece& piece = pieces_[p];
    int ns = 1, nt = 1;
    switch (piece.kind) {
      case PieceKind::disk:
      case PieceKind::exterior:
        ns = 2;
        nt = 4;
        break;
      case PieceKind::collar:
      case PieceKind::outer_collar:
        ns = 2;
        nt = 2;
        break;
      case PieceKind::rect: {
        // keep initial cells near-square in physical units
        const double w = piece.x1 - piece.x0, h = piece.y1 - piece.y0;
        if (w > h)
          ns = std::min(16, std::max(1, static_cast<int>(std::ceil(w / h))));
        else
          nt = std::min(16, std::max(1, static_cast<int>(std::ceil(h / w))));
        break;
      }
    }
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < nt; ++j)
        push(p, static_cast<double>(i) / ns, static_cast<double>(i + 1) / ns,
             static_cast<double>(j) / nt, static_cast<double>(j + 1) / nt);
  }

  void evaluate(Cell& c) {
    const Piece& piece = pieces_[c.piece];
    const double hs = 0.5 * (c.s1 - c.s0), cs = 0.5 * (c.s0 + c.s1);
    const double ht = 0.5 * (c.t1 - c.t0), ct = 0.5 * (c.t0 + c.t1);
    double sum_k = 0.0, sum_g = 0.0;
    cplx z{0.0, 0.0};
    double weight = 0.0;
    for (int i = 0; i < 15; ++i) {
      const double s = cs + hs * kKronrodNodes[i];
      double rk = 0.0, rg = 0.0;
      for (int j = 0; j < 15; ++j) {
        const double t = ct + ht * kKronrodNodes[j];
        piece.map(s, t, z, weight);
        const double fv = density_value(f_, z, scratch_) * weight * kVolumeForm;
        rk += kKronrodWeights[j] * fv;
        rg += kGaussWeights[j] * fv;
      }
      sum_k += kKronrodWeights[i] * rk;
      sum_g += kGaussWeights[i] * rg;
    }
    c.value = sum_k * hs * ht;
    c.err = std::fabs(sum_k - sum_g) * hs * ht;
    evals_ += kCellEvals;
    ++cells_;
  }

  const RationalCurve& f_;
  std::vector<Piece> pieces_;
  std::vector<std::string> labels_;
  std::vector<cplx> scratch_;
  std::uint64_t evals_ = 0;
  std::uint64_t cells_ = 0;
  std::uint32_t next_id_ = 0;
};

}  // namespace detail

// --- decomposition ----------------------------------------------------------

inline Decomposition decompose_plane(const RationalCurve& f,
                                     const QuadratureOptions& opt = {}) {
  if (is_degenerate(f))
    throw degenerate_error(
        "decompose_plane: curve lies in a one-dimensional subtorus");
  const auto support = singular_support(f);
  if (support.empty())
    throw std::invalid_argument("decompose_plane: curve has no support points");

  double min_sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < support.size(); ++i)
    for (std::size_t j = i + 1; j < support.size(); ++j)
      min_sep = std::min(min_sep, std::abs(support[i] - support[j]));

  double scale = detail::support_scale(support);
  Decomposition d;
  const double delta = std::min(opt.delta_max, min_sep / 3.0);
  for (cplx a : support) d.singular_disks.push_back(SingularDisk{a, delta});
  d.r_out = 2.0 * (1.0 + scale);
  d.bulk_half_width = d.r_out / std::sqrt(2.0);

  // Exact rectangle cover of the bulk square minus the collar squares:
  // horizontal slabs bounded by every square edge, blocked intervals
  // removed within each slab.
  const double L = d.bulk_half_width;
  std::vector<double> ys{-L, L};
  for (cplx a : support) {
    ys.push_back(a.imag() - delta);
    ys.push_back(a.imag() + delta);
  }
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  for (std::size_t s = 0; s + 1 < ys.size(); ++s) {
    const double ya = ys[s], yb = ys[s + 1];
    if (!(yb > ya) || yb <= -L || ya >= L) continue;
    std::vector<std::pair<double, double>> blocked;
    for (cplx a : support)
      if (a.imag() - delta <= ya && a.imag() + delta >= yb)
        blocked.emplace_back(a.real() - delta, a.real() + delta);
    std::sort(blocked.begin(), blocked.end());
    double cur = -L;
    for (auto [lo, hi] : blocked) {
      if (lo > cur) d.bulk_rects.push_back(BulkRect{cur, lo, ya, yb});
      cur = std::max(cur, hi);
    }
    if (cur < L) d.bulk_rects.push_back(BulkRect{cur, L, ya, yb});
  }
  return d;
}

namespace detail {

inline std::vector<Piece> build_pieces(const Decomposition& d,
                                       std::vector<std::string>* labels) {
  std::vector<Piece> pieces;
  labels->clear();
  // group g = disk index for disks; then one bulk group, one exterior group
  const int n_disks = static_cast<int>(d.singular_disks.size());
  const int bulk_group = n_disks;
  const int ext_group = n_disks + 1;

  static const double arcs[5] = {-kPi / 4.0, kPi / 4.0, 3.0 * kPi / 4.0,
                                 5.0 * kPi / 4.0, 7.0 * kPi / 4.0};

  for (int i = 0; i < n_disks; ++i) {
    const SingularDisk& disk = d.singular_disks[i];
    Piece p;
    p.kind = PieceKind::disk;
    p.group = i;
    p.center = disk.center;
    p.radius = disk.radius;
    pieces.push_back(p);
    labels->push_back("disk " + detail::format_cplx(disk.center));
  }
  for (int i = 0; i < n_disks; ++i) {
    const SingularDisk& disk = d.singular_disks[i];
    for (int q = 0; q < 4; ++q) {
      Piece p;
      p.kind = PieceKind::collar;
      p.group = bulk_group;
      p.center = disk.center;
      p.radius = disk.radius;
      p.theta0 = arcs[q];
      p.theta1 = arcs[q + 1];
      pieces.push_back(p);
    }
  }
  for (const BulkRect& r : d.bulk_rects) {
    Piece p;
    p.kind = PieceKind::rect;
    p.group = bulk_group;
    p.x0 = r.x0;
    p.x1 = r.x1;
    p.y0 = r.y0;
    p.y1 = r.y1;
    pieces.push_back(p);
  }
  for (int q = 0; q < 4; ++q) {
    Piece p;
    p.kind = PieceKind::outer_collar;
    p.group = bulk_group;
    p.radius = d.r_out;
    p.theta0 = arcs[q];
    p.theta1 = arcs[q + 1];
    pieces.push_back(p);
  }
  {
    Piece p;
    p.kind = PieceKind::exterior;
    p.group = ext_group;
    p.radius = d.r_out;
    pieces.push_back(p);
  }
  labels->push_back("bulk");
  labels->push_back("exterior");
  return pieces;
}

}  // namespace detail

// --- public operations -------------------------------------------------------

inline QuadratureResult vol2(const RationalCurve& f,
                             const QuadratureOptions& opt = {}) {
  if (!(opt.rel_tol > 1e-10 && opt.rel_tol < 1e-1))
    throw std::invalid_argument("rel_tol must lie in (1e-10, 1e-1)");
  QuadratureResult out;
  if (is_degenerate(f)) {
    out.degenerate = true;
    return out;
  }
  Decomposition d = decompose_plane(f, opt);
  std::vector<std::string> labels;
  auto pieces = detail::build_pieces(d, &labels);
  detail::PlaneIntegrator integ(f, std::move(pieces), std::move(labels));
  return integ.run(opt.rel_tol, opt.eval_budget);
}

inline QuadratureResult vol2(const RationalCurve& f, double rel_tol) {
  QuadratureOptions opt;
  opt.rel_tol = rel_tol;
  return vol2(f, opt);
}

// Mass of the density over the disk |z - a| < delta; O(delta) for simple
// singular points, identically zero for degenerate curves.
inline double local_mass(const RationalCurve& f, cplx a, double delta,
                         double rel_tol = 1e-6) {
  const auto support = singular_support(f);
  if (std::find(support.begin(), support.end(), a) == support.end())
    throw std::invalid_argument("local_mass: point is not in the singular support");
  if (is_degenerate(f)) return 0.0;
  QuadratureOptions opt;
  Decomposition d = decompose_plane(f, opt);
  if (delta >= d.singular_disks.front().radius)
    throw std::invalid_argument("local_mass: delta must be below the disk radius");
  detail::Piece p;
  p.kind = detail::PieceKind::disk;
  p.group = 0;
  p.center = a;
  p.radius = delta;
  detail::PlaneIntegrator integ(f, {p}, {"disk"});
  return integ.run(rel_tol, 2'000'000).value;
}

// Exterior mass over |z| > R through the inversion chart; decays like 1/R.
inline double tail_mass(const RationalCurve& f, double R, double rel_tol = 1e-6) {
  if (is_degenerate(f)) return 0.0;
  QuadratureOptions opt;
  Decomposition d = decompose_plane(f, opt);
  if (R < d.r_out)
    throw std::invalid_argument("tail_mass: R must be at least R_out");
  detail::Piece p;
  p.kind = detail::PieceKind::exterior;
  p.group = 0;
  p.radius = R;
  detail::PlaneIntegrator integ(f, {p}, {"exterior"});
  return integ.run(rel_tol, 2'000'000).value;
}

// Least-squares slope of log(density) vs log(R) along the ray of angle
// theta; nullopt when the ray runs inside the critical locus.
inline std::optional<double> decay_exponent(const RationalCurve& f, double theta,
                                            double r_lo, double r_hi,
                                            int samples = 25) {
  const cplx dir{std::cos(theta), std::sin(theta)};
  std::vector<cplx> scratch;
  std::vector<double> xs, ys;
  for (int i = 0; i < samples; ++i) {
    const double u = static_cast<double>(i) / (samples - 1);
    const double R = r_lo * std::pow(r_hi / r_lo, u);
    const double rho = density_value(f, R * dir, scratch);
    if (!(rho > 1e-300)) return std::nullopt;
    xs.push_back(std::log(R));
    ys.push_back(std::log(rho));
  }
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < samples; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= samples;
  my /= samples;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < samples; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  return sxy / sxx;
}

}  // namespace amoeba
