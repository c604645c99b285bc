// Command-line front end: parses curve expressions or JSON inputs, runs the
// requested computation, and emits JSON, CSV, or PPM. Outputs are
// deterministic for a fixed flag set: fixed seeds, canonical summation
// order, and no timestamps or environment-dependent content.
//
// Exit codes: 0 success, 1 input/parse error, 2 numeric failure,
// 3 degenerate-curve rejection.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "amoeba/density.hpp"
#include "amoeba/planecurve.hpp"
#include "amoeba/quadrature.hpp"
#include "amoeba/raster.hpp"
#include "amoeba/ratfun.hpp"
#include "amoeba/sheets.hpp"
#include "amoeba/tropical.hpp"

namespace {

using nlohmann::json;
using namespace amoeba;

constexpr int kExitParse = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitDegenerate = 3;

struct Options {
  std::string curve_text;
  std::string poly_text;
  std::string input_path;
  double rel_tol = 1e-6;
  std::uint64_t budget = 10'000'000;
  std::uint64_t seed = 0;
  std::vector<double> window;
  int res = 0;
  std::uint64_t samples = 0;
  std::string format;
  std::string output_path;
};

int worker_cap() {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("AMOEBA_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return static_cast<int>(n);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RationalCurve load_curve(const Options& opt) {
  std::string text = opt.curve_text;
  if (!opt.input_path.empty()) text = read_file(opt.input_path);
  if (text.empty())
    throw parse_error("no curve given; use --curve or --input", 0);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{')
    return curve_from_json(json::parse(text));
  return parse_curve(text);
}

LaurentPolynomial load_poly(const Options& opt) {
  std::string text = opt.poly_text;
  if (!opt.input_path.empty()) text = read_file(opt.input_path);
  if (text.empty())
    throw parse_error("no polynomial given; use --poly or --input", 0);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{')
    return laurent_from_json(json::parse(text));
  return parse_laurent(text);
}

Box window_or(const Options& opt, std::size_t dim, double half_width) {
  Box b;
  if (!opt.window.empty()) {
    if (opt.window.size() != 2 * dim)
      throw std::invalid_argument("--window needs " + std::to_string(2 * dim) +
                                  " comma-separated values");
    for (std::size_t i = 0; i < dim; ++i) {
      b.lo.push_back(opt.window[2 * i]);
      b.hi.push_back(opt.window[2 * i + 1]);
      if (!(b.lo[i] < b.hi[i]))
        throw std::invalid_argument("--window bounds must be increasing per axis");
    }
    return b;
  }
  b.lo.assign(dim, -half_width);
  b.hi.assign(dim, half_width);
  return b;
}

json config_json(const Options& opt) {
  json c;
  c["rel_tol"] = opt.rel_tol;
  c["seed"] = opt.seed;
  c["budget"] = opt.budget;
  if (opt.res > 0) c["res"] = opt.res;
  if (opt.samples > 0) c["samples"] = opt.samples;
  if (!opt.window.empty()) c["window"] = opt.window;
  return c;
}

void emit_text(const Options& opt, const std::string& payload) {
  if (opt.output_path.empty() || opt.output_path == "-") {
    std::cout << payload;
    return;
  }
  std::ofstream out(opt.output_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output: " + opt.output_path);
  out << payload;
}

void emit_json(const Options& opt, const json& j) {
  emit_text(opt, j.dump(2) + "\n");
}

// --- command handlers ---------------------------------------------------------

int cmd_vol2(const Options& opt) {
  const RationalCurve f = load_curve(opt);
  QuadratureOptions q;
  q.rel_tol = opt.rel_tol;
  q.eval_budget = opt.budget;
  const QuadratureResult r = vol2(f, q);
  json out;
  out["command"] = "vol2";
  out["curve"] = serialize(f);
  out["config"] = config_json(opt);
  out["result"] = to_json(r);
  const double bound = pair_product_bound(f);
  out["bound"] = bound;
  out["ratio"] = bound > 0.0 ? r.value / bound : 0.0;
  emit_json(opt, out);
  if (r.degenerate) return 0;  // value 0 with flag, by contract
  return r.converged ? 0 : kExitNumeric;
}

int cmd_area(const Options& opt) {
  const RationalCurve f = load_curve(opt);
  const AreaResult a = area(f, opt.rel_tol, opt.seed);
  json out;
  out["command"] = "area";
  out["curve"] = serialize(f);
  out["config"] = config_json(opt);
  out["result"] = to_json(a);
  emit_json(opt, out);
  return 0;
}

int cmd_bound(const Options& opt) {
  const RationalCurve f = load_curve(opt);
  json counts = json::array();
  for (const RationalComponent& c : f.components())
    counts.push_back(pole_zero_count(c));
  json out;
  out["command"] = "bound";
  out["curve"] = serialize(f);
  out["config"] = config_json(opt);
  out["pole_zero_counts"] = counts;
  out["bound"] = pair_product_bound(f);
  emit_json(opt, out);
  return 0;
}

int cmd_sheets(const Options& opt) {
  const RationalCurve f = load_curve(opt);
  const int samples = opt.samples > 0 ? static_cast<int>(opt.samples) : 12;
  const SheetReport rep = sheet_report(f, samples, opt.seed);
  json out;
  out["command"] = "sheets";
  out["curve"] = serialize(f);
  out["config"] = config_json(opt);
  out["result"] = to_json(rep);
  emit_json(opt, out);
  return 0;
}

int cmd_limitset(const Options& opt) {
  const RationalCurve f = load_curve(opt);
  const LimitSet ls = limit_directions(f);
  json dirs = json::array();
  for (const DirectionVector& d : ls.directions) {
    json jd = to_json(d);
    const bool inf = d.sources.front().infinite;
    const AsymptoteFit fit =
        end_asymptote_fit(f, d, inf ? 1e2 : 1e-8, inf ? 1e6 : 1e-2, 33, opt.seed);
    jd["fit_residual"] = fit.angular_residual;
    dirs.push_back(jd);
  }
  json out;
  out["command"] = "limitset";
  out["curve"] = serialize(f);
  out["config"] = config_json(opt);
  out["degenerate"] = ls.degenerate;
  out["directions"] = dirs;
  emit_json(opt, out);
  return 0;
}

int cmd_raster(const Options& opt) {
  const RationalCurve f = load_curve(opt);
  const std::size_t n = f.dimension();
  if (n != 2 && n != 3)
    throw std::invalid_argument("raster needs a curve with 2 or 3 components");
  const Box window = window_or(opt, n, n == 2 ? 4.0 : 5.0);
  const int res = opt.res > 0 ? opt.res : 512;
  const std::uint64_t samples =
      opt.samples > 0 ? opt.samples : (n == 2 ? 1'000'000 : 20'000);
  const AmoebaRaster raster = raster_forward(f, window, res, samples, opt.seed);

  std::string format = opt.format;
  if (format.empty()) format = n == 2 ? "ppm" : "csv";
  json report = raster_report_json(raster);
  report["command"] = "raster";
  report["curve"] = serialize(f);
  report["config"] = config_json(opt);

  if (format == "json") {
    emit_json(opt, report);
  } else if (format == "ppm") {
    if (n != 2) throw std::invalid_argument("ppm output needs n = 2");
    std::ostringstream ss;
    write_ppm(ss, raster);
    emit_text(opt, ss.str());
  } else if (format == "csv") {
    if (n != 3) throw std::invalid_argument("csv cloud output needs n = 3");
    std::ostringstream ss;
    write_cloud_csv(ss, raster);
    emit_text(opt, ss.str());
  } else {
    throw std::invalid_argument("unknown format: " + format);
  }
  return 0;
}

int cmd_plane_raster(const Options& opt) {
  const LaurentPolynomial p = load_poly(opt);
  int spread = 0;
  for (const LaurentTerm& t : p.terms())
    spread = std::max({spread, std::abs(t.ez), std::abs(t.ew)});
  const Box window = window_or(opt, 2, 3.0 + spread);
  const int res = opt.res > 0 ? opt.res : 600;
  const std::uint64_t samples = opt.samples > 0 ? opt.samples : 360'000;
  const int fibers = res;
  const int angles =
      static_cast<int>((samples + fibers - 1) / static_cast<std::uint64_t>(fibers));

  PlaneRasterStats stats;
  const AmoebaRaster raster = raster_amoeba_parallel(p, window, res, fibers,
                                                     angles, worker_cap(), &stats);

  std::string format = opt.format.empty() ? "ppm" : opt.format;
  if (format == "ppm") {
    std::ostringstream ss;
    write_ppm(ss, raster);
    emit_text(opt, ss.str());
  } else if (format == "json") {
    json out = raster_report_json(raster);
    out["command"] = "plane-raster";
    out["poly"] = to_json(p);
    out["config"] = config_json(opt);
    out["bound"] = pr_bound(p);
    out["pass"] = raster.area_estimate <= pr_bound(p) * 1.02;
    out["fibers_solved"] = stats.fibers_solved;
    out["fibers_skipped"] = stats.fibers_skipped;
    emit_json(opt, out);
  } else {
    throw std::invalid_argument("unknown format: " + format);
  }
  return 0;
}

int cmd_plane_bound(const Options& opt) {
  const LaurentPolynomial p = load_poly(opt);
  const LatticePolygon poly = newton_polygon(p);
  json out;
  out["command"] = "plane-bound";
  out["poly"] = to_json(p);
  out["config"] = config_json(opt);
  out["newton_polygon"] = to_json(poly);
  out["bound"] = pr_bound(p);
  emit_json(opt, out);
  return 0;
}

int cmd_diagnose(const Options& opt) {
  const RationalCurve f = load_curve(opt);
  json out;
  out["command"] = "diagnose";
  out["curve"] = serialize(f);
  out["config"] = config_json(opt);

  if (is_degenerate(f)) {
    out["degenerate"] = true;
    emit_json(opt, out);
    return 0;
  }
  out["degenerate"] = false;

  QuadratureOptions q;
  const Decomposition dec = decompose_plane(f, q);
  const double disk_radius = dec.singular_disks.front().radius;

  // local singular mass: m(delta)/delta should stabilize
  json locals = json::array();
  bool local_ok = true;
  for (const SingularDisk& disk : dec.singular_disks) {
    json entry;
    entry["center"] = {disk.center.real(), disk.center.imag()};
    json ratios = json::array();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double delta : {1e-1, 1e-2, 1e-3}) {
      // shrink the probe when tight support spacing shrinks the disks
      const double dd = std::min(delta, 0.9 * disk_radius * delta / 0.1);
      const double mass = local_mass(f, disk.center, dd, 1e-6);
      const double ratio = mass / dd;
      ratios.push_back({{"delta", dd}, {"mass", mass}, {"ratio", ratio}});
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    entry["ratios"] = ratios;
    const double drift = lo > 0.0 ? hi / lo - 1.0 : 0.0;
    entry["drift"] = drift;
    if (drift >= 0.5) local_ok = false;
    locals.push_back(entry);
  }
  out["local_mass"] = locals;
  out["local_ok"] = local_ok;

  // tail decay: at least linear in 1/R over two decades
  json tails = json::array();
  std::vector<double> lr, lt;
  for (double mul : {1.0, 10.0, 100.0}) {
    const double R = dec.r_out * mul;
    const double t = tail_mass(f, R, 1e-6);
    tails.push_back({{"R", R}, {"mass", t}});
    if (t > 0.0) {
      lr.push_back(std::log(R));
      lt.push_back(std::log(t));
    }
  }
  double tail_slope = 0.0;
  if (lr.size() >= 2) {
    const double n = static_cast<double>(lr.size());
    double mx = 0, my = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lr.size(); ++i) {
      mx += lr[i];
      my += lt[i];
    }
    mx /= n;
    my /= n;
    for (std::size_t i = 0; i < lr.size(); ++i) {
      sxx += (lr[i] - mx) * (lr[i] - mx);
      sxy += (lr[i] - mx) * (lt[i] - my);
    }
    tail_slope = sxy / sxx;
  }
  out["tail_mass"] = tails;
  out["tail_slope"] = tail_slope;
  out["tail_ok"] = tail_slope <= -0.8;

  // ray decay: slope of log density vs log R along random rays
  Rng rng(opt.seed ^ 0x64696167ULL);
  json rays = json::array();
  bool decay_ok = true;
  int kept = 0;
  for (int attempt = 0; attempt < 40 && kept < 5; ++attempt) {
    const double theta = rng.uniform(0.0, 2.0 * 3.141592653589793);
    const auto slope = decay_exponent(f, theta, 1e2, 1e5);
    if (!slope) continue;
    ++kept;
    rays.push_back({{"theta", theta}, {"slope", *slope}});
    if (*slope > -2.9) decay_ok = false;
  }
  out["rays"] = rays;
  out["decay_ok"] = decay_ok && kept == 5;
  emit_json(opt, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical amoebas of rational curves"};
  app.require_subcommand(1);

  Options opt;
  std::string window_text;

  auto add_common = [&](CLI::App* sub, bool curve, bool poly) {
    if (curve) sub->add_option("--curve", opt.curve_text, "curve expression, components separated by ';'");
    if (poly) sub->add_option("--poly", opt.poly_text, "laurent polynomial in z and w");
    sub->add_option("--input", opt.input_path, "read the curve/polynomial from a file (expression or JSON)");
    sub->add_option("--rel-tol", opt.rel_tol, "relative tolerance in (1e-10, 1e-1)");
    sub->add_option("--budget", opt.budget, "density evaluation budget for quadrature");
    sub->add_option("--seed", opt.seed, "random seed");
    sub->add_option("--window", window_text, "window bounds x1,x2,y1,y2[,z1,z2]");
    sub->add_option("--res", opt.res, "raster resolution per axis");
    sub->add_option("--samples", opt.samples, "sample count");
    sub->add_option("--format", opt.format, "output format: json, csv, ppm");
    sub->add_option("--output", opt.output_path, "output path (default stdout)");
  };

  CLI::App* s_vol2 = app.add_subcommand("vol2", "weighted amoeba volume");
  CLI::App* s_area = app.add_subcommand("area", "true amoeba area via sheet counts");
  CLI::App* s_bound = app.add_subcommand("bound", "pairwise pole-zero volume bound");
  CLI::App* s_sheets = app.add_subcommand("sheets", "covering sheet counts");
  CLI::App* s_limitset = app.add_subcommand("limitset", "logarithmic limit set directions");
  CLI::App* s_raster = app.add_subcommand("raster", "forward-sampled amoeba image or cloud");
  CLI::App* s_praster = app.add_subcommand("plane-raster", "implicit plane-curve amoeba raster");
  CLI::App* s_pbound = app.add_subcommand("plane-bound", "Newton polygon area bound");
  CLI::App* s_diag = app.add_subcommand("diagnose", "singular/tail/ray integrability report");
  for (CLI::App* sub : {s_vol2, s_area, s_bound, s_sheets, s_limitset, s_raster, s_diag})
    add_common(sub, true, false);
  for (CLI::App* sub : {s_praster, s_pbound}) add_common(sub, false, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitParse;
  }

  try {
    if (!(opt.rel_tol > 1e-10 && opt.rel_tol < 1e-1))
      throw std::invalid_argument("--rel-tol must lie in (1e-10, 1e-1)");
    if (!window_text.empty()) {
      std::stringstream ss(window_text);
      std::string item;
      while (std::getline(ss, item, ','))
        opt.window.push_back(std::stod(item));
    }

    if (s_vol2->parsed()) return cmd_vol2(opt);
    if (s_area->parsed()) return cmd_area(opt);
    if (s_bound->parsed()) return cmd_bound(opt);
    if (s_sheets->parsed()) return cmd_sheets(opt);
    if (s_limitset->parsed()) return cmd_limitset(opt);
    if (s_raster->parsed()) return cmd_raster(opt);
    if (s_praster->parsed()) return cmd_plane_raster(opt);
    if (s_pbound->parsed()) return cmd_plane_bound(opt);
    if (s_diag->parsed()) return cmd_diagnose(opt);
    return kExitParse;
  } catch (const parse_error& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitParse;
  } catch (const degenerate_error& e) {
    std::cerr << "degenerate curve: " << e.what()
              << " (the image lies in a subtorus of dimension one; this "
                 "command needs the subtorus hypothesis to fail)\n";
    return kExitDegenerate;
  } catch (const domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const numeric_error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
