#include <doctest.h>

#include <cmath>

#include "amoeba/quadrature.hpp"
#include "amoeba/sheets.hpp"
#include "random_curves.hpp"

using namespace amoeba;

namespace {
constexpr double kPi2 = 9.869604401089358;
}

TEST_CASE("decompose_plane places disks and the outer radius") {
  const auto d = decompose_plane(parse_curve("z ; (z-1)"));
  REQUIRE(d.singular_disks.size() == 2);
  CHECK(d.singular_disks[0].center == cplx{0.0, 0.0});
  CHECK(d.singular_disks[1].center == cplx{1.0, 0.0});
  CHECK(d.singular_disks[0].radius == doctest::Approx(1.0 / 3.0));
  CHECK(d.r_out == doctest::Approx(4.0));

  const auto d3 = decompose_plane(parse_curve("z ; (z+1) ; (z-2i)"));
  CHECK(d3.singular_disks.size() == 3);
  CHECK(d3.r_out == doctest::Approx(6.0));

  const auto dw = decompose_plane(parse_curve("z ; (z-1000000)"));
  CHECK(dw.r_out == doctest::Approx(2.0 * (1.0 + 1e6)));
}

TEST_CASE("bulk rectangles tile the square minus the collar squares") {
  for (const char* text : {"z ; (z-1)", "z ; (z+1) ; (z-2i)",
                           "z(z-1) ; (z+0.5i)(z-0.25)"}) {
    const auto f = parse_curve(text);
    const auto d = decompose_plane(f);
    double rect_area = 0.0;
    for (const auto& r : d.bulk_rects) {
      CHECK(r.x1 > r.x0);
      CHECK(r.y1 > r.y0);
      rect_area += (r.x1 - r.x0) * (r.y1 - r.y0);
    }
    const double L = d.bulk_half_width;
    const double delta = d.singular_disks.front().radius;
    const double expected =
        4.0 * L * L -
        4.0 * delta * delta * static_cast<double>(d.singular_disks.size());
    CHECK(rect_area == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("vol2 reproduces the closed-form line value") {
  const auto r = vol2(parse_curve("z ; (z-1)"), 1e-5);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(kPi2).epsilon(1e-4));
  CHECK(r.error_estimate < 1e-4 * kPi2);
}

TEST_CASE("vol2 is the same for the quadratic-family curve") {
  const auto r = vol2(parse_curve("z ; (z-1)(z+1)"), 1e-5);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(kPi2).epsilon(1e-4));
}

TEST_CASE("vol2 flags degenerate curves with value zero") {
  const auto r = vol2(parse_curve("z ; z"), 1e-4);
  CHECK(r.degenerate);
  CHECK(r.value == 0.0);
}

TEST_CASE("degenerate curves: decomposition rejects, masses vanish") {
  const auto f = parse_curve("z ; z");
  CHECK_THROWS_AS(decompose_plane(f), degenerate_error);
  CHECK(local_mass(f, cplx{0, 0}, 1e-2) == 0.0);
  CHECK(tail_mass(f, 10.0) == 0.0);
  CHECK(tail_mass(f, 1000.0) == 0.0);
}

TEST_CASE("vol2 rejects out-of-range tolerances") {
  CHECK_THROWS_AS(vol2(parse_curve("z ; (z-1)"), 0.5), std::invalid_argument);
  CHECK_THROWS_AS(vol2(parse_curve("z ; (z-1)"), 1e-11), std::invalid_argument);
}

TEST_CASE("vol2 is invariant under translation and rotation of the parameter") {
  const auto base = vol2(parse_curve("z ; (z-1)"), 1e-5);
  // translate both roots by 0.7 - 0.4i
  const auto shifted = vol2(parse_curve("(z-0.7+0.4i) ; (z-1.7+0.4i)"), 1e-5);
  CHECK(std::fabs(shifted.value - base.value) <
        2e-5 * (base.value + shifted.value));

  // rotate: f(e^{ia} z) rotates roots and scales constants; same amoeba
  const double a = 0.6;
  const cplx rot = std::polar(1.0, -a);
  const cplx c1 = std::polar(1.0, a);
  std::vector<RationalComponent> comps;
  comps.emplace_back(c1, std::vector<Factor>{{cplx{0, 0}, 1}});
  comps.emplace_back(c1, std::vector<Factor>{{rot * cplx{1, 0}, 1}});
  const auto rotated = vol2(RationalCurve(comps), 1e-5);
  CHECK(std::fabs(rotated.value - base.value) <
        2e-5 * (base.value + rotated.value));
}

TEST_CASE("scaling a component constant leaves every pair term unchanged") {
  const auto f = parse_curve("z ; (z-1)(z+2i)");
  const auto g = parse_curve("z ; -3.7i(z-1)(z+2i)");
  Rng rng(41);
  for (int i = 0; i < 20; ++i) {
    const cplx z{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    if (std::abs(z) < 0.1 || std::abs(z - cplx{1, 0}) < 0.1 ||
        std::abs(z + cplx{0, 2}) < 0.1)
      continue;
    CHECK(std::fabs(pair_determinant(f, 0, 1, z) - pair_determinant(g, 0, 1, z)) <
          1e-12);
  }
}

TEST_CASE("halving the tolerance moves the value less than the error estimate") {
  const auto coarse = vol2(parse_curve("z ; (z+0.5) ; (z-1.5)"), 2e-4);
  const auto fine = vol2(parse_curve("z ; (z+0.5) ; (z-1.5)"), 1e-4);
  CHECK(std::fabs(fine.value - coarse.value) <= coarse.error_estimate);
}

TEST_CASE("piece breakdown sums to the value exactly") {
  const auto r = vol2(parse_curve("z ; (z-1)(z+1)"), 1e-4);
  double total = 0.0;
  for (const auto& p : r.piece_breakdown) total += p.value;
  CHECK(total == r.value);  // sequential sum, bitwise
  REQUIRE(r.piece_breakdown.size() == 5);  // 3 disks + bulk + exterior
  CHECK(r.piece_breakdown.back().label == "exterior");
}

TEST_CASE("vol2 respects the pair product bound on random curves") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto f = testgen::random_curve(seed, 2 + static_cast<int>(seed % 3));
    QuadratureOptions opt;
    opt.rel_tol = 1e-3;
    const auto r = vol2(f, opt);
    CHECK(r.value <= pair_product_bound(f) + r.error_estimate + 1e-9);
  }
}

TEST_CASE("local_mass scales linearly at a simple support point") {
  const auto f = parse_curve("z ; (z-1)");
  double prev_ratio = 0.0;
  for (double delta : {1e-1, 1e-2, 1e-3}) {
    const double m = local_mass(f, cplx{0, 0}, delta);
    const double ratio = m / delta;
    CHECK(m > 0.0);
    if (prev_ratio > 0.0)
      CHECK(std::fabs(ratio - prev_ratio) / prev_ratio < 0.5);
    prev_ratio = ratio;
  }

  // a double zero still has a simple density singularity
  const auto f2 = parse_curve("z ; (z-1)(z+1)");
  const double m1 = local_mass(f2, cplx{1, 0}, 1e-2);
  const double m2 = local_mass(f2, cplx{1, 0}, 1e-3);
  CHECK(m1 > 0.0);
  CHECK(m2 / 1e-3 == doctest::Approx(m1 / 1e-2).epsilon(0.2));

  CHECK_THROWS_AS(local_mass(f, cplx{0, 0}, 0.4), std::invalid_argument);
  CHECK_THROWS_AS(local_mass(f, cplx{5, 0}, 1e-2), std::invalid_argument);
}

TEST_CASE("tail_mass decays like 1/R") {
  const auto f = parse_curve("z ; (z-1)");
  const double t10 = tail_mass(f, 10.0);
  const double t100 = tail_mass(f, 100.0);
  const double t1000 = tail_mass(f, 1000.0);
  CHECK(t10 > t100);
  CHECK(t100 > t1000);
  CHECK(t100 == doctest::Approx(t10 / 10.0).epsilon(0.15));
  CHECK(t1000 == doctest::Approx(t100 / 10.0).epsilon(0.15));

  const auto h = parse_curve("z ; (z+1) ; (z-2i)");
  const double tail = tail_mass(h, 10.0);
  const auto full = vol2(h, 1e-4);
  CHECK(tail > 0.0);
  CHECK(tail < full.value);

  CHECK_THROWS_AS(tail_mass(f, 1.0), std::invalid_argument);
}

TEST_CASE("decay_exponent matches the cubic-decay prediction") {
  const auto slope = decay_exponent(parse_curve("z ; (z-1)"), 0.7, 1e2, 1e5);
  REQUIRE(slope.has_value());
  CHECK(*slope <= -2.9);

  CHECK_FALSE(decay_exponent(parse_curve("z ; z"), 0.7, 1e2, 1e5).has_value());

  const auto mixed =
      decay_exponent(parse_curve("z ; (z-1)^2 ; (z+2)^-1"), 1.234, 1e2, 1e5);
  REQUIRE(mixed.has_value());
  CHECK(*mixed <= -2.9);
}

namespace {

// Brute-force oracle: midpoint-grid integral of the density (with the
// doubled area form) over [-H, H]^2. First-order accurate thanks to the
// integrable 1/r singularities, so it cross-checks the engine at the
// percent level through an entirely different route.
double brute_inside(const RationalCurve& f, double H, int n) {
  std::vector<cplx> scratch;
  const auto support = singular_support(f);
  const double h = 2.0 * H / n;
  double sum = 0.0;
  for (int iy = 0; iy < n; ++iy) {
    const double y = -H + (iy + 0.5) * h;
    for (int ix = 0; ix < n; ++ix) {
      const cplx z{-H + (ix + 0.5) * h, y};
      bool skip = false;
      for (cplx a : support)
        if (std::abs(z - a) < 1e-9) skip = true;
      if (!skip) sum += density_value(f, z, scratch);
    }
  }
  return 2.0 * sum * h * h;
}

}  // namespace

TEST_CASE("single-factor pairs scale the line value by the multiplicity product") {
  // g_j = m_j/(z - a_j) makes the density |m_1 m_2| times the line density,
  // so vol2((z-a)^m1, (z-b)^m2) = |m1 m2| pi^2 exactly
  struct Case {
    const char* text;
    double factor;
  };
  for (const Case& c : {Case{"z^3 ; (z-1)^-2", 6.0}, Case{"(z-2i)^2 ; (z+1)^2", 4.0},
                        Case{"z^2 ; (z-1)", 2.0}}) {
    const auto r = vol2(parse_curve(c.text), 1e-5);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(c.factor * kPi2).epsilon(1e-4));
  }
}

TEST_CASE("vol2 is scale invariant across extreme root separations") {
  for (const char* text : {"z ; (z-1000000)", "z ; (z-0.001)"}) {
    const auto r = vol2(parse_curve(text), 1e-5);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(kPi2).epsilon(1e-4));
  }
}

TEST_CASE("vol2 agrees with a brute-force grid plus tail") {
  for (const char* text : {"z ; (z-1)", "z ; (z+1) ; (z-2i)"}) {
    const auto f = parse_curve(text);
    const double engine = vol2(f, 1e-5).value;
    const double oracle = brute_inside(f, 24.0, 2000) + tail_mass(f, 24.0);
    CHECK(std::fabs(engine - oracle) / engine < 1e-2);
  }
}

TEST_CASE("exhausting the evaluation budget flags non-convergence") {
  QuadratureOptions opt;
  opt.rel_tol = 1e-6;
  opt.eval_budget = 20'000;  // a handful of cells
  const auto r = vol2(parse_curve("z ; (z-1)(z+1)"), opt);
  CHECK_FALSE(r.converged);
  CHECK(r.value > 0.0);  // partial value still reported
  CHECK(r.error_estimate > 1e-6 * r.value);
}

TEST_CASE("quadrature result serializes with the documented keys") {
  const auto j = to_json(vol2(parse_curve("z ; (z-1)"), 1e-3));
  for (const char* key : {"value", "error", "cells", "pieces", "degenerate",
                          "converged"})
    CHECK(j.contains(key));
}
