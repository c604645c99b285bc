#include <doctest.h>

#include <cmath>
#include <numeric>

#include "amoeba/tropical.hpp"
#include "random_curves.hpp"

using namespace amoeba;

namespace {

const DirectionVector* find_dir(const LimitSet& ls,
                                std::vector<long long> rep) {
  for (const auto& d : ls.directions)
    if (d.integer_rep == rep) return &d;
  return nullptr;
}

}  // namespace

TEST_CASE("limit directions of the affine line pair") {
  const auto ls = limit_directions(parse_curve("z ; (z-1)"));
  CHECK_FALSE(ls.degenerate);
  REQUIRE(ls.directions.size() == 3);
  CHECK(find_dir(ls, {-1, 0}) != nullptr);
  CHECK(find_dir(ls, {0, -1}) != nullptr);
  const auto* diag = find_dir(ls, {1, 1});
  REQUIRE(diag != nullptr);
  CHECK(diag->direction[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(diag->sources.front().infinite);
}

TEST_CASE("limit directions of the quadratic family merge sources") {
  const auto ls = limit_directions(parse_curve("z ; (z-1)(z+1)"));
  REQUIRE(ls.directions.size() == 3);
  const auto* down = find_dir(ls, {0, -1});
  REQUIRE(down != nullptr);
  CHECK(down->sources.size() == 2);  // both unit roots
  const auto* inf = find_dir(ls, {1, 2});
  REQUIRE(inf != nullptr);
  CHECK(inf->direction[1] == doctest::Approx(2.0 / std::sqrt(5.0)));
}

TEST_CASE("degenerate curves report the two antipodal line directions") {
  const auto ls = limit_directions(parse_curve("z ; z"));
  CHECK(ls.degenerate);
  REQUIRE(ls.directions.size() == 2);
  CHECK(find_dir(ls, {1, 1}) != nullptr);
  CHECK(find_dir(ls, {-1, -1}) != nullptr);
}

TEST_CASE("integer representatives are primitive") {
  // double zero: order vector (2, ...) must reduce by the gcd
  const auto ls = limit_directions(parse_curve("z^2 ; (z-1)"));
  const auto* d = find_dir(ls, {-1, 0});
  REQUIRE(d != nullptr);
  for (const auto& dir : ls.directions) {
    long long g = 0;
    for (long long v : dir.integer_rep) g = std::gcd(g, std::llabs(v));
    CHECK(g == 1);
  }
}

TEST_CASE("direction counts stay within the support bound") {
  for (std::uint64_t seed = 2; seed <= 10; ++seed) {
    const auto f = testgen::random_curve(seed, 2 + static_cast<int>(seed % 3));
    const auto support = singular_support(f);
    const auto ls = limit_directions(f);
    CHECK(ls.directions.size() >= 2);
    CHECK(ls.directions.size() <= support.size() + 1);
  }
}

TEST_CASE("end asymptotes match the predicted directions") {
  const auto f = parse_curve("z ; (z-1)");
  const auto ls = limit_directions(f);
  for (const auto& d : ls.directions) {
    const bool inf = d.sources.front().infinite;
    const auto fit =
        end_asymptote_fit(f, d, inf ? 1e2 : 1e-8, inf ? 1e6 : 1e-2);
    CHECK(fit.angular_residual < 1e-3);
  }

  const auto f2 = parse_curve("z ; (z-1)(z+1)");
  const auto ls2 = limit_directions(f2);
  const auto* inf_dir = find_dir(ls2, {1, 2});
  REQUIRE(inf_dir != nullptr);
  const auto fit = end_asymptote_fit(f2, *inf_dir, 1e2, 1e6);
  CHECK(fit.angular_residual < 1e-3);

  const auto fdiag = parse_curve("z ; z");
  const auto diag = limit_directions(fdiag);
  const auto* up = find_dir(diag, {1, 1});
  REQUIRE(up != nullptr);
  CHECK(end_asymptote_fit(fdiag, *up, 1e2, 1e6).angular_residual < 1e-3);
}

TEST_CASE("asymptote residual improves toward the source") {
  const auto f = parse_curve("z ; (z-1)");
  const auto ls = limit_directions(f);
  const auto* d = find_dir(ls, {-1, 0});
  REQUIRE(d != nullptr);
  const double far = end_asymptote_fit(f, *d, 1e-4, 1e-1).angular_residual;
  const double near = end_asymptote_fit(f, *d, 1e-6, 1e-3).angular_residual;
  CHECK(near <= 10.0 * far);
  CHECK(near < far + 1e-6);
}

TEST_CASE("hausdorff distance on finite sets") {
  CHECK(hausdorff_distance({{0, 0}}, {{3, 4}}) == doctest::Approx(5.0));

  // asymmetric parts: subset direction is zero, the other reaches 1
  CHECK(hausdorff_distance({{0, 0}}, {{0, 0}, {1, 0}}) == doctest::Approx(1.0));

  CHECK(hausdorff_distance({{0, 0}, {10, 0}}, {{0, 1}}) ==
        doctest::Approx(std::sqrt(101.0)));

  CHECK_THROWS_AS(hausdorff_distance({}, {{1, 2}}), std::invalid_argument);
}

TEST_CASE("hausdorff distance is a symmetric pseudometric on finite sets") {
  Rng rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::vector<double>> A, B;
    for (int i = 0; i < 5; ++i) {
      A.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3)});
      B.push_back({rng.uniform(-3, 3), rng.uniform(-3, 3)});
    }
    const double ab = hausdorff_distance(A, B);
    CHECK(ab == hausdorff_distance(B, A));
    CHECK(ab >= 0.0);
    CHECK(hausdorff_distance(A, A) == 0.0);
  }
}
