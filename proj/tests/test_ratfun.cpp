#include <doctest.h>

#include <cmath>
#include <complex>

#include "amoeba/ratfun.hpp"
#include "amoeba/rng.hpp"

using namespace amoeba;

TEST_CASE("parse_component reads factored atoms") {
  const auto c = parse_component("(z-1)^2");
  CHECK(c.constant() == cplx{1.0, 0.0});
  REQUIRE(c.factors().size() == 1);
  CHECK(c.factors()[0].root == cplx{1.0, 0.0});
  CHECK(c.factors()[0].multiplicity == 2);

  const auto d = parse_component("z(z-2i)^-1");
  CHECK(d.constant() == cplx{1.0, 0.0});
  REQUIRE(d.factors().size() == 2);
  CHECK(d.factors()[0].root == cplx{0.0, 0.0});
  CHECK(d.factors()[0].multiplicity == 1);
  CHECK(d.factors()[1].root == cplx{0.0, 2.0});
  CHECK(d.factors()[1].multiplicity == -1);
}

TEST_CASE("parse_component cancels and merges duplicate roots") {
  const auto c = parse_component("3(z+1)(z+1)^-1");
  CHECK(c.constant() == cplx{3.0, 0.0});
  CHECK(c.factors().empty());

  const auto d = parse_component("(z-1)(z-1)");
  REQUIRE(d.factors().size() == 1);
  CHECK(d.factors()[0].multiplicity == 2);
}

TEST_CASE("parse_component error paths") {
  CHECK_THROWS_AS(parse_component(""), parse_error);
  CHECK_THROWS_AS(parse_component("z-1"), parse_error);  // sums are not products
  CHECK_THROWS_AS(parse_component("(w-1)"), parse_error);
  CHECK_THROWS_AS(parse_component("0(z-1)"), parse_error);
  CHECK_THROWS_AS(parse_component("(z-1"), parse_error);

  // byte offsets point at the offending character
  try {
    parse_component("z(q-1)");
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(e.offset() == 2);
  }

  // exponent 0 on a root atom is accepted and dropped
  const auto c = parse_component("z^0 (z-1)");
  REQUIRE(c.factors().size() == 1);
  CHECK(c.factors()[0].root == cplx{1.0, 0.0});

  // distinct roots closer than 1e-12 are rejected
  CHECK_THROWS_AS(parse_component("(z-1)(z-1.0000000000001)"),
                  std::invalid_argument);
}

TEST_CASE("complex literals") {
  CHECK(parse_component("2+3i").constant() == cplx{2.0, 3.0});
  CHECK(parse_component("-1.5").constant() == cplx{-1.5, 0.0});
  CHECK(parse_component("3i").constant() == cplx{0.0, 3.0});
  CHECK(parse_component("i").constant() == cplx{0.0, 1.0});
  CHECK(parse_component("(z-1+2i)").factors()[0].root == cplx{1.0, -2.0});
  CHECK(parse_component("2^3").constant() == cplx{8.0, 0.0});
}

TEST_CASE("eval matches the factored product") {
  CHECK(eval(parse_component("z"), cplx{2.0, 0.0}) == cplx{2.0, 0.0});
  CHECK(eval(parse_component("(z-1)^2"), cplx{3.0, 0.0}) == cplx{4.0, 0.0});
  try {
    eval(parse_component("(z-1)^-1"), cplx{1.0, 0.0});
    FAIL("expected pole error");
  } catch (const domain_error& e) {
    CHECK(e.where() == cplx{1.0, 0.0});
  }
}

TEST_CASE("log_derivative is the partial-fraction sum") {
  CHECK(log_derivative(parse_component("z"), cplx{2.0, 0.0}) == cplx{0.5, 0.0});
  CHECK(log_derivative(parse_component("(z-1)^2"), cplx{0.0, 0.0}) ==
        cplx{-2.0, 0.0});

  // z(z-1) at 2: 1/2 + 1/1, cross-checked by finite differences of log f
  const auto c = parse_component("z(z-1)");
  const cplx z{2.0, 0.0};
  const cplx got = log_derivative(c, z);
  CHECK(std::abs(got - cplx{1.5, 0.0}) < 1e-15);
  const double h = 1e-6;
  const cplx fd = std::log(eval(c, z + h) / eval(c, z - h)) / (2.0 * h);
  CHECK(std::abs(got - fd) / std::abs(got) < 1e-8);

  CHECK_THROWS_AS(log_derivative(c, cplx{1.0, 0.0}), domain_error);
}

TEST_CASE("log_derivative agrees with finite differences at random points") {
  Rng rng(7);
  const auto c = parse_component("2i z^2 (z-1)^-1 (z+2i)^3 (z-3.5)");
  int checked = 0;
  while (checked < 100) {
    const cplx z{rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0)};
    bool near_root = false;
    for (const auto& f : c.factors())
      if (std::abs(z - f.root) < 1e-2) near_root = true;
    if (near_root) continue;
    ++checked;
    const double h = 1e-7;
    const cplx fd = std::log(eval(c, z + h) / eval(c, z - h)) / (2.0 * h);
    const cplx got = log_derivative(c, z);
    CHECK(std::abs(got - fd) / std::abs(got) < 1e-6);
  }
}

TEST_CASE("order_at finite and infinite") {
  const auto c = parse_component("z(z-2i)^-1");
  CHECK(order_at(c, ExtendedPoint::finite(cplx{0.0, 0.0})) == 1);
  CHECK(order_at(c, ExtendedPoint::infinity()) == 0);
  CHECK(order_at(parse_component("(z-1)^2"), ExtendedPoint::finite(cplx{5.0, 0.0})) == 0);
}

TEST_CASE("order balance: orders over all roots cancel the order at infinity") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Factor> factors;
    const int nf = 1 + static_cast<int>(rng.next_u64() % 4);
    for (int i = 0; i < nf; ++i)
      factors.push_back(Factor{cplx{rng.uniform(-2, 2), rng.uniform(-2, 2)},
                               static_cast<int>(rng.next_u64() % 5) - 2});
    RationalComponent c(cplx{1.0, 1.0}, factors);
    int total = 0;
    for (const auto& f : c.factors())
      total += order_at(c, ExtendedPoint::finite(f.root));
    CHECK(total == -order_at(c, ExtendedPoint::infinity()));
  }
}

TEST_CASE("pole_zero_count sums absolute multiplicities") {
  CHECK(pole_zero_count(parse_component("z")) == 1);
  CHECK(pole_zero_count(parse_component("(z-1)^2(z+1)^-1")) == 3);
  CHECK(pole_zero_count(parse_component("5")) == 0);
}

TEST_CASE("singular_support collects roots over components") {
  auto support = singular_support(parse_curve("z ; (z-1)"));
  REQUIRE(support.size() == 2);
  CHECK(support[0] == cplx{0.0, 0.0});
  CHECK(support[1] == cplx{1.0, 0.0});

  support = singular_support(parse_curve("z ; (z-1)(z+1)"));
  REQUIRE(support.size() == 3);
  CHECK(support[0] == cplx{-1.0, 0.0});

  support = singular_support(parse_curve("z ; (z+1) ; (z-2i)"));
  REQUIRE(support.size() == 3);
  CHECK(support[2] == cplx{0.0, 2.0});
}

TEST_CASE("eval is nonzero away from roots") {
  Rng rng(13);
  const auto c = parse_component("-2(z-1)^2(z+1)^-3 z");
  for (int i = 0; i < 50; ++i) {
    const cplx z{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    bool at_root = false;
    for (const auto& f : c.factors())
      if (z == f.root) at_root = true;
    if (at_root) continue;
    CHECK(std::abs(eval(c, z)) > 0.0);
  }
}

TEST_CASE("serialize round trips canonical forms") {
  for (const char* text : {"z", "(z-1)^2", "z(z-2i)^-1", "3", "-1.5z^3",
                            "(z+1)(z-1)", "2+3i", "(z-0.5+0.25i)^-2z"}) {
    const auto c = parse_component(text);
    const std::string canon = serialize(c);
    const auto back = parse_component(canon);
    CHECK(back == c);
    CHECK(serialize(back) == canon);
  }
}

TEST_CASE("curve JSON round trips bit-exactly") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<RationalComponent> comps;
    for (int j = 0; j < 2 + static_cast<int>(rng.next_u64() % 2); ++j) {
      std::vector<Factor> factors;
      const int nf = 1 + static_cast<int>(rng.next_u64() % 3);
      for (int i = 0; i < nf; ++i)
        factors.push_back(
            Factor{cplx{rng.uniform(-1, 1) / 3.0, rng.uniform(-1, 1) * 1e-3},
                   1 + static_cast<int>(rng.next_u64() % 3)});
      comps.emplace_back(cplx{rng.uniform(0.1, 2.0), rng.uniform(-1.0, 1.0)},
                         factors);
    }
    const RationalCurve f(comps);
    const std::string dumped = to_json(f).dump();
    const RationalCurve back = curve_from_json(nlohmann::json::parse(dumped));
    REQUIRE(back.components().size() == f.components().size());
    for (std::size_t j = 0; j < f.components().size(); ++j)
      CHECK(back.components()[j] == f.components()[j]);
  }
}

TEST_CASE("parse_curve needs two components and tracks offsets") {
  CHECK_THROWS_AS(parse_curve("z"), std::invalid_argument);
  try {
    parse_curve("z ; (q-1)");
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(e.offset() >= 5);  // offset within the full curve string
  }
}
