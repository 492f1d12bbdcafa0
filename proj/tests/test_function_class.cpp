#include <doctest.h>

#include <cmath>
#include <vector>

#include "support.hpp"
#include "truncchain/function_class.hpp"

using namespace truncchain;
using tc_test::code_of;

TEST_CASE("make_class inserts the zero function and deduplicates") {
  auto space = std::make_shared<const DiscreteSpace>(std::vector<double>{0.5, 0.5});
  const auto a = make_class(space, {{1, -1}});
  CHECK(a->size() == 2);
  CHECK(a->row(a->anchor())[0] == 0.0);
  CHECK(a->row(a->anchor())[1] == 0.0);

  const auto b = make_class(space, {{0, 0}, {1, -1}});
  CHECK(b->size() == 2);
  CHECK(b->anchor() == 0);

  const auto c = make_class(space, {{1, -1}, {1, -1}});
  CHECK(c->size() == 2);

  const auto d = make_class(space, {{-0.0, 0.0}, {1, 2}});
  CHECK(d->size() == 2);
  CHECK(d->anchor() == 0);

  CHECK(code_of([&] { make_class(space, {}); }) == ErrorCode::EmptyClass);
  CHECK(code_of([&] { make_class(space, {{1, 2, 3}}); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("pairwise_l2") {
  const auto cls = tc_test::two_point();
  const auto d = pairwise_l2(*cls);
  CHECK(d(0, 1) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(d(1, 0) == d(0, 1));
  CHECK(d(0, 0) == 0.0);

  const auto rnd = tc_test::random_class(3, 10, 6);
  const auto t = pairwise_l2(*rnd);
  for (std::size_t i = 0; i < rnd->size(); ++i) {
    CHECK(t(i, i) == 0.0);
    for (std::size_t j = 0; j < rnd->size(); ++j) {
      CHECK(t(i, j) == t(j, i));
      for (std::size_t k = 0; k < rnd->size(); ++k) CHECK(t(i, k) <= t(i, j) + t(j, k) + 1e-12);
    }
  }
}

TEST_CASE("interval_indicators") {
  const auto two = interval_indicators(2);
  REQUIRE(two->size() == 4);
  const std::vector<std::vector<double>> expected{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  for (std::size_t f = 0; f < 4; ++f) {
    CHECK(std::vector<double>(two->row(f).begin(), two->row(f).end()) == expected[f]);
  }
  CHECK(interval_indicators(3)->size() == 7);
  CHECK(interval_indicators(8)->size() == 37);
  CHECK(code_of([] { interval_indicators(1); }) == ErrorCode::InvalidArgument);

  const std::size_t d = 8;
  const auto cls = interval_indicators(d);
  for (std::size_t f = 0; f < cls->size(); ++f) {
    std::size_t ones = 0;
    for (double v : cls->row(f)) {
      CHECK((v == 0.0 || v == 1.0));
      ones += v == 1.0;
    }
    CHECK(lp_norm(cls->space(), cls->row(f), Norm::L2) ==
          doctest::Approx(std::sqrt(static_cast<double>(ones) / d)).epsilon(1e-14));
  }
}

TEST_CASE("heavy_tail_pair with a single heavy atom") {
  HeavyTailSpec spec;
  spec.atoms = 1;
  const auto pair = heavy_tail_pair(spec);
  CHECK(pair.space->atom_count() == 2);
  CHECK(pair.space->prob(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(pair.space->prob(1) == doctest::Approx(0.5).epsilon(1e-15));
  const auto f = pair.cls->row(1 - pair.cls->anchor());
  CHECK(f[0] == 0.0);
  CHECK(f[1] == 1.0);
}

TEST_CASE("heavy_tail_pair defaults") {
  const HeavyTailSpec spec;
  const auto pair = heavy_tail_pair(spec);
  REQUIRE(pair.space->atom_count() == spec.atoms + 1);
  double total = 0.0;
  for (double p : pair.space->probs()) total += p;
  CHECK(std::abs(total - 1.0) <= 1e-12);
  CHECK(pair.space->prob(0) == doctest::Approx(0.5).epsilon(1e-12));

  // E f^2 over the heavy atoms against the coefficient sum.
  const auto f = pair.cls->row(1 - pair.cls->anchor());
  CompensatedSum second, analytic;
  for (std::size_t k = 1; k <= spec.atoms; ++k) {
    second.add(f[k] * f[k] * pair.space->prob(k));
    analytic.add(spec.a_decay(k) / static_cast<double>(k));
  }
  CHECK(std::abs(second.value() - pair.mass_scale * analytic.value()) <= 1e-10);
  CHECK(f[1] == 1.0);
  for (std::size_t k = 2; k <= spec.atoms; ++k) CHECK_MESSAGE(f[k] >= f[k - 1], k);
}

TEST_CASE("tail functional agrees with the class moments") {
  const HeavyTailSpec spec;
  const auto pair = heavy_tail_pair(spec);
  const auto f = pair.cls->row(1 - pair.cls->anchor());
  for (std::size_t m : {16u, 64u, 256u, 1024u, 4096u, 16384u}) {
    // sqrt(m) E f 1{f > b_m} computed from the space itself.
    CompensatedSum tail;
    for (std::size_t k = 1; k <= spec.atoms; ++k) {
      if (f[k] > f[m]) tail.add(f[k] * pair.space->prob(k));
    }
    const double direct = std::sqrt(static_cast<double>(m)) * tail.value();
    CHECK(heavy_tail_tail_functional(spec, m) == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("heavy_tail_pair argument checks") {
  HeavyTailSpec bad;
  bad.b_exponent = 0.5;
  CHECK(code_of([&] { heavy_tail_pair(bad); }) == ErrorCode::InvalidArgument);
  HeavyTailSpec heavy;
  heavy.mass_scale = 1.0;  // raw mass of k = 1 alone exceeds 2
  CHECK(code_of([&] { heavy_tail_pair(heavy); }) == ErrorCode::MassOverflow);
  HeavyTailSpec power;
  power.a_decay = {CoefficientDecay::Kind::Power, 0.0};
  CHECK(code_of([&] { heavy_tail_pair(power); }) == ErrorCode::InvalidArgument);
}
