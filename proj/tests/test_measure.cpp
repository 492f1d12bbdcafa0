#include <doctest.h>

#include <cmath>
#include <vector>

#include "truncchain/error.hpp"
#include "truncchain/measure.hpp"
#include "truncchain/rng.hpp"
#include "support.hpp"

using namespace truncchain;

using tc_test::code_of;

TEST_CASE("make_space validates weights") {
  CHECK(make_space({0.5, 0.5}).atom_count() == 2);
  CHECK(make_space({0.25, 0.75}).prob(1) == 0.75);
  CHECK(code_of([] { make_space({0.5, 0.6}); }) == ErrorCode::NotNormalized);
  CHECK(code_of([] { make_space({1.5, -0.5}); }) == ErrorCode::NegativeWeight);
  CHECK(code_of([] { make_space({}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("expectation") {
  const auto uniform = make_space({0.5, 0.5});
  const auto skew = make_space({0.25, 0.75});
  CHECK(expectation(uniform, std::vector<double>{1, -1}) == 0.0);
  CHECK(expectation(skew, std::vector<double>{3, -1}) == 0.0);
  CHECK(expectation(make_space({0.1, 0.2, 0.3, 0.4}), std::vector<double>{1, 1, 1, 1}) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(code_of([&] { expectation(skew, std::vector<double>{1}); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("expectation matches long double summation") {
  CounterRng rng(mix64(7));
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t atoms = 1 + rng.below(200);
    std::vector<double> p(atoms), v(atoms);
    long double total = 0;
    for (auto& x : p) total += (x = rng.uniform() + 1e-3);
    for (auto& x : p) x = static_cast<double>(x / total);
    const auto space = make_space(p);
    long double ref = 0;
    for (std::size_t a = 0; a < atoms; ++a) {
      v[a] = (rng.uniform() - 0.3) * 100.0;
      ref += static_cast<long double>(space.prob(a)) * v[a];
    }
    const double got = expectation(space, v);
    CHECK(std::abs(got - static_cast<double>(ref)) <= 1e-12 * std::max(1.0, std::abs(static_cast<double>(ref))));
  }
}

TEST_CASE("lp_norm") {
  const auto skew = make_space({0.25, 0.75});
  const std::vector<double> f{3, -1};
  CHECK(lp_norm(skew, f, Norm::L2) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  CHECK(lp_norm(skew, f, Norm::Linf) == 3.0);
  CHECK(lp_norm(skew, f, Norm::L1) == doctest::Approx(1.5));
  for (auto p : {Norm::L1, Norm::L2, Norm::Linf}) {
    CHECK(lp_norm(skew, std::vector<double>{0, 0}, p) == 0.0);
  }
  // Linf ignores atoms of zero probability.
  CHECK(lp_norm(make_space({1.0, 0.0}), std::vector<double>{1, 50}, Norm::Linf) == 1.0);
  CHECK(code_of([&] { lp_norm(skew, std::vector<double>{1, 2, 3}, Norm::L2); }) ==
        ErrorCode::LengthMismatch);
}

TEST_CASE("L2 triangle inequality on random triples") {
  CounterRng rng(mix64(11));
  const auto space = make_space({0.1, 0.2, 0.3, 0.15, 0.25});
  for (int t = 0; t < 200; ++t) {
    std::vector<double> a(5), b(5), c(5), ab(5), bc(5), ac(5);
    for (int i = 0; i < 5; ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
      c[i] = rng.normal();
      ab[i] = a[i] - b[i];
      bc[i] = b[i] - c[i];
      ac[i] = a[i] - c[i];
    }
    CHECK(lp_norm(space, ac, Norm::L2) <=
          lp_norm(space, ab, Norm::L2) + lp_norm(space, bc, Norm::L2) + 1e-12);
  }
}

TEST_CASE("draw_sample is reproducible") {
  const auto space = make_space({0.1, 0.2, 0.3, 0.4});
  CHECK(draw_sample(space, 0, 1).size() == 0);
  const auto single = make_space({1.0});
  CHECK(draw_sample(single, 5, 99).indices == std::vector<std::uint32_t>(5, 0));
  const auto a = draw_sample(space, 1000, 42);
  const auto b = draw_sample(space, 1000, 42);
  CHECK(a.indices == b.indices);
  CHECK(a.space_id == space.id());
  CHECK(draw_sample(space, 1000, 43).indices != a.indices);
  // A longer sample extends a shorter one drawn with the same seed.
  const auto longer = draw_sample(space, 1500, 42);
  CHECK(std::equal(a.indices.begin(), a.indices.end(), longer.indices.begin()));
}

TEST_CASE("draw_sample frequencies converge") {
  const auto space = make_space({0.1, 0.2, 0.3, 0.4});
  const auto counts = atom_counts(space, draw_sample(space, 100000, 5));
  for (std::size_t a = 0; a < 4; ++a) {
    CHECK(std::abs(counts[a] / 1e5 - space.prob(a)) < 0.01);
  }
}

TEST_CASE("zero-probability atoms are never drawn") {
  const auto space = make_space({0.0, 0.5, 0.0, 0.5, 0.0});
  const auto counts = atom_counts(space, draw_sample(space, 20000, 3));
  CHECK(counts[0] == 0);
  CHECK(counts[2] == 0);
  CHECK(counts[4] == 0);
}

TEST_CASE("atom_counts rejects foreign samples") {
  const auto a = make_space({0.5, 0.5});
  const auto b = make_space({0.25, 0.75});
  const auto s = draw_sample(a, 10, 1);
  CHECK(code_of([&] { atom_counts(b, s); }) == ErrorCode::SpaceMismatch);
}

TEST_CASE("error codes print their names") {
  const Error e(ErrorCode::TooLarge, "x");
  CHECK(std::string(e.what()) == "TooLarge: x");
  CHECK(to_string(ErrorCode::BadU) == "BadU");
}
