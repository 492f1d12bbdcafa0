#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "support.hpp"
#include "truncchain/verify.hpp"

using namespace truncchain;
using tc_test::code_of;

namespace {

EstimatorConfig sqrt_n(std::size_t n) {
  EstimatorConfig c;
  c.n = n;
  return c;
}

ChainDecomposition decomp_of(const ClassPtr& cls) {
  return ChainDecomposition(build_admissible(cls, Metric::L2));
}

}  // namespace

TEST_CASE("oracle on a single draw is the pushforward") {
  const auto cls = tc_test::two_point();
  const auto dec = decomp_of(cls);
  const auto dist = enumeration_oracle(dec, 1, sqrt_n(1));
  // Phi_1(f) = (0, -1).
  REQUIRE(dist.support.size() == 2);
  CHECK(dist.support[0] == -1.0);
  CHECK(dist.probs[0] == 0.75);
  CHECK(dist.support[1] == 0.0);
  CHECK(dist.probs[1] == 0.25);
}

TEST_CASE("oracle on two fair atoms") {
  auto space = std::make_shared<const DiscreteSpace>(std::vector<double>{0.5, 0.5});
  const auto cls = make_class(space, {{1, -1}});
  const auto dec = decomp_of(cls);
  const std::size_t f = 1 - cls->anchor();
  CHECK(identity_regime(dec, sqrt_n(2)));
  const auto dist = enumeration_oracle(dec, f, sqrt_n(2));
  CHECK(dist.support == std::vector<double>{-1.0, 0.0, 1.0});
  CHECK(dist.probs == std::vector<double>{0.25, 0.5, 0.25});

  // The four outcomes through modified_process: sqrt(2) * mean.
  for (std::uint32_t a = 0; a < 2; ++a) {
    for (std::uint32_t b = 0; b < 2; ++b) {
      Sample s;
      s.indices = {a, b};
      s.space_id = space->id();
      const double q = modified_process(s, dec, f, sqrt_n(2));
      const double mean = (cls->value(f, a) + cls->value(f, b)) / 2;
      CHECK(q == doctest::Approx(std::sqrt(2.0) * mean));
      CHECK(std::find(dist.support.begin(), dist.support.end(), mean) != dist.support.end());
    }
  }
}

TEST_CASE("oracle mean equals E Phi on random configs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto cls = tc_test::random_class(seed + 40, 3 + seed % 6, 2 + seed % 3);
    const auto dec = decomp_of(cls);
    const std::size_t n = 1 + seed % 5;
    const auto cfg = sqrt_n(n);
    for (std::size_t f = 0; f < dec.size(); ++f) {
      const auto dist = enumeration_oracle(dec, f, cfg);
      const double ephi = expectation(cls->space(), phi(dec, f, cfg).values);
      CHECK(std::abs(dist.mean - ephi) <= 1e-12);
      double total = 0.0;
      for (double p : dist.probs) total += p;
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("oracle refuses large enumerations") {
  const auto dec = decomp_of(interval_indicators(10));
  CHECK(code_of([&] { enumeration_oracle(dec, 1, sqrt_n(7)); }) == ErrorCode::TooLarge);
  CHECK_NOTHROW(enumeration_oracle(dec, 1, sqrt_n(6)));
}

TEST_CASE("oracle agreement with Monte Carlo") {
  const auto cls = tc_test::random_class(77, 6, 3);
  const auto dec = decomp_of(cls);
  for (std::size_t f = 0; f < dec.size(); ++f) {
    const auto agree = oracle_agreement(dec, f, sqrt_n(4), 20000, 9);
    CHECK(agree.stray_mass == 0.0);
    CHECK_MESSAGE(agree.pass, f);
  }
}

TEST_CASE("lemma 2.1 coverage") {
  const auto dec = decomp_of(interval_indicators(8));
  const auto rep = lemma21_coverage(dec, 1, {0.55, 0.6, 1.0, 2.0, 4.0, 100.0}, 256, 2000, 3);
  const auto& rate = rep.metric("violation_rate");
  const auto& bound = rep.metric("bound");
  for (std::size_t i = 0; i < rate.size(); ++i) {
    CHECK(rate[i] <= bound[i]);
    if (i > 0) CHECK(rate[i] <= rate[i - 1]);
  }
  CHECK(rate.back() == 0.0);
  CHECK(code_of([&] { lemma21_coverage(dec, 1, {0.4}, 256, 10, 3); }) == ErrorCode::BadU);
  CHECK(code_of([&] { lemma21_coverage(dec, 9, {1.0}, 256, 10, 3); }) == ErrorCode::LevelOutOfRange);

  // Two-point class: violation rate below the level bound.
  const auto two = decomp_of(tc_test::two_point());
  const auto r2 = lemma21_coverage(two, 1, {0.6, 1.0}, 64, 10000, 4);
  for (std::size_t i = 0; i < 2; ++i) CHECK(r2.metric("violation_rate")[i] <= r2.metric("bound")[i]);
}

TEST_CASE("global coverage") {
  const auto seq = build_admissible(interval_indicators(8), Metric::L2);
  const auto cov = global_coverage(seq, 1.0, 1024, 300, 5);
  CHECK(cov.success_rate >= 0.99);
  CHECK(cov.advertised > 0.99);
}

TEST_CASE("bias sweep") {
  const auto cls = interval_indicators(8);
  const auto dec = decomp_of(cls);
  std::size_t n0 = 1;
  for (std::size_t f = 0; f < dec.size(); ++f) n0 = std::max(n0, identity_sample_size(dec, f, 1.0));
  const auto rep = bias_sweep(dec, {1, 2, n0, n0 + 10}, sqrt_n(1));
  CHECK(rep.metric("scaled_sup_bias")[2] == 0.0);
  CHECK(rep.metric("scaled_sup_bias")[3] == 0.0);
  CHECK(rep.metric("identity_regime")[3] == 1.0);
  CHECK(rep.metric("identity_regime")[0] == 0.0);
  CHECK(rep.to_csv().rfind("n,scaled_sup_bias,identity_regime\n1,", 0) == 0);
}

TEST_CASE("L2 gap and max-term sweep") {
  const auto cls = interval_indicators(8);
  const auto dec = decomp_of(cls);
  const auto rep = l2_and_maxterm_sweep(dec, 5, {1, 2, 4, 8, 16, 64, 256}, sqrt_n(1), 200, 8);
  const auto& gap = rep.metric("l2_gap");
  for (std::size_t i = 1; i < gap.size(); ++i) CHECK(gap[i] <= gap[i - 1] + 1e-15);
  CHECK(gap.back() == 0.0);
}

TEST_CASE("Kolmogorov distribution") {
  CHECK(kolmogorov_cdf(0.0) == 0.0);
  CHECK(kolmogorov_cdf(1.0) == doctest::Approx(0.730000).epsilon(1e-4));
  CHECK(kolmogorov_cdf(0.99999) == doctest::Approx(kolmogorov_cdf(1.00001)).epsilon(1e-4));
  CHECK(kolmogorov_quantile(0.99) == doctest::Approx(1.62762).epsilon(1e-5));
  CHECK(kolmogorov_quantile(0.95) == doctest::Approx(1.35810).epsilon(1e-5));
  CHECK(ks_critical_value(0.01, 2000) == doctest::Approx(0.0364).epsilon(1e-3));

  std::vector<double> grid;
  for (int i = 0; i < 100; ++i) grid.push_back((i + 0.5) / 100.0);
  CHECK(ks_statistic(grid, [](double x) { return x; }) == doctest::Approx(0.005));
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
}

TEST_CASE("clt_test") {
  const auto cls = interval_indicators(8);
  const auto dec = decomp_of(cls);
  CHECK(code_of([&] { clt_test(dec, {cls->anchor()}, sqrt_n(64), 200, 1); }) ==
        ErrorCode::DegenerateTarget);
  CHECK(code_of([&] { clt_test(dec, {1}, sqrt_n(64), 50, 1); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { clt_test(dec, {1, 2, 3, 4, 5, 6}, sqrt_n(64), 200, 1); }) ==
        ErrorCode::InvalidArgument);
  const auto rep = clt_test(dec, {1, 5, 20}, sqrt_n(1024), 500, 2);
  CHECK(rep.ks_statistics.size() == 3);
  for (double k : rep.ks_statistics) CHECK(k >= 0.0);
  CHECK(rep.ks_critical == doctest::Approx(1.62762 / std::sqrt(500.0)).epsilon(1e-5));
}

TEST_CASE("standardization divides by the exact standard deviation") {
  const auto cls = tc_test::two_point();
  const auto dec = decomp_of(cls);
  const auto rep = clt_test(dec, {1}, sqrt_n(16), 100, 3);
  CHECK(rep.target_covariance[0] == doctest::Approx(3.0));
}

TEST_CASE("oscillation sweep") {
  const auto cls = interval_indicators(8);
  const auto dec = decomp_of(cls);
  const auto rep = oscillation_sweep(dec, {0.1, 0.3, 0.4, 0.6, 0.9}, {64, 256}, 0.5, sqrt_n(1), 300, 4);
  for (const auto& [name, series] : rep.metrics) {
    CHECK(series[0] == 0.0);  // below the minimal distance sqrt(1/8)
    for (std::size_t i = 1; i < series.size(); ++i) CHECK(series[i] >= series[i - 1]);
  }
  CHECK(rep.to_csv().rfind("delta,n=64,n=256\n", 0) == 0);
}

TEST_CASE("growth classifier") {
  const std::vector<double> up{1, 2, 3, 5, 8};
  const std::vector<double> flat{3, 2, 1.1, 1.0, 1.2, 1.1};
  const std::vector<double> down{10, 5, 2.5, 1.2, 0.6, 0.3};
  const std::vector<double> zero{0, 0, 0, 0};
  CHECK(classify_growth(up) == Growth::Diverging);
  CHECK(classify_growth(flat) == Growth::Bounded);
  CHECK(classify_growth(down) == Growth::Indeterminate);
  CHECK(classify_growth(zero) == Growth::Bounded);
  CHECK(std::string(to_string(Growth::Diverging)) == "DIVERGING");
}

TEST_CASE("necessity sweep") {
  HeavyTailSpec one;
  one.atoms = 1;
  const auto rep = necessity_sweep(one, {0.25, 0.5}, {16, 64, 256});
  for (const auto& [name, series] : rep.sweep.metrics) {
    for (double v : series) CHECK(v == 0.0);
  }
  CHECK(rep.verdicts[0] == Growth::Bounded);
  CHECK(code_of([] { necessity_sweep(HeavyTailSpec{}, {0.6}, {16}); }) == ErrorCode::InvalidArgument);

  const HeavyTailSpec spec;
  std::vector<std::size_t> grid;
  for (std::size_t n = 16; n <= 65536; n *= 2) grid.push_back(n);
  const auto half = necessity_sweep(spec, {0.5}, grid);
  CHECK(half.verdicts[0] == Growth::Bounded);
  CHECK(half.sweep.metrics[0].first == "b=0.5");
}

TEST_CASE("reports do not depend on the thread count") {
  const auto cls = interval_indicators(8);
  const auto dec = decomp_of(cls);
  const auto a = lemma21_coverage(dec, 2, {0.6, 1.0}, 128, 500, 11, {}, 1);
  const auto b = lemma21_coverage(dec, 2, {0.6, 1.0}, 128, 500, 11, {}, 8);
  CHECK(a.to_csv() == b.to_csv());
  const auto c = clt_test(dec, {1, 5}, sqrt_n(256), 300, 11, 1);
  const auto d = clt_test(dec, {1, 5}, sqrt_n(256), 300, 11, 8);
  CHECK(c.to_csv() == d.to_csv());
  CHECK(c.cov_error == d.cov_error);
}

TEST_CASE("SweepReport validation") {
  SweepReport r;
  r.axis_name = "n";
  r.axis = {1, 1};
  CHECK(code_of([&] { r.validate(); }) == ErrorCode::InvalidArgument);
  r.axis = {1, 2};
  r.add_metric("x", {1.0});
  CHECK(code_of([&] { r.validate(); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { r.metric("y"); }) == ErrorCode::InvalidArgument);
}
