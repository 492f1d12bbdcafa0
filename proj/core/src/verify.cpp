#include "truncchain/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>
#include <string>

#include "truncchain/error.hpp"
#include "truncchain/parallel.hpp"
#include "truncchain/rng.hpp"

namespace truncchain {

namespace {

constexpr std::uint64_t kOracleStream = 1;
constexpr std::uint64_t kLemmaStream = 2;
constexpr std::uint64_t kGlobalStream = 3;
constexpr std::uint64_t kMaxTermStream = 4;
constexpr std::uint64_t kCltStream = 5;
constexpr std::uint64_t kOscillationStream = 6;
constexpr std::uint64_t kSupStream = 7;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::vector<std::uint32_t> replicate_counts(const DiscreteSpace& space, std::size_t n,
                                            std::uint64_t seed, std::uint64_t stream,
                                            std::size_t r) {
  return atom_counts(space, draw_sample(space, n, derive_seed(seed, stream, r)));
}

EstimatorConfig with_n(EstimatorConfig config, std::size_t n) {
  config.n = n;
  config.validate();
  return config;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

void SweepReport::add_metric(std::string name, std::vector<double> values) {
  metrics.emplace_back(std::move(name), std::move(values));
}

const std::vector<double>& SweepReport::metric(const std::string& name) const {
  for (const auto& [key, values] : metrics) {
    if (key == name) return values;
  }
  throw Error(ErrorCode::InvalidArgument, "no metric named " + name);
}

void SweepReport::validate() const {
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (!(axis[i] > axis[i - 1])) throw Error(ErrorCode::InvalidArgument, "axis must strictly increase");
  }
  for (const auto& [key, values] : metrics) {
    if (values.size() != axis.size()) {
      throw Error(ErrorCode::InvalidArgument, "metric " + key + " does not match the axis length");
    }
  }
}

std::string SweepReport::to_csv() const {
  std::string out = axis_name;
  for (const auto& m : metrics) out += "," + m.first;
  out += '\n';
  for (std::size_t i = 0; i < axis.size(); ++i) {
    out += fmt(axis[i]);
    for (const auto& m : metrics) out += "," + fmt(m.second[i]);
    out += '\n';
  }
  return out;
}

std::string CltReport::to_csv() const {
  const std::size_t d = functions.size();
  std::string out = "function,ks_statistic,ks_critical,target_variance,empirical_variance\n";
  for (std::size_t i = 0; i < d; ++i) {
    out += std::to_string(functions[i]) + "," + fmt(ks_statistics[i]) + "," + fmt(ks_critical) +
           "," + fmt(target_covariance[i * d + i]) + "," + fmt(empirical_covariance[i * d + i]) +
           '\n';
  }
  return out;
}

ExactDistribution enumeration_oracle(const ChainDecomposition& decomp, std::size_t f,
                                     const EstimatorConfig& config) {
  config.validate();
  const DiscreteSpace& space = decomp.cls().space();
  const std::size_t atoms = space.atom_count();
  const std::size_t n = config.n;
  if (std::pow(static_cast<double>(atoms), static_cast<double>(n)) > kEnumerationLimit) {
    throw Error(ErrorCode::TooLarge, std::to_string(atoms) + "^" + std::to_string(n) +
                                         " samples exceed the enumeration limit");
  }
  const ModifiedProcess mp(decomp, config);

  std::vector<std::size_t> live;
  for (std::size_t a = 0; a < atoms; ++a) {
    if (space.prob(a) > 0.0) live.push_back(a);
  }
  std::map<double, CompensatedSum> cells;
  std::vector<std::size_t> digit(n, 0);
  std::vector<std::uint32_t> counts(atoms, 0);
  counts[live[0]] = static_cast<std::uint32_t>(n);
  while (true) {
    double w = 1.0;
    for (auto d : digit) w *= space.prob(live[d]);
    cells[mp.empirical_mean(f, counts)].add(w);

    std::size_t pos = 0;
    while (pos < n) {
      --counts[live[digit[pos]]];
      if (++digit[pos] < live.size()) {
        ++counts[live[digit[pos]]];
        break;
      }
      digit[pos] = 0;
      ++counts[live[0]];
      ++pos;
    }
    if (pos == n) break;
  }

  ExactDistribution out;
  CompensatedSum mean;
  for (const auto& [value, weight] : cells) {
    out.support.push_back(value);
    out.probs.push_back(weight.value());
    mean.add(value * weight.value());
  }
  out.mean = mean.value();
  return out;
}

OracleAgreement oracle_agreement(const ChainDecomposition& decomp, std::size_t f,
                                 const EstimatorConfig& config, std::size_t replicates,
                                 std::uint64_t seed, unsigned threads) {
  if (replicates == 0) throw Error(ErrorCode::InvalidArgument, "replicates must be at least 1");
  const ExactDistribution exact = enumeration_oracle(decomp, f, config);
  const ModifiedProcess mp(decomp, config);
  const DiscreteSpace& space = decomp.cls().space();
  const std::size_t k = exact.support.size();

  std::vector<std::size_t> cell(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) {
    const auto counts = replicate_counts(space, config.n, seed, kOracleStream, r);
    const double v = mp.empirical_mean(f, counts);
    const auto it = std::lower_bound(exact.support.begin(), exact.support.end(), v);
    cell[r] = (it != exact.support.end() && *it == v)
                  ? static_cast<std::size_t>(it - exact.support.begin())
                  : k;
  });

  std::vector<std::size_t> hits(k + 1, 0);
  for (auto c : cell) ++hits[c];
  OracleAgreement out;
  out.replicates = replicates;
  const double R = static_cast<double>(replicates);
  out.stray_mass = static_cast<double>(hits[k]) / R;
  out.pass = hits[k] == 0;
  for (std::size_t i = 0; i < k; ++i) {
    OracleCell c;
    c.value = exact.support[i];
    c.exact = exact.probs[i];
    c.empirical = static_cast<double>(hits[i]) / R;
    c.tolerance = 4.0 * std::sqrt(c.exact * (1.0 - c.exact) / R);
    if (std::abs(c.empirical - c.exact) > c.tolerance) out.pass = false;
    out.cells.push_back(c);
  }
  return out;
}

SweepReport lemma21_coverage(const ChainDecomposition& decomp, std::size_t s,
                             std::vector<double> u_grid, std::size_t n, std::size_t replicates,
                             std::uint64_t seed, const ChainConstants& constants,
                             unsigned threads) {
  const auto t0 = Clock::now();
  if (s < 1 || s > decomp.s_max()) {
    throw Error(ErrorCode::LevelOutOfRange, "level " + std::to_string(s));
  }
  if (replicates == 0) throw Error(ErrorCode::InvalidArgument, "replicates must be at least 1");
  for (double u : u_grid) {
    if (!(u > 0.5)) throw Error(ErrorCode::BadU, "u must exceed 1/2, got " + short_fmt(u));
  }
  const DiscreteSpace& space = decomp.cls().space();
  const std::size_t atoms = decomp.atom_count();
  const double root_n = std::sqrt(static_cast<double>(n));
  const double level_scale = std::pow(2.0, 0.5 * static_cast<double>(s));

  // Truncated distinct increments with their exact means and scale.
  struct Increment {
    std::vector<double> truncated;
    double mean;
    double scale;
  };
  std::vector<Increment> incs;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t f = 0; f < decomp.size(); ++f) {
    if (!seen.emplace(decomp.pi(s, f), decomp.pi(s - 1, f)).second) continue;
    const double norm = decomp.l2_norm(s, f);
    if (norm == 0.0) continue;
    const double lambda = constants.c0 * root_n * norm / level_scale;
    Increment inc;
    inc.truncated.assign(atoms, 0.0);
    const auto d = decomp.increment(s, f);
    for (std::size_t a = 0; a < atoms; ++a) {
      if (std::abs(d[a]) <= lambda) inc.truncated[a] = d[a];
    }
    inc.mean = expectation(space, inc.truncated);
    inc.scale = level_scale * norm / root_n;
    incs.push_back(std::move(inc));
  }

  std::vector<double> worst(replicates, 0.0);
  parallel_for(replicates, threads, [&](std::size_t r) {
    const auto counts = replicate_counts(space, n, seed, kLemmaStream, r);
    double m = 0.0;
    for (const auto& inc : incs) {
      double sum = 0.0;
      for (std::size_t a = 0; a < atoms; ++a) {
        if (counts[a] != 0) sum += static_cast<double>(counts[a]) * inc.truncated[a];
      }
      m = std::max(m, std::abs(sum / static_cast<double>(n) - inc.mean) / inc.scale);
    }
    worst[r] = m;
  });

  SweepReport report;
  report.axis_name = "u";
  report.axis = u_grid;
  std::vector<double> violation, bound, closed;
  for (double u : u_grid) {
    std::size_t k = 0;
    for (double w : worst) k += w > constants.c3 * u ? 1 : 0;
    violation.push_back(static_cast<double>(k) / static_cast<double>(replicates));
    const auto b = level_deviation_bound(u, s, n, constants);
    bound.push_back(b.failure_probability);
    closed.push_back(b.closed_form_probability);
  }
  report.add_metric("violation_rate", std::move(violation));
  report.add_metric("bound", std::move(bound));
  report.add_metric("closed_form", std::move(closed));
  report.metadata = {{"s", std::to_string(s)},
                     {"n", std::to_string(n)},
                     {"replicates", std::to_string(replicates)},
                     {"seed", std::to_string(seed)},
                     {"c0", fmt(constants.c0)},
                     {"c3", fmt(constants.c3)},
                     {"c2", fmt(constants.level_c2())},
                     {"distinct_increments", std::to_string(incs.size())}};
  report.validate();
  report.wall_seconds = seconds_since(t0);
  return report;
}

GlobalCoverage global_coverage(const AdmissibleSequence& seq, double u, std::size_t n,
                               std::size_t replicates, std::uint64_t seed,
                               const ChainConstants& constants, unsigned threads) {
  if (replicates == 0) throw Error(ErrorCode::InvalidArgument, "replicates must be at least 1");
  GlobalCoverage out;
  out.gamma2 = gamma_functional(seq, 2);
  out.bound = global_deviation_bound(u, out.gamma2, n, constants);
  out.advertised = deviation_success_probability(u, 0, seq.s_max(), constants);

  const ChainDecomposition decomp(seq);
  EstimatorConfig config;
  config.c0 = constants.c0;
  config.n = n;
  const ModifiedProcess mp(decomp, config);
  const DiscreteSpace& space = seq.cls().space();
  out.sup_deviation.assign(replicates, 0.0);
  parallel_for(replicates, threads, [&](std::size_t r) {
    const auto counts = replicate_counts(space, n, seed, kGlobalStream, r);
    double m = 0.0;
    for (std::size_t f = 0; f < mp.size(); ++f) {
      m = std::max(m, std::abs(mp.empirical_mean(f, counts) - mp.mean(f)));
    }
    out.sup_deviation[r] = m;
  });
  std::size_t ok = 0;
  for (double v : out.sup_deviation) ok += v <= out.bound ? 1 : 0;
  out.success_rate = static_cast<double>(ok) / static_cast<double>(replicates);
  return out;
}

MonteCarloEstimate empirical_sup_deviation(const FunctionClass& cls, std::size_t n,
                                           std::size_t replicates, std::uint64_t seed,
                                           unsigned threads) {
  if (replicates == 0) throw Error(ErrorCode::InvalidArgument, "replicates must be at least 1");
  std::vector<double> sups(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) {
    const auto counts = replicate_counts(cls.space(), n, seed, kSupStream, r);
    double m = 0.0;
    for (std::size_t f = 0; f < cls.size(); ++f) {
      const auto row = cls.row(f);
      double sum = 0.0;
      for (std::size_t a = 0; a < counts.size(); ++a) {
        if (counts[a] != 0) sum += static_cast<double>(counts[a]) * row[a];
      }
      m = std::max(m, std::abs(sum / static_cast<double>(n) - cls.means()[f]));
    }
    sups[r] = m;
  });
  MonteCarloEstimate out;
  out.replicates = replicates;
  CompensatedSum sum;
  for (double v : sups) sum.add(v);
  out.mean = sum.value() / static_cast<double>(replicates);
  if (replicates > 1) {
    CompensatedSum sq;
    for (double v : sups) sq.add((v - out.mean) * (v - out.mean));
    out.std_error = std::sqrt(sq.value() / static_cast<double>(replicates - 1) /
                              static_cast<double>(replicates));
  }
  return out;
}

SweepReport bias_sweep(const ChainDecomposition& decomp, std::vector<std::size_t> n_grid,
                       const EstimatorConfig& config) {
  const auto t0 = Clock::now();
  SweepReport report;
  report.axis_name = "n";
  std::vector<double> bias, identity;
  for (auto n : n_grid) {
    const auto cfg = with_n(config, n);
    report.axis.push_back(static_cast<double>(n));
    bias.push_back(exact_bias(decomp, cfg).scaled_sup_bias);
    identity.push_back(identity_regime(decomp, cfg) ? 1.0 : 0.0);
  }
  report.add_metric("scaled_sup_bias", std::move(bias));
  report.add_metric("identity_regime", std::move(identity));
  report.metadata = {{"c0", fmt(config.c0)}};
  report.validate();
  report.wall_seconds = seconds_since(t0);
  return report;
}

SweepReport l2_and_maxterm_sweep(const ChainDecomposition& decomp, std::size_t f,
                                 std::vector<std::size_t> n_grid, const EstimatorConfig& config,
                                 std::size_t replicates, std::uint64_t seed, unsigned threads) {
  const auto t0 = Clock::now();
  if (replicates < 2) throw Error(ErrorCode::InvalidArgument, "replicates must be at least 2");
  const DiscreteSpace& space = decomp.cls().space();
  const auto target = decomp.cls().row(f);
  SweepReport report;
  report.axis_name = "n";
  std::vector<double> gap, maxterm, maxterm_se;
  for (auto n : n_grid) {
    const auto cfg = with_n(config, n);
    const ModifiedFunction mf = phi(decomp, f, cfg);
    std::vector<double> diff(mf.values.size());
    std::vector<double> squares(mf.values.size());
    for (std::size_t a = 0; a < diff.size(); ++a) {
      diff[a] = mf.values[a] - target[a];
      squares[a] = mf.values[a] * mf.values[a];
    }
    std::vector<double> terms(replicates);
    parallel_for(replicates, threads, [&](std::size_t r) {
      const Sample sample = draw_sample(space, n, derive_seed(seed, kMaxTermStream, r));
      double m = 0.0;
      for (auto i : sample.indices) m = std::max(m, squares[i]);
      terms[r] = m / static_cast<double>(n);
    });
    CompensatedSum sum;
    for (double t : terms) sum.add(t);
    const double mean = sum.value() / static_cast<double>(replicates);
    CompensatedSum sq;
    for (double t : terms) sq.add((t - mean) * (t - mean));
    report.axis.push_back(static_cast<double>(n));
    gap.push_back(lp_norm(space, diff, Norm::L2));
    maxterm.push_back(mean);
    maxterm_se.push_back(std::sqrt(sq.value() / static_cast<double>(replicates - 1) /
                                   static_cast<double>(replicates)));
  }
  report.add_metric("l2_gap", std::move(gap));
  report.add_metric("max_term", std::move(maxterm));
  report.add_metric("max_term_se", std::move(maxterm_se));
  report.metadata = {{"function", std::to_string(f)},
                     {"replicates", std::to_string(replicates)},
                     {"seed", std::to_string(seed)}};
  report.validate();
  report.wall_seconds = seconds_since(t0);
  return report;
}

double kolmogorov_cdf(double x) {
  if (!(x > 0.0)) return 0.0;
  constexpr double pi = std::numbers::pi;
  if (x < 1.0) {
    // Jacobi-transformed series, fast for small x.
    double sum = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double m = 2.0 * k - 1.0;
      const double term = std::exp(-m * m * pi * pi / (8.0 * x * x));
      sum += term;
      if (term < 1e-300) break;
    }
    return std::sqrt(2.0 * pi) / x * sum;
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-300) break;
  }
  return 1.0 - 2.0 * sum;
}

double kolmogorov_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile needs 0 < p < 1");
  double lo = 0.0, hi = 10.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double ks_critical_value(double alpha, std::size_t replicates) {
  if (replicates == 0) throw Error(ErrorCode::InvalidArgument, "no replicates");
  return kolmogorov_quantile(1.0 - alpha) / std::sqrt(static_cast<double>(replicates));
}

double ks_statistic(std::vector<double>& data, const std::function<double(double)>& cdf) {
  if (data.empty()) throw Error(ErrorCode::InvalidArgument, "KS statistic of an empty sample");
  std::sort(data.begin(), data.end());
  const double n = static_cast<double>(data.size());
  double d = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double F = cdf(data[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

CltReport clt_test(const ChainDecomposition& decomp, std::vector<std::size_t> subset,
                   const EstimatorConfig& config, std::size_t replicates, std::uint64_t seed,
                   unsigned threads) {
  config.validate();
  if (replicates < 100) throw Error(ErrorCode::InvalidArgument, "CLT test needs at least 100 replicates");
  if (subset.empty() || subset.size() > 5) {
    throw Error(ErrorCode::InvalidArgument, "CLT subset must hold 1 to 5 functions");
  }
  const GaussianModel model = build_model(decomp.cls(), subset, CovarianceMode::Bridge);
  const std::size_t d = subset.size();
  for (std::size_t i = 0; i < d; ++i) {
    if (!(model.cov(i, i) > 1e-14)) {
      throw Error(ErrorCode::DegenerateTarget,
                  "function " + std::to_string(subset[i]) + " has zero Bridge variance");
    }
  }
  const ModifiedProcess mp(decomp, config);
  const DiscreteSpace& space = decomp.cls().space();

  std::vector<double> draws(replicates * d);
  parallel_for(replicates, threads, [&](std::size_t r) {
    const auto counts = replicate_counts(space, config.n, seed, kCltStream, r);
    for (std::size_t i = 0; i < d; ++i) draws[r * d + i] = mp.centered(subset[i], counts);
  });

  CltReport out;
  out.functions = subset;
  out.replicates = replicates;
  out.ks_critical = ks_critical_value(kCltAlpha, replicates);
  out.target_covariance.assign(model.covariance().begin(), model.covariance().end());
  const double R = static_cast<double>(replicates);
  std::vector<double> means(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    CompensatedSum s;
    for (std::size_t r = 0; r < replicates; ++r) s.add(draws[r * d + i]);
    means[i] = s.value() / R;
  }
  out.empirical_covariance.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      CompensatedSum s;
      for (std::size_t r = 0; r < replicates; ++r) {
        s.add((draws[r * d + i] - means[i]) * (draws[r * d + j] - means[j]));
      }
      out.empirical_covariance[i * d + j] = s.value() / (R - 1.0);
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double scale = std::sqrt(model.cov(i, i) * model.cov(j, j));
      out.cov_error = std::max(
          out.cov_error, std::abs(out.empirical_covariance[i * d + j] - model.cov(i, j)) / scale);
    }
  }
  bool ks_ok = true;
  for (std::size_t i = 0; i < d; ++i) {
    const double sd = std::sqrt(model.cov(i, i));
    std::vector<double> z(replicates);
    for (std::size_t r = 0; r < replicates; ++r) z[r] = draws[r * d + i] / sd;
    out.ks_statistics.push_back(ks_statistic(z, normal_cdf));
    ks_ok = ks_ok && out.ks_statistics.back() < out.ks_critical;
  }
  out.pass = ks_ok && out.cov_error < kCltCovTolerance;
  return out;
}

SweepReport oscillation_sweep(const ChainDecomposition& decomp, std::vector<double> delta_grid,
                              std::vector<std::size_t> n_grid, double eta,
                              const EstimatorConfig& config, std::size_t replicates,
                              std::uint64_t seed, unsigned threads) {
  const auto t0 = Clock::now();
  if (!(eta > 0.0)) throw Error(ErrorCode::InvalidArgument, "eta must be positive");
  if (replicates == 0) throw Error(ErrorCode::InvalidArgument, "replicates must be at least 1");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) throw Error(ErrorCode::InvalidArgument, "n grid must increase");
  }
  const FunctionClass& cls = decomp.cls();
  const DistanceTable dist = pairwise_l2(cls);
  struct Pair {
    double d;
    std::size_t i, j;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < cls.size(); ++i) {
    for (std::size_t j = i + 1; j < cls.size(); ++j) pairs.push_back({dist(i, j), i, j});
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.d < b.d; });
  // Pairs with ||f - g|| < delta form the prefix of length cut[k].
  std::vector<std::size_t> cut;
  for (double delta : delta_grid) {
    cut.push_back(static_cast<std::size_t>(
        std::lower_bound(pairs.begin(), pairs.end(), delta,
                         [](const Pair& p, double v) { return p.d < v; }) -
        pairs.begin()));
  }

  SweepReport report;
  report.axis_name = "delta";
  report.axis = delta_grid;
  const std::size_t nd = delta_grid.size();
  for (auto n : n_grid) {
    const ModifiedProcess mp(decomp, with_n(config, n));
    const double root_n = std::sqrt(static_cast<double>(n));
    std::vector<std::uint8_t> exceed(replicates * nd, 0);
    parallel_for(replicates, threads, [&](std::size_t r) {
      const auto counts = replicate_counts(cls.space(), n, seed, kOscillationStream, r);
      std::vector<double> q(mp.size());
      for (std::size_t f = 0; f < mp.size(); ++f) {
        q[f] = root_n * (mp.empirical_mean(f, counts) - mp.phi_mean(f));
      }
      double running = 0.0;
      std::size_t p = 0;
      for (std::size_t k = 0; k < nd; ++k) {
        for (; p < cut[k]; ++p) running = std::max(running, std::abs(q[pairs[p].i] - q[pairs[p].j]));
        exceed[r * nd + k] = running > eta ? 1 : 0;
      }
    });
    std::vector<double> series(nd, 0.0);
    for (std::size_t k = 0; k < nd; ++k) {
      std::size_t hits = 0;
      for (std::size_t r = 0; r < replicates; ++r) hits += exceed[r * nd + k];
      series[k] = static_cast<double>(hits) / static_cast<double>(replicates);
    }
    report.add_metric("n=" + std::to_string(n), std::move(series));
  }
  report.metadata = {{"eta", fmt(eta)},
                     {"replicates", std::to_string(replicates)},
                     {"seed", std::to_string(seed)},
                     {"pairs", std::to_string(pairs.size())}};
  report.validate();
  report.wall_seconds = seconds_since(t0);
  return report;
}

OscillationOrdering oscillation_ordering(const SweepReport& report, double limit) {
  report.validate();
  if (report.axis.empty() || report.metrics.empty()) {
    throw Error(ErrorCode::InvalidArgument, "oscillation report is empty");
  }
  OscillationOrdering out;
  out.monotone = true;
  for (const auto& [name, series] : report.metrics) {
    for (std::size_t k = 1; k < series.size(); ++k) out.monotone = out.monotone && series[k] >= series[k - 1];
  }
  const auto& last = report.metrics.back().second;
  out.small_delta = last.front();
  out.large_delta = last.back();
  out.pass = out.monotone && out.small_delta <= out.large_delta && out.small_delta < limit &&
             out.large_delta < limit;
  return out;
}

const char* to_string(Growth g) noexcept {
  switch (g) {
    case Growth::Bounded:
      return "BOUNDED";
    case Growth::Diverging:
      return "DIVERGING";
    case Growth::Indeterminate:
      return "INDETERMINATE";
  }
  return "INDETERMINATE";
}

Growth classify_growth(std::span<const double> series) {
  if (series.empty()) return Growth::Indeterminate;
  const bool nondecreasing = std::is_sorted(series.begin(), series.end());
  if (nondecreasing && series.back() > 0.0 && series.back() >= 5.0 * series.front()) {
    return Growth::Diverging;
  }
  const auto top = series.subspan(series.size() / 2);
  const auto [lo, hi] = std::minmax_element(top.begin(), top.end());
  if (*hi <= 2.0 * *lo) return Growth::Bounded;
  return Growth::Indeterminate;
}

NecessityReport necessity_sweep(const HeavyTailSpec& spec, std::vector<double> b_exponents,
                                std::vector<std::size_t> n_grid) {
  const auto t0 = Clock::now();
  for (double b : b_exponents) {
    if (!(b > 0.0 && b <= 0.5)) {
      throw Error(ErrorCode::InvalidArgument, "b exponent must lie in (0, 1/2], got " + short_fmt(b));
    }
  }
  const HeavyTailPair pair = heavy_tail_pair(spec);
  const ChainDecomposition decomp(build_admissible(pair.cls, Metric::L2));

  NecessityReport out;
  out.mass_scale = pair.mass_scale;
  out.b_exponents = b_exponents;
  out.sweep.axis_name = "n";
  for (auto n : n_grid) out.sweep.axis.push_back(static_cast<double>(n));
  for (double b : b_exponents) {
    EstimatorConfig config;
    config.rule = Universal{b};
    std::vector<double> series;
    for (auto n : n_grid) series.push_back(exact_bias(decomp, with_n(config, n)).scaled_sup_bias);
    out.verdicts.push_back(classify_growth(series));
    out.sweep.add_metric("b=" + short_fmt(b), std::move(series));
  }
  out.sweep.metadata = {{"atoms", std::to_string(spec.atoms)},
                        {"class_b_exponent", fmt(spec.b_exponent)},
                        {"mass_scale", fmt(pair.mass_scale)}};
  out.sweep.validate();
  out.sweep.wall_seconds = seconds_since(t0);
  return out;
}

}  // namespace truncchain
