#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "truncchain/chaining.hpp"
#include "truncchain/estimator.hpp"
#include "truncchain/function_class.hpp"
#include "truncchain/gaussian.hpp"

namespace truncchain {

/// One or more named series over a strictly increasing axis.
struct SweepReport {
  std::string axis_name;
  std::vector<double> axis;
  std::vector<std::pair<std::string, std::vector<double>>> metrics;
  /// Config snapshot and seeds, as key/value strings.
  std::vector<std::pair<std::string, std::string>> metadata;
  double wall_seconds = 0.0;

  void add_metric(std::string name, std::vector<double> values);
  /// Throws InvalidArgument if missing.
  const std::vector<double>& metric(const std::string& name) const;
  /// Throws InvalidArgument unless the axis strictly increases and every
  /// series matches its length.
  void validate() const;
  /// Header `axis_name,metric...`, one row per axis point, %.17g. Wall time
  /// and metadata are left out so equal inputs give equal bytes.
  std::string to_csv() const;
};

struct CltReport {
  std::vector<std::size_t> functions;
  std::vector<double> ks_statistics;
  double ks_critical = 0.0;
  /// max_ij |C_hat_ij - C_ij| / sqrt(C_ii C_jj).
  double cov_error = 0.0;
  std::vector<double> target_covariance;
  std::vector<double> empirical_covariance;
  std::size_t replicates = 0;
  bool pass = false;

  std::string to_csv() const;
};

// ---------------------------------------------------------------- oracle

/// Exact law of P_n Phi_n(f) as sorted distinct values with probabilities.
struct ExactDistribution {
  std::vector<double> support;
  std::vector<double> probs;
  double mean = 0.0;
};

inline constexpr double kEnumerationLimit = 1e6;

/// Enumerates all atom_count^n ordered samples with product weights.
/// Values come from per-atom counts, so equal multisets give bit-equal
/// values. Throws TooLarge when atom_count^n > 1e6.
ExactDistribution enumeration_oracle(const ChainDecomposition& decomp, std::size_t f,
                                     const EstimatorConfig& config);

struct OracleCell {
  double value = 0.0;
  double exact = 0.0;
  double empirical = 0.0;
  /// 4 sqrt(p (1 - p) / replicates).
  double tolerance = 0.0;
};

struct OracleAgreement {
  std::vector<OracleCell> cells;
  /// Monte Carlo mass landing outside the exact support.
  double stray_mass = 0.0;
  std::size_t replicates = 0;
  bool pass = false;
};

/// Monte Carlo frequencies of each support value against the oracle.
OracleAgreement oracle_agreement(const ChainDecomposition& decomp, std::size_t f,
                                 const EstimatorConfig& config, std::size_t replicates,
                                 std::uint64_t seed, unsigned threads = 0);

// -------------------------------------------------------------- coverage

/// Per u: fraction of replicates in which some distinct increment at level s
/// violates |P_n D' - E D'| <= c3 u 2^{s/2} ||D||_2 / sqrt(n), D' being D
/// truncated at the sqrt-n level. Metrics: violation_rate, bound (union
/// bound), closed_form. Throws BadU for u <= 1/2.
SweepReport lemma21_coverage(const ChainDecomposition& decomp, std::size_t s,
                             std::vector<double> u_grid, std::size_t n, std::size_t replicates,
                             std::uint64_t seed, const ChainConstants& constants = {},
                             unsigned threads = 0);

/// Per replicate sup_f |P_n Phi_n(f) - E f| and how often it stays below
/// global_deviation_bound(u, gamma2).
struct GlobalCoverage {
  double bound = 0.0;
  double gamma2 = 0.0;
  double success_rate = 0.0;
  /// Probability advertised by the union over levels.
  double advertised = 0.0;
  std::vector<double> sup_deviation;
};

GlobalCoverage global_coverage(const AdmissibleSequence& seq, double u, std::size_t n,
                               std::size_t replicates, std::uint64_t seed,
                               const ChainConstants& constants = {}, unsigned threads = 0);

/// Monte Carlo E sup_f |P_n f - E f| for the untruncated process.
MonteCarloEstimate empirical_sup_deviation(const FunctionClass& cls, std::size_t n,
                                           std::size_t replicates, std::uint64_t seed,
                                           unsigned threads = 0);

// ----------------------------------------------------------------- sweeps

/// Exact sqrt(n) sup_f |E Phi_n(f) - E f| per n (config.n is overridden).
/// Metrics: scaled_sup_bias, identity_regime (0/1).
SweepReport bias_sweep(const ChainDecomposition& decomp, std::vector<std::size_t> n_grid,
                       const EstimatorConfig& config);

/// Metrics: l2_gap (exact ||Phi_n(f) - f||_2), max_term (Monte Carlo
/// E max_j Phi_n(f)(X_j)^2 / n) and max_term_se.
SweepReport l2_and_maxterm_sweep(const ChainDecomposition& decomp, std::size_t f,
                                 std::vector<std::size_t> n_grid, const EstimatorConfig& config,
                                 std::size_t replicates, std::uint64_t seed, unsigned threads = 0);

/// Asymptotic Kolmogorov distribution P(sqrt(N) D_N <= x).
double kolmogorov_cdf(double x);
/// Its quantile, by bisection.
double kolmogorov_quantile(double p);
/// Asymptotic one-sample critical value at level alpha for N observations.
double ks_critical_value(double alpha, std::size_t replicates);
/// sup_x |F_N(x) - cdf(x)|; sorts `data` in place.
double ks_statistic(std::vector<double>& data, const std::function<double(double)>& cdf);
double normal_cdf(double x);

inline constexpr double kCltAlpha = 0.01;
inline constexpr double kCltCovTolerance = 0.1;

/// Replicates of (sqrt(n) (P_n Phi_n(f_i) - E f_i))_i against the exact Bridge
/// covariance. Up to five functions; replicates >= 100. Throws
/// DegenerateTarget if some f_i has zero Bridge variance.
CltReport clt_test(const ChainDecomposition& decomp, std::vector<std::size_t> subset,
                   const EstimatorConfig& config, std::size_t replicates, std::uint64_t seed,
                   unsigned threads = 0);

/// Axis delta; one metric per n named "n=<n>": fraction of replicates with
/// sup over pairs ||f - g||_2 < delta of |Q_n(Phi_n(f)) - Q_n(Phi_n(g))| > eta,
/// where Q_n = sqrt(n) (P_n - P). Replicate r uses the same draws for every delta.
SweepReport oscillation_sweep(const ChainDecomposition& decomp, std::vector<double> delta_grid,
                              std::vector<std::size_t> n_grid, double eta,
                              const EstimatorConfig& config, std::size_t replicates,
                              std::uint64_t seed, unsigned threads = 0);

struct OscillationOrdering {
  /// Every n series is nondecreasing in delta.
  bool monotone = false;
  /// Exceedance at (smallest delta, largest n) and (largest delta, largest n).
  double small_delta = 0.0;
  double large_delta = 0.0;
  /// monotone, small_delta <= large_delta and both below `limit`.
  bool pass = false;
};

OscillationOrdering oscillation_ordering(const SweepReport& report, double limit = 0.5);

enum class Growth { Bounded, Diverging, Indeterminate };

const char* to_string(Growth g) noexcept;

/// Diverging: nondecreasing, last > 0 and last >= 5 first. Bounded: over the
/// top half of the grid, max <= 2 min. Otherwise Indeterminate.
Growth classify_growth(std::span<const double> series);

struct NecessityReport {
  SweepReport sweep;
  std::vector<double> b_exponents;
  std::vector<Growth> verdicts;
  double mass_scale = 0.0;
};

/// Exact sqrt(n) sup_f |E f - E Phi_{n,b}(f)| on heavy_tail_pair(spec) for each
/// b_n = n^b. Metric per rule named "b=<b>". Throws InvalidArgument unless
/// every b lies in (0, 1/2].
NecessityReport necessity_sweep(const HeavyTailSpec& spec, std::vector<double> b_exponents,
                                std::vector<std::size_t> n_grid);

}  // namespace truncchain
