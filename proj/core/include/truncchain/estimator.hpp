#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "truncchain/chaining.hpp"
#include "truncchain/measure.hpp"

namespace truncchain {

/// lambda = c0 sqrt(n) ||Delta_s(f)||_2 / 2^{s/2}, all levels.
struct SqrtN {};
/// Same truncation level, but the chain sum starts at level s0 + 1.
struct TailFrom {
  std::size_t s0 = 0;
};
/// lambda = b_n ||Delta_s(f)||_2 / 2^{s/2} with b_n = n^{b_exponent}.
struct Universal {
  double b_exponent = 0.5;
};

using TruncationRule = std::variant<SqrtN, TailFrom, Universal>;

struct EstimatorConfig {
  double c0 = 1.0;
  TruncationRule rule = SqrtN{};
  std::size_t n = 1;

  /// Throws InvalidArgument when c0 <= 0, n < 1 or b_exponent <= 0.
  void validate() const;
};

/// Truncation level lambda(f, n, s). Throws LevelOutOfRange unless 1 <= s <= s_max.
double truncation_level(const ChainDecomposition& decomp, std::size_t f, std::size_t s,
                        const EstimatorConfig& config);

/// Phi_n(f) = sum_s Delta_s(f) 1{|Delta_s(f)| <= lambda} evaluated pointwise.
struct ModifiedFunction {
  std::vector<double> values;
  /// kept_mask[(s - 1) * atoms + atom]: increment s survived at that atom.
  /// Levels skipped by a TailFrom rule are marked as not kept.
  std::vector<std::uint8_t> kept_mask;
  std::size_t atoms = 0;

  bool kept(std::size_t s, std::size_t atom) const { return kept_mask[(s - 1) * atoms + atom] != 0; }
  bool identity() const noexcept;
};

/// Runs of consecutive surviving increments are summed as a single
/// difference pi_b(f) - pi_{a-1}(f), so Phi_n(f) == f bit for bit once no
/// truncation is active.
ModifiedFunction phi(const ChainDecomposition& decomp, std::size_t f, const EstimatorConfig& config);

/// max_s 2^s (max_atom |Delta_s(f)|)^2 / (c0^2 ||Delta_s(f)||_2^2), the sample
/// size beyond which the sqrt-n rule truncates nothing. +inf when some
/// increment is nonzero only off the support.
double identity_threshold(const ChainDecomposition& decomp, std::size_t f, double c0);

/// Smallest n with Phi_n(f) == f under the sqrt-n rule as implemented
/// (identity_threshold corrected for rounding at the boundary). 0 if none.
std::size_t identity_sample_size(const ChainDecomposition& decomp, std::size_t f, double c0);

/// True when no increment of any function is truncated.
bool identity_regime(const ChainDecomposition& decomp, const EstimatorConfig& config);

/// Phi_n values of every function plus exact E f, reusable across replicates.
class ModifiedProcess {
 public:
  ModifiedProcess(const ChainDecomposition& decomp, const EstimatorConfig& config);

  std::size_t size() const noexcept { return phi_.size(); }
  std::size_t n() const noexcept { return n_; }
  std::span<const double> phi(std::size_t f) const { return phi_[f]; }
  double mean(std::size_t f) const { return means_[f]; }
  double phi_mean(std::size_t f) const { return phi_means_[f]; }

  /// (1/n) sum_i Phi_n(f)(X_i) from per-atom counts, in atom order.
  double empirical_mean(std::size_t f, std::span<const std::uint32_t> counts) const;
  /// sqrt(n) (P_n Phi_n(f) - E f).
  double centered(std::size_t f, std::span<const std::uint32_t> counts) const;

 private:
  std::vector<std::vector<double>> phi_;
  std::vector<double> means_;
  std::vector<double> phi_means_;
  std::size_t n_ = 1;
};

/// sqrt(n) (P_n Phi_n(f) - E f) for one sample; sample size must equal config.n.
/// Throws SpaceMismatch if the sample came from another space.
double modified_process(const Sample& sample, const ChainDecomposition& decomp, std::size_t f,
                        const EstimatorConfig& config);

struct BiasReport {
  /// sqrt(n) sup_f |E Phi_n(f) - E f|.
  double scaled_sup_bias = 0.0;
  std::size_t worst_function = 0;
  /// E Phi_n(f) - E f per function.
  std::vector<double> bias;
  /// E |Delta_s(f)| 1{|Delta_s(f)| > lambda} at [(s - 1) * size + f].
  std::vector<double> tail_terms;
};

/// Exact bias, computed as minus the expectation of the removed increments so
/// the identity regime yields exactly zero.
BiasReport exact_bias(const ChainDecomposition& decomp, const EstimatorConfig& config);

/// 2 exp(-n t^2 / (2 sigma2 + (2/3) M t)), where M bounds |g - E g|.
double bernstein_tail(double t, std::size_t n, double sigma2, double M);

/// The explicit constants behind the deviation bounds. c0 sets the truncation
/// level, c3 scales the per-level deviation threshold.
struct ChainConstants {
  double c0 = 1.0;
  double c3 = 12.0;

  /// kappa = c3^2 / (2 + (4/3) c0 c3): per-increment Bernstein exponent
  /// is at least kappa 2^s min(u^2, u).
  double kappa() const noexcept;
  /// c2 = kappa - 8 ln 2, so that the union over 2^{2^{s+1}} increments fails
  /// with probability at most 2 exp(-c2 2^s min(u^2, u)) for u > 1/2.
  double level_c2() const noexcept;
  /// (1 + sqrt 2) max(c3, 1/c0): constant of the global bound.
  double global_c2() const noexcept;
};

struct LevelDeviationBound {
  double u = 0.0;
  std::size_t s = 0;
  /// threshold(f) = threshold_scale * ||Delta_s(f)||_2 with
  /// threshold_scale = c3 u 2^{s/2} / sqrt(n).
  double threshold_scale = 0.0;
  /// min(1, 2^{2^{s+1}} * bernstein_tail(...)) after substituting t and lambda.
  double failure_probability = 0.0;
  /// 2 exp(-c2 2^s min(u^2, u)) with the derived c2.
  double closed_form_probability = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;

  double threshold(double increment_norm) const noexcept { return threshold_scale * increment_norm; }
};

/// Throws BadU if u <= 1/2.
LevelDeviationBound level_deviation_bound(double u, std::size_t s, std::size_t n,
                                          const ChainConstants& constants = {});

/// c2 (u + 1) gamma2 / sqrt(n) with c2 = constants.global_c2(). Throws BadU.
double global_deviation_bound(double u, double gamma2_estimate, std::size_t n,
                              const ChainConstants& constants = {});

/// Probability, from the union over levels s0+1..s_max of
/// level_deviation_bound failures, that the global (s0 = 0) or tail bound holds.
double deviation_success_probability(double u, std::size_t s0, std::size_t s_max,
                                     const ChainConstants& constants = {});

/// c3 u / sqrt(n) * sup_f sum_{s > s0} 2^{s/2} ||Delta_s(f)||_2: deviation of
/// P_n Phi_{n,s0}(f) from E Phi_{n,s0}(f). Throws BadU.
double tail_deviation_bound(const ChainDecomposition& decomp, double u, std::size_t s0,
                            std::size_t n, const ChainConstants& constants = {});

/// Explicit constant c of E ||P_n - P||_F <= c (gamma2 / sqrt n + gamma1 / n),
/// valid with gamma2 from an L2 sequence and gamma1 = linf_chain_functional of
/// the same sequence.
double cor15_constant() noexcept;

double expectation_bound_cor15(double gamma2_estimate, double gamma1_estimate, std::size_t n,
                               double c = cor15_constant());

}  // namespace truncchain
