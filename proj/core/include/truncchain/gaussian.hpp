#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "truncchain/function_class.hpp"

namespace truncchain {

/// Bridge: Cov(f, g) = E fg - E f E g (the empirical CLT limit).
/// Isonormal: Cov(f, g) = E fg (the L2(P) inner product).
enum class CovarianceMode { Bridge, Isonormal };

/// Centered Gaussian vector indexed by a subset of a class.
class GaussianModel {
 public:
  /// `covariance` is dim x dim, row-major. Negative eigenvalues down to
  /// -1e-10 are clipped to zero in the sampling factor; anything lower
  /// throws NotPSD. Throws InvalidArgument for an empty subset or bad shape.
  GaussianModel(std::vector<std::size_t> subset, std::vector<double> covariance, CovarianceMode mode);

  std::size_t dim() const noexcept { return subset_.size(); }
  CovarianceMode mode() const noexcept { return mode_; }
  const std::vector<std::size_t>& subset() const noexcept { return subset_; }

  /// Exact covariance as supplied (not the clipped one).
  double cov(std::size_t i, std::size_t j) const noexcept { return cov_[i * dim() + j]; }
  std::span<const double> covariance() const noexcept { return cov_; }
  /// Symmetric square root of the clipped covariance, row-major.
  std::span<const double> factor() const noexcept { return root_; }
  double min_eigenvalue() const noexcept { return min_eig_; }
  bool repaired() const noexcept { return min_eig_ < 0.0; }

  /// rho2(i, j) = (E (G_i - G_j)^2)^{1/2} from the exact covariance.
  double rho2(std::size_t i, std::size_t j) const noexcept;

  /// One draw of the vector from replicate `r` of the stream keyed by `seed`.
  void draw(std::uint64_t seed, std::size_t r, std::span<double> out) const;

 private:
  std::vector<std::size_t> subset_;
  std::vector<double> cov_;
  std::vector<double> root_;
  double min_eig_ = 0.0;
  CovarianceMode mode_;
};

/// Exact covariance of the class functions listed in `subset`.
GaussianModel build_model(const FunctionClass& cls, std::vector<std::size_t> subset,
                          CovarianceMode mode);

/// Model over every function of the class, in index order.
GaussianModel build_full_model(const FunctionClass& cls, CovarianceMode mode);

/// replicates x dim draws, row-major. Row r depends only on (seed, r).
std::vector<double> sample_gaussian(const GaussianModel& model, std::size_t replicates,
                                    std::uint64_t seed, unsigned threads = 0);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t replicates = 0;
};

/// E max_i |G_i|. When `columns` is nonempty the max runs over those model
/// coordinates only, on the same draws (for paired comparisons).
MonteCarloEstimate sup_expectation(const GaussianModel& model, std::size_t replicates,
                                   std::uint64_t seed, unsigned threads = 0,
                                   std::span<const std::size_t> columns = {});

/// E max over pairs with rho2(i, j) <= delta of |G_i - G_j|. Throws
/// InvalidArgument unless delta > 0.
MonteCarloEstimate continuity_modulus(const GaussianModel& model, double delta,
                                      std::size_t replicates, std::uint64_t seed,
                                      unsigned threads = 0);

/// Covariance as CSV: header row of class indices, then one row per function.
std::string covariance_csv(const GaussianModel& model);

}  // namespace truncchain
