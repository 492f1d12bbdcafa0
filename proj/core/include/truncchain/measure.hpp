#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace truncchain {

enum class Norm { L1, L2, Linf };

/// Finite probability space on atoms 0..atom_count()-1. Immutable.
class DiscreteSpace {
 public:
  /// Throws NegativeWeight / NotNormalized (|sum - 1| > 1e-12) / InvalidArgument (empty).
  explicit DiscreteSpace(std::vector<double> probs);

  std::size_t atom_count() const noexcept { return probs_.size(); }
  std::span<const double> probs() const noexcept { return probs_; }
  double prob(std::size_t atom) const { return probs_.at(atom); }

  /// Content fingerprint; two spaces with bitwise-equal weights share it.
  std::uint64_t id() const noexcept { return id_; }

  /// Inverse CDF: the atom whose cumulative interval contains u in [0, 1).
  /// Atoms of zero probability are never returned.
  std::size_t atom_at(double u) const noexcept;

  friend bool operator==(const DiscreteSpace& a, const DiscreteSpace& b) {
    return a.probs_ == b.probs_;
  }

 private:
  std::vector<double> probs_;
  std::vector<double> cdf_;
  std::uint64_t id_ = 0;
};

inline constexpr double kNormalizationTolerance = 1e-12;

DiscreteSpace make_space(std::vector<double> probs);

/// Exact (compensated) weighted sum of `values` under the space.
double expectation(const DiscreteSpace& space, std::span<const double> values);

/// L1/L2 norms under P; Linf is the essential sup over atoms with P > 0.
double lp_norm(const DiscreteSpace& space, std::span<const double> values, Norm p);

/// n iid draws. Draw i is a pure function of (seed, i), so samples are
/// bit-reproducible regardless of how replicates are scheduled.
struct Sample {
  std::vector<std::uint32_t> indices;
  std::uint64_t seed = 0;
  std::uint64_t space_id = 0;

  std::size_t size() const noexcept { return indices.size(); }
};

Sample draw_sample(const DiscreteSpace& space, std::size_t n, std::uint64_t seed);

/// Per-atom occurrence counts of a sample.
std::vector<std::uint32_t> atom_counts(const DiscreteSpace& space, const Sample& sample);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace truncchain
