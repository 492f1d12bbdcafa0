#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "truncchain/measure.hpp"

namespace truncchain {

/// Finite family of functions over a DiscreteSpace, stored row-major as a
/// functions x atoms value table. Always contains the zero function (the
/// anchor) and no duplicate rows.
class FunctionClass {
 public:
  /// make_class semantics: deduplicates rows (first occurrence wins) and
  /// appends the zero function when absent.
  FunctionClass(std::shared_ptr<const DiscreteSpace> space,
                const std::vector<std::vector<double>>& table);

  std::size_t size() const noexcept { return rows_; }
  std::size_t atom_count() const noexcept { return atoms_; }
  std::size_t anchor() const noexcept { return anchor_; }

  const DiscreteSpace& space() const noexcept { return *space_; }
  const std::shared_ptr<const DiscreteSpace>& space_ptr() const noexcept { return space_; }

  std::span<const double> row(std::size_t f) const {
    return std::span<const double>(values_).subspan(f * atoms_, atoms_);
  }
  double value(std::size_t f, std::size_t atom) const noexcept {
    return values_[f * atoms_ + atom];
  }

  /// Exact expectations of every member, in row order.
  const std::vector<double>& means() const noexcept { return means_; }

  bool same_as(const FunctionClass& other) const noexcept;

 private:
  std::shared_ptr<const DiscreteSpace> space_;
  std::vector<double> values_;
  std::vector<double> means_;
  std::size_t rows_ = 0;
  std::size_t atoms_ = 0;
  std::size_t anchor_ = 0;
};

using ClassPtr = std::shared_ptr<const FunctionClass>;

ClassPtr make_class(std::shared_ptr<const DiscreteSpace> space,
                    const std::vector<std::vector<double>>& table);

/// Symmetric functions x functions distance table.
class DistanceTable {
 public:
  DistanceTable() = default;
  DistanceTable(std::size_t n, std::vector<double> d) : n_(n), d_(std::move(d)) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return d_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

/// d(i,j) = ||f_i - f_j|| under the chosen norm (Linf is essential).
DistanceTable pairwise_distance(const FunctionClass& cls, Norm norm);
inline DistanceTable pairwise_l2(const FunctionClass& cls) {
  return pairwise_distance(cls, Norm::L2);
}

/// Uniform space on d atoms with the class {1_[i,j) : 0 <= i < j <= d} plus 0.
/// Row order: zero first, then (i, j) lexicographic.
ClassPtr interval_indicators(std::size_t d);

/// {0, f} on the space `probs`, f given atom by atom.
ClassPtr two_point_class(std::vector<double> probs, std::vector<double> f);

/// Coefficient sequence a_k of the heavy-tailed witness.
struct CoefficientDecay {
  enum class Kind { InverseLogSquared, Power };
  Kind kind = Kind::InverseLogSquared;
  double power = 0.0;  // a_k = k^{-power} when kind == Power

  double operator()(std::size_t k) const noexcept;
};

struct HeavyTailSpec {
  double b_exponent = 0.25;        // b_k = k^{b_exponent}, in (0, 1/2)
  CoefficientDecay a_decay{};      // default a_k = 1 / log^2(k + 1)
  std::size_t atoms = std::size_t{1} << 16;  // K
  std::optional<double> mass_scale;  // unset: total heavy mass scaled to 1/2
};

/// Resolved mass scale: the explicit value, or 1/2 over the raw total mass
/// sum_{k<=K} |a_k| / (k b_k^2).
double heavy_tail_mass_scale(const HeavyTailSpec& spec);

struct HeavyTailPair {
  std::shared_ptr<const DiscreteSpace> space;
  ClassPtr cls;  // rows: {0, f}
  double mass_scale = 0.0;
};

/// K + 1 atoms: atom k (1 <= k <= K) has mass mass_scale |a_k| / (k b_k^2) and
/// f = b_k; atom 0 carries the residual mass and f = 0.
/// Throws MassOverflow when the heavy atoms need more than total mass 1.
HeavyTailPair heavy_tail_pair(const HeavyTailSpec& spec);

/// sqrt(m) * E f 1{f > b_m} = sqrt(m) * mass_scale * sum_{m < l <= K} |a_l| / (l b_l),
/// evaluated directly from the coefficient sequence.
double heavy_tail_tail_functional(const HeavyTailSpec& spec, std::size_t m);

}  // namespace truncchain
