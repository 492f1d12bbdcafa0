#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "truncchain/function_class.hpp"

namespace truncchain {

enum class Metric { L2, Linf };

Norm to_norm(Metric m) noexcept;

/// 2^{2^s}, saturating at SIZE_MAX.
std::size_t level_budget(std::size_t s) noexcept;

/// Last level of a sequence over a class of `class_size` functions:
/// 0 for a singleton, otherwise min{s >= 1 : 2^{2^s} >= class_size}.
std::size_t final_level(std::size_t class_size) noexcept;

/// Nested level sets F_0 = {anchor} ⊆ F_1 ⊆ ... ⊆ F_{s_max} = F with
/// |F_s| <= 2^{2^s}, plus the nearest-point maps pi_s (members map to themselves,
/// otherwise the lowest index wins ties).
class AdmissibleSequence {
 public:
  /// Validates every invariant; throws InvalidArgument on violation.
  /// `table` may carry precomputed distances in `metric`.
  AdmissibleSequence(ClassPtr cls, Metric metric, std::vector<std::vector<std::size_t>> levels,
                     std::shared_ptr<const DistanceTable> table = nullptr);

  const FunctionClass& cls() const noexcept { return *cls_; }
  const ClassPtr& class_ptr() const noexcept { return cls_; }
  Metric metric() const noexcept { return metric_; }
  std::size_t s_max() const noexcept { return levels_.size() - 1; }

  /// Members of F_s in ascending index order.
  std::span<const std::size_t> level(std::size_t s) const { return levels_.at(s); }
  const std::vector<std::vector<std::size_t>>& levels() const noexcept { return levels_; }

  std::size_t pi(std::size_t s, std::size_t f) const noexcept { return pi_[s * size_ + f]; }
  /// d(f, F_s) in the sequence's metric.
  double distance_to_level(std::size_t s, std::size_t f) const noexcept {
    return dist_[s * size_ + f];
  }
  const DistanceTable& distances() const noexcept { return *table_; }

 private:
  void validate_and_project();

  ClassPtr cls_;
  Metric metric_;
  std::shared_ptr<const DistanceTable> table_;
  std::vector<std::vector<std::size_t>> levels_;
  std::vector<std::size_t> pi_;
  std::vector<double> dist_;
  std::size_t size_ = 0;
};

struct BuildOptions {
  /// Swap-move local search after the greedy pass; a swap is kept only if it
  /// lowers the sequence's gamma estimate.
  bool refine = false;
  std::size_t max_refine_passes = 8;
};

/// Greedy farthest-point (k-center) construction: each level extends the
/// previous one by the point farthest from the current set until the level
/// budget min(2^{2^s}, |F|) is met.
AdmissibleSequence build_admissible(ClassPtr cls, Metric metric, BuildOptions options = {});

/// Nested sequence with uniformly random additions at each level; used as a
/// baseline for the greedy construction.
AdmissibleSequence random_admissible(ClassPtr cls, Metric metric, std::uint64_t seed);

/// sup_f sum_{s=0}^{s_max} 2^{s/p} d(f, F_s) for this sequence.
/// p = 2 needs an L2 sequence, p = 1 an Linf one (MetricMismatch otherwise).
double gamma_functional(const AdmissibleSequence& seq, int p);

/// sup_f sum_{s >= s0} 2^{s/2} d(f, F_s); zero once s0 > s_max.
double tail_functional(const AdmissibleSequence& seq, std::size_t s0);

/// sup_f sum_s 2^s ||f - pi_s(f)||_inf along this sequence's own chain,
/// whatever metric chose pi. Equals gamma_functional(seq, 1) for Linf sequences.
double linf_chain_functional(const AdmissibleSequence& seq);

/// F''_0 = F_0(a); F''_{s+1} = F''_s ∪ F_s(a) ∪ F_s(b), topped up greedily to
/// the level budget. Throws ClassMismatch for different classes or metrics.
AdmissibleSequence merge_admissible(const AdmissibleSequence& a, const AdmissibleSequence& b);

/// Chain increments Delta_s(f) = pi_s(f) - pi_{s-1}(f), s = 1..s_max.
class ChainDecomposition {
 public:
  explicit ChainDecomposition(const AdmissibleSequence& seq);

  const FunctionClass& cls() const noexcept { return *cls_; }
  const ClassPtr& class_ptr() const noexcept { return cls_; }
  std::size_t s_max() const noexcept { return s_max_; }
  std::size_t size() const noexcept { return size_; }
  std::size_t atom_count() const noexcept { return atoms_; }

  std::size_t pi(std::size_t s, std::size_t f) const noexcept { return pi_[s * size_ + f]; }

  /// Delta_s(f) over atoms, 1 <= s <= s_max.
  std::span<const double> increment(std::size_t s, std::size_t f) const {
    return std::span<const double>(increments_).subspan(slot(s, f) * atoms_, atoms_);
  }
  double l2_norm(std::size_t s, std::size_t f) const noexcept { return l2_[slot(s, f)]; }
  /// max over all atoms (not only supported ones) of |Delta_s(f)|.
  double max_abs(std::size_t s, std::size_t f) const noexcept { return max_abs_[slot(s, f)]; }

  /// Number of distinct increments {Delta_s(f) : f in F} at level s.
  std::size_t distinct_increments(std::size_t s) const;

  /// Sum over s of Delta_s(f), atom by atom.
  std::vector<double> telescope(std::size_t f) const;

 private:
  std::size_t slot(std::size_t s, std::size_t f) const noexcept { return (s - 1) * size_ + f; }

  ClassPtr cls_;
  std::size_t s_max_ = 0;
  std::size_t size_ = 0;
  std::size_t atoms_ = 0;
  std::vector<std::size_t> pi_;
  std::vector<double> increments_;
  std::vector<double> l2_;
  std::vector<double> max_abs_;
};

inline ChainDecomposition decompose(const AdmissibleSequence& seq) {
  return ChainDecomposition(seq);
}

}  // namespace truncchain
