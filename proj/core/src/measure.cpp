#include "truncchain/measure.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "truncchain/error.hpp"
#include "truncchain/rng.hpp"

namespace truncchain {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::MassOverflow: return "MassOverflow";
    case ErrorCode::MetricMismatch: return "MetricMismatch";
    case ErrorCode::ClassMismatch: return "ClassMismatch";
    case ErrorCode::LevelOutOfRange: return "LevelOutOfRange";
    case ErrorCode::SpaceMismatch: return "SpaceMismatch";
    case ErrorCode::BadU: return "BadU";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::DegenerateTarget: return "DegenerateTarget";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

DiscreteSpace::DiscreteSpace(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw Error(ErrorCode::InvalidArgument, "space needs at least one atom");
  if (probs_.size() > std::size_t{0xffffffffu}) {
    throw Error(ErrorCode::TooLarge, "atom count exceeds 32-bit index range");
  }
  CompensatedSum total;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    if (!(probs_[i] >= 0.0)) {
      throw Error(ErrorCode::NegativeWeight, "atom " + std::to_string(i) + " has weight " +
                                                 std::to_string(probs_[i]));
    }
    total.add(probs_[i]);
  }
  if (!(std::abs(total.value() - 1.0) <= kNormalizationTolerance)) {
    throw Error(ErrorCode::NotNormalized, "weights sum to " + std::to_string(total.value()));
  }

  cdf_.resize(probs_.size());
  CompensatedSum running;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    running.add(probs_[i]);
    cdf_[i] = running.value();
    if (probs_[i] > 0.0) last_positive = i;
  }
  // Close the CDF at the last supported atom so every u in [0,1) lands on a
  // supported atom whatever the rounding of the partial sums.
  for (std::size_t i = last_positive; i < cdf_.size(); ++i) cdf_[i] = 1.0;

  std::uint64_t h = mix64(probs_.size());
  for (double p : probs_) h = mix64(h ^ std::bit_cast<std::uint64_t>(p));
  id_ = h;
}

std::size_t DiscreteSpace::atom_at(double u) const noexcept {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<std::size_t>(it - cdf_.begin());
}

DiscreteSpace make_space(std::vector<double> probs) { return DiscreteSpace(std::move(probs)); }

namespace {

void check_length(const DiscreteSpace& space, std::span<const double> values) {
  if (values.size() != space.atom_count()) {
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(space.atom_count()) +
                                               " values, got " + std::to_string(values.size()));
  }
}

}  // namespace

double expectation(const DiscreteSpace& space, std::span<const double> values) {
  check_length(space, values);
  const auto probs = space.probs();
  CompensatedSum sum;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (probs[i] != 0.0) sum.add(probs[i] * values[i]);
  }
  return sum.value();
}

double lp_norm(const DiscreteSpace& space, std::span<const double> values, Norm p) {
  check_length(space, values);
  const auto probs = space.probs();
  switch (p) {
    case Norm::L1: {
      CompensatedSum sum;
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (probs[i] != 0.0) sum.add(probs[i] * std::abs(values[i]));
      }
      return sum.value();
    }
    case Norm::L2: {
      CompensatedSum sum;
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (probs[i] != 0.0) sum.add(probs[i] * values[i] * values[i]);
      }
      return std::sqrt(std::max(0.0, sum.value()));
    }
    case Norm::Linf: {
      double m = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (probs[i] > 0.0) m = std::max(m, std::abs(values[i]));
      }
      return m;
    }
  }
  return 0.0;
}

Sample draw_sample(const DiscreteSpace& space, std::size_t n, std::uint64_t seed) {
  Sample sample;
  sample.seed = seed;
  sample.space_id = space.id();
  sample.indices.resize(n);
  const std::uint64_t key = mix64(seed);
  for (std::size_t i = 0; i < n; ++i) {
    sample.indices[i] = static_cast<std::uint32_t>(space.atom_at(to_unit(counter_u64(key, i))));
  }
  return sample;
}

std::vector<std::uint32_t> atom_counts(const DiscreteSpace& space, const Sample& sample) {
  if (sample.space_id != space.id()) {
    throw Error(ErrorCode::SpaceMismatch, "sample was drawn from a different space");
  }
  std::vector<std::uint32_t> counts(space.atom_count(), 0);
  for (auto idx : sample.indices) ++counts[idx];
  return counts;
}

}  // namespace truncchain
