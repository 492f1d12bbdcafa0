#include "truncchain/chaining.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <utility>

#include "truncchain/error.hpp"
#include "truncchain/rng.hpp"

namespace truncchain {

Norm to_norm(Metric m) noexcept { return m == Metric::L2 ? Norm::L2 : Norm::Linf; }

std::size_t level_budget(std::size_t s) noexcept {
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  if (s >= 6) return kMax;  // 2^{64} and beyond
  return std::size_t{1} << (std::size_t{1} << s);
}

std::size_t final_level(std::size_t class_size) noexcept {
  if (class_size <= 1) return 0;
  std::size_t s = 1;
  while (level_budget(s) < class_size) ++s;
  return s;
}

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, what);
}

double level_weight(std::size_t s, int p) {
  return std::pow(2.0, static_cast<double>(s) / static_cast<double>(p));
}

// sup_f sum_{s >= s0} 2^{s/p} min_{g in F_s} d(f, g) over raw level sets.
double gamma_of_levels(const DistanceTable& d, const std::vector<std::vector<std::size_t>>& levels,
                       int p, std::size_t s0 = 0) {
  double best = 0.0;
  for (std::size_t f = 0; f < d.size(); ++f) {
    double total = 0.0;
    for (std::size_t s = s0; s < levels.size(); ++s) {
      double m = std::numeric_limits<double>::infinity();
      for (auto g : levels[s]) m = std::min(m, d(f, g));
      total += level_weight(s, p) * m;
    }
    best = std::max(best, total);
  }
  return best;
}

// Grows `set` by farthest-point insertion until it holds `budget` points.
void extend_greedily(const DistanceTable& d, std::vector<std::size_t>& set, std::size_t budget) {
  const std::size_t n = d.size();
  std::vector<char> member(n, 0);
  std::vector<double> mindist(n, std::numeric_limits<double>::infinity());
  for (auto g : set) member[g] = 1;
  for (std::size_t f = 0; f < n; ++f) {
    for (auto g : set) mindist[f] = std::min(mindist[f], d(f, g));
  }
  while (set.size() < std::min(budget, n)) {
    std::size_t pick = n;
    double far = -1.0;
    for (std::size_t f = 0; f < n; ++f) {
      if (!member[f] && mindist[f] > far) {
        far = mindist[f];
        pick = f;
      }
    }
    member[pick] = 1;
    set.push_back(pick);
    for (std::size_t f = 0; f < n; ++f) mindist[f] = std::min(mindist[f], d(f, pick));
  }
  std::sort(set.begin(), set.end());
}

std::vector<std::vector<std::size_t>> greedy_levels(const FunctionClass& cls,
                                                    const DistanceTable& d) {
  const std::size_t s_max = final_level(cls.size());
  std::vector<std::vector<std::size_t>> levels;
  levels.push_back({cls.anchor()});
  for (std::size_t s = 1; s <= s_max; ++s) {
    auto next = levels.back();
    extend_greedily(d, next, level_budget(s));
    levels.push_back(std::move(next));
  }
  return levels;
}

// Swap a point added at level s for one first added at level s+1 whenever
// that lowers the gamma estimate. Keeps nesting and level sizes intact.
void refine_levels(const DistanceTable& d, std::vector<std::vector<std::size_t>>& levels, int p,
                   std::size_t max_passes) {
  double current = gamma_of_levels(d, levels, p);
  for (std::size_t pass = 0; pass < max_passes; ++pass) {
    bool improved = false;
    for (std::size_t s = 1; s + 1 < levels.size(); ++s) {
      std::vector<std::size_t> removable, insertable;
      std::set_difference(levels[s].begin(), levels[s].end(), levels[s - 1].begin(),
                          levels[s - 1].end(), std::back_inserter(removable));
      std::set_difference(levels[s + 1].begin(), levels[s + 1].end(), levels[s].begin(),
                          levels[s].end(), std::back_inserter(insertable));
      for (auto out : removable) {
        for (auto in : insertable) {
          auto trial = levels;
          auto& lv = trial[s];
          *std::find(lv.begin(), lv.end(), out) = in;
          std::sort(lv.begin(), lv.end());
          const double g = gamma_of_levels(d, trial, p);
          if (g < current * (1.0 - 1e-12)) {
            levels = std::move(trial);
            current = g;
            improved = true;
            break;
          }
        }
        if (improved) break;
      }
      if (improved) break;
    }
    if (!improved) return;
  }
}

}  // namespace

AdmissibleSequence::AdmissibleSequence(ClassPtr cls, Metric metric,
                                       std::vector<std::vector<std::size_t>> levels,
                                       std::shared_ptr<const DistanceTable> table)
    : cls_(std::move(cls)), metric_(metric), table_(std::move(table)), levels_(std::move(levels)) {
  if (!cls_) invalid("null class");
  size_ = cls_->size();
  if (!table_) {
    table_ = std::make_shared<const DistanceTable>(pairwise_distance(*cls_, to_norm(metric_)));
  }
  if (table_->size() != size_) invalid("distance table does not match the class");
  validate_and_project();
}

void AdmissibleSequence::validate_and_project() {
  const std::size_t s_max = final_level(size_);
  if (levels_.size() != s_max + 1) {
    invalid("expected " + std::to_string(s_max + 1) + " levels for a class of " +
            std::to_string(size_) + " functions, got " + std::to_string(levels_.size()));
  }
  if (levels_[0].size() != 1 || levels_[0][0] != cls_->anchor()) {
    invalid("level 0 must be exactly the zero function");
  }
  for (std::size_t s = 0; s <= s_max; ++s) {
    auto& lv = levels_[s];
    std::sort(lv.begin(), lv.end());
    if (std::adjacent_find(lv.begin(), lv.end()) != lv.end()) {
      invalid("level " + std::to_string(s) + " repeats an index");
    }
    if (!lv.empty() && lv.back() >= size_) invalid("level " + std::to_string(s) + " index out of range");
    if (lv.size() > level_budget(s)) invalid("level " + std::to_string(s) + " exceeds its budget");
    if (s > 0 && !std::includes(lv.begin(), lv.end(), levels_[s - 1].begin(), levels_[s - 1].end())) {
      invalid("level " + std::to_string(s) + " does not contain level " + std::to_string(s - 1));
    }
  }
  if (levels_[s_max].size() != size_) invalid("last level must be the whole class");

  pi_.assign((s_max + 1) * size_, 0);
  dist_.assign((s_max + 1) * size_, 0.0);
  const DistanceTable& d = *table_;
  for (std::size_t s = 0; s <= s_max; ++s) {
    for (std::size_t f = 0; f < size_; ++f) {
      std::size_t best = levels_[s][0];
      double bd = d(f, best);
      for (std::size_t k = 1; k < levels_[s].size(); ++k) {
        const std::size_t g = levels_[s][k];
        if (d(f, g) < bd) {
          bd = d(f, g);
          best = g;
        }
      }
      // A member always projects onto itself, even if a lower index sits at
      // distance zero (rows differing only on null atoms).
      if (std::binary_search(levels_[s].begin(), levels_[s].end(), f)) {
        best = f;
        bd = 0.0;
      }
      pi_[s * size_ + f] = best;
      dist_[s * size_ + f] = bd;
    }
  }
}

AdmissibleSequence build_admissible(ClassPtr cls, Metric metric, BuildOptions options) {
  if (!cls) invalid("null class");
  auto table = std::make_shared<const DistanceTable>(pairwise_distance(*cls, to_norm(metric)));
  auto levels = greedy_levels(*cls, *table);
  if (options.refine) {
    refine_levels(*table, levels, metric == Metric::L2 ? 2 : 1, options.max_refine_passes);
  }
  return AdmissibleSequence(std::move(cls), metric, std::move(levels), std::move(table));
}

AdmissibleSequence random_admissible(ClassPtr cls, Metric metric, std::uint64_t seed) {
  if (!cls) invalid("null class");
  std::vector<std::size_t> order;
  for (std::size_t f = 0; f < cls->size(); ++f) {
    if (f != cls->anchor()) order.push_back(f);
  }
  CounterRng rng(mix64(seed));
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  const std::size_t s_max = final_level(cls->size());
  std::vector<std::vector<std::size_t>> levels;
  for (std::size_t s = 0; s <= s_max; ++s) {
    const std::size_t take = s == 0 ? 0 : std::min(level_budget(s), cls->size()) - 1;
    std::vector<std::size_t> lv{cls->anchor()};
    lv.insert(lv.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
    levels.push_back(std::move(lv));
  }
  return AdmissibleSequence(std::move(cls), metric, std::move(levels));
}

double gamma_functional(const AdmissibleSequence& seq, int p) {
  if (p == 2 && seq.metric() != Metric::L2) {
    throw Error(ErrorCode::MetricMismatch, "gamma_2 needs an L2 sequence");
  }
  if (p == 1 && seq.metric() != Metric::Linf) {
    throw Error(ErrorCode::MetricMismatch, "gamma_1 needs an Linf sequence");
  }
  if (p != 1 && p != 2) invalid("gamma functional order must be 1 or 2");
  double best = 0.0;
  for (std::size_t f = 0; f < seq.cls().size(); ++f) {
    double total = 0.0;
    for (std::size_t s = 0; s <= seq.s_max(); ++s) {
      total += level_weight(s, p) * seq.distance_to_level(s, f);
    }
    best = std::max(best, total);
  }
  return best;
}

double tail_functional(const AdmissibleSequence& seq, std::size_t s0) {
  double best = 0.0;
  for (std::size_t f = 0; f < seq.cls().size(); ++f) {
    double total = 0.0;
    for (std::size_t s = s0; s <= seq.s_max(); ++s) {
      total += level_weight(s, 2) * seq.distance_to_level(s, f);
    }
    best = std::max(best, total);
  }
  return best;
}

double linf_chain_functional(const AdmissibleSequence& seq) {
  const FunctionClass& cls = seq.cls();
  std::vector<double> diff(cls.atom_count());
  double best = 0.0;
  for (std::size_t f = 0; f < cls.size(); ++f) {
    double total = 0.0;
    for (std::size_t s = 0; s <= seq.s_max(); ++s) {
      const auto a = cls.row(f);
      const auto b = cls.row(seq.pi(s, f));
      for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = a[k] - b[k];
      total += level_weight(s, 1) * lp_norm(cls.space(), diff, Norm::Linf);
    }
    best = std::max(best, total);
  }
  return best;
}

AdmissibleSequence merge_admissible(const AdmissibleSequence& a, const AdmissibleSequence& b) {
  if (!a.cls().same_as(b.cls())) {
    throw Error(ErrorCode::ClassMismatch, "sequences index different classes");
  }
  if (a.metric() != b.metric()) {
    throw Error(ErrorCode::ClassMismatch, "sequences use different metrics");
  }
  const std::size_t s_max = a.s_max();
  const DistanceTable& d = a.distances();
  std::vector<std::vector<std::size_t>> levels;
  levels.push_back({a.cls().anchor()});
  for (std::size_t s = 1; s <= s_max; ++s) {
    std::vector<std::size_t> next;
    const auto& prev = levels.back();
    std::set<std::size_t> merged(prev.begin(), prev.end());
    merged.insert(a.level(s - 1).begin(), a.level(s - 1).end());
    merged.insert(b.level(s - 1).begin(), b.level(s - 1).end());
    next.assign(merged.begin(), merged.end());
    if (next.size() > level_budget(s)) {
      // 3 * 2^{2^{s-1}} <= 2^{2^s} for s >= 1, so this cannot happen.
      throw Error(ErrorCode::InvalidArgument, "merged level exceeds its budget");
    }
    extend_greedily(d, next, level_budget(s));
    levels.push_back(std::move(next));
  }
  return AdmissibleSequence(a.class_ptr(), a.metric(), std::move(levels),
                            std::make_shared<const DistanceTable>(d));
}

ChainDecomposition::ChainDecomposition(const AdmissibleSequence& seq)
    : cls_(seq.class_ptr()),
      s_max_(seq.s_max()),
      size_(seq.cls().size()),
      atoms_(seq.cls().atom_count()) {
  pi_.resize((s_max_ + 1) * size_);
  for (std::size_t s = 0; s <= s_max_; ++s) {
    for (std::size_t f = 0; f < size_; ++f) pi_[s * size_ + f] = seq.pi(s, f);
  }
  increments_.assign(s_max_ * size_ * atoms_, 0.0);
  l2_.assign(s_max_ * size_, 0.0);
  max_abs_.assign(s_max_ * size_, 0.0);
  for (std::size_t s = 1; s <= s_max_; ++s) {
    for (std::size_t f = 0; f < size_; ++f) {
      const auto hi = cls_->row(pi(s, f));
      const auto lo = cls_->row(pi(s - 1, f));
      double* out = increments_.data() + slot(s, f) * atoms_;
      double m = 0.0;
      for (std::size_t k = 0; k < atoms_; ++k) {
        out[k] = hi[k] - lo[k];
        m = std::max(m, std::abs(out[k]));
      }
      max_abs_[slot(s, f)] = m;
      l2_[slot(s, f)] = lp_norm(cls_->space(), increment(s, f), Norm::L2);
    }
  }
}

std::size_t ChainDecomposition::distinct_increments(std::size_t s) const {
  if (s < 1 || s > s_max_) throw Error(ErrorCode::LevelOutOfRange, "level " + std::to_string(s));
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t f = 0; f < size_; ++f) pairs.emplace(pi(s, f), pi(s - 1, f));
  return pairs.size();
}

std::vector<double> ChainDecomposition::telescope(std::size_t f) const {
  std::vector<double> out(atoms_, 0.0);
  for (std::size_t s = 1; s <= s_max_; ++s) {
    const auto inc = increment(s, f);
    for (std::size_t k = 0; k < atoms_; ++k) out[k] += inc[k];
  }
  return out;
}

}  // namespace truncchain
