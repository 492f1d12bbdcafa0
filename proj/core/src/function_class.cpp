#include "truncchain/function_class.hpp"

#include <cmath>
#include <set>
#include <string>

#include "truncchain/error.hpp"

namespace truncchain {

FunctionClass::FunctionClass(std::shared_ptr<const DiscreteSpace> space,
                             const std::vector<std::vector<double>>& table)
    : space_(std::move(space)) {
  if (!space_) throw Error(ErrorCode::InvalidArgument, "null space");
  if (table.empty()) throw Error(ErrorCode::EmptyClass, "value table has no rows");
  atoms_ = space_->atom_count();

  std::set<std::vector<double>> seen;
  bool have_zero = false;
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto& row = table[r];
    if (row.size() != atoms_) {
      throw Error(ErrorCode::LengthMismatch, "row " + std::to_string(r) + " has " +
                                                 std::to_string(row.size()) + " values, expected " +
                                                 std::to_string(atoms_));
    }
    // -0.0 and 0.0 compare equal but sort identically only after normalizing.
    std::vector<double> key(row);
    for (double& v : key) {
      if (v == 0.0) v = 0.0;
    }
    if (!seen.insert(key).second) continue;
    bool zero = true;
    for (double v : key) zero = zero && (v == 0.0);
    if (zero && !have_zero) {
      have_zero = true;
      anchor_ = rows_;
    }
    values_.insert(values_.end(), key.begin(), key.end());
    ++rows_;
  }
  if (!have_zero) {
    anchor_ = rows_;
    values_.insert(values_.end(), atoms_, 0.0);
    ++rows_;
  }

  means_.resize(rows_);
  for (std::size_t f = 0; f < rows_; ++f) means_[f] = expectation(*space_, row(f));
}

bool FunctionClass::same_as(const FunctionClass& other) const noexcept {
  if (this == &other) return true;
  return rows_ == other.rows_ && anchor_ == other.anchor_ && *space_ == *other.space_ &&
         values_ == other.values_;
}

ClassPtr make_class(std::shared_ptr<const DiscreteSpace> space,
                    const std::vector<std::vector<double>>& table) {
  return std::make_shared<const FunctionClass>(std::move(space), table);
}

DistanceTable pairwise_distance(const FunctionClass& cls, Norm norm) {
  const std::size_t n = cls.size();
  std::vector<double> d(n * n, 0.0);
  std::vector<double> diff(cls.atom_count());
  for (std::size_t i = 0; i < n; ++i) {
    const auto fi = cls.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto fj = cls.row(j);
      for (std::size_t a = 0; a < diff.size(); ++a) diff[a] = fi[a] - fj[a];
      const double v = lp_norm(cls.space(), diff, norm);
      d[i * n + j] = v;
      d[j * n + i] = v;
    }
  }
  return DistanceTable(n, std::move(d));
}

ClassPtr interval_indicators(std::size_t d) {
  if (d < 2) throw Error(ErrorCode::InvalidArgument, "interval_indicators needs d >= 2");
  auto space = std::make_shared<const DiscreteSpace>(std::vector<double>(d, 1.0 / static_cast<double>(d)));
  // 1/d may not sum to exactly 1 in floating point for every d; the space
  // constructor accepts deviations up to 1e-12.
  std::vector<std::vector<double>> table;
  table.reserve(d * (d + 1) / 2 + 1);
  table.emplace_back(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j <= d; ++j) {
      std::vector<double> row(d, 0.0);
      for (std::size_t a = i; a < j; ++a) row[a] = 1.0;
      table.push_back(std::move(row));
    }
  }
  return make_class(std::move(space), table);
}

ClassPtr two_point_class(std::vector<double> probs, std::vector<double> f) {
  if (f.size() != probs.size()) {
    throw Error(ErrorCode::LengthMismatch, "two_point_class: f has " + std::to_string(f.size()) +
                                               " values for " + std::to_string(probs.size()) + " atoms");
  }
  auto space = std::make_shared<const DiscreteSpace>(std::move(probs));
  std::vector<std::vector<double>> table{std::vector<double>(f.size(), 0.0), std::move(f)};
  return make_class(std::move(space), table);
}

double CoefficientDecay::operator()(std::size_t k) const noexcept {
  const double x = static_cast<double>(k);
  switch (kind) {
    case Kind::InverseLogSquared: {
      const double l = std::log(x + 1.0);
      return 1.0 / (l * l);
    }
    case Kind::Power:
      return std::pow(x, -power);
  }
  return 0.0;
}

namespace {

void check_spec(const HeavyTailSpec& spec) {
  if (!(spec.b_exponent > 0.0 && spec.b_exponent < 0.5)) {
    throw Error(ErrorCode::InvalidArgument, "b_exponent must lie in (0, 1/2)");
  }
  if (spec.atoms == 0) throw Error(ErrorCode::InvalidArgument, "heavy-tail spec needs K >= 1");
  if (spec.a_decay.kind == CoefficientDecay::Kind::Power && !(spec.a_decay.power > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "power decay needs a positive exponent");
  }
  if (spec.mass_scale && !(*spec.mass_scale > 0.0 && *spec.mass_scale <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "mass_scale must lie in (0, 1]");
  }
}

double b_value(const HeavyTailSpec& spec, std::size_t k) {
  return std::pow(static_cast<double>(k), spec.b_exponent);
}

double raw_mass(const HeavyTailSpec& spec, std::size_t k) {
  const double b = b_value(spec, k);
  return std::abs(spec.a_decay(k)) / (static_cast<double>(k) * b * b);
}

}  // namespace

double heavy_tail_mass_scale(const HeavyTailSpec& spec) {
  check_spec(spec);
  if (spec.mass_scale) return *spec.mass_scale;
  CompensatedSum total;
  for (std::size_t k = 1; k <= spec.atoms; ++k) total.add(raw_mass(spec, k));
  return 0.5 / total.value();
}

HeavyTailPair heavy_tail_pair(const HeavyTailSpec& spec) {
  const double scale = heavy_tail_mass_scale(spec);
  std::vector<double> probs(spec.atoms + 1, 0.0);
  std::vector<double> f(spec.atoms + 1, 0.0);
  CompensatedSum heavy;
  for (std::size_t k = 1; k <= spec.atoms; ++k) {
    probs[k] = scale * raw_mass(spec, k);
    f[k] = b_value(spec, k);
    heavy.add(probs[k]);
  }
  const double residual = 1.0 - heavy.value();
  if (residual < -kNormalizationTolerance) {
    throw Error(ErrorCode::MassOverflow,
                "heavy atoms carry total mass " + std::to_string(heavy.value()));
  }
  probs[0] = residual > 0.0 ? residual : 0.0;

  HeavyTailPair out;
  out.space = std::make_shared<const DiscreteSpace>(std::move(probs));
  out.cls = make_class(out.space, {std::vector<double>(spec.atoms + 1, 0.0), f});
  out.mass_scale = scale;
  return out;
}

double heavy_tail_tail_functional(const HeavyTailSpec& spec, std::size_t m) {
  const double scale = heavy_tail_mass_scale(spec);
  CompensatedSum tail;
  for (std::size_t l = spec.atoms; l > m; --l) {
    tail.add(std::abs(spec.a_decay(l)) / (static_cast<double>(l) * b_value(spec, l)));
  }
  return std::sqrt(static_cast<double>(m)) * scale * tail.value();
}

}  // namespace truncchain
