#include "truncchain/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "truncchain/error.hpp"

namespace truncchain {

void EstimatorConfig::validate() const {
  if (!(c0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "c0 must be positive");
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
  if (const auto* u = std::get_if<Universal>(&rule); u && !(u->b_exponent > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "universal rule needs b_exponent > 0");
  }
}

namespace {

std::size_t first_level(const EstimatorConfig& config) {
  if (const auto* t = std::get_if<TailFrom>(&config.rule)) return t->s0 + 1;
  return 1;
}

double level_lambda(double norm, std::size_t s, std::size_t n, const EstimatorConfig& config) {
  const double shrink = std::pow(2.0, -0.5 * static_cast<double>(s));
  const double dn = static_cast<double>(n);
  if (const auto* u = std::get_if<Universal>(&config.rule)) {
    return std::pow(dn, u->b_exponent) * norm * shrink;
  }
  return config.c0 * std::sqrt(dn) * norm * shrink;
}

// Lambda for every level of one function; index 0 unused.
std::vector<double> lambdas(const ChainDecomposition& decomp, std::size_t f,
                            const EstimatorConfig& config) {
  std::vector<double> out(decomp.s_max() + 1, 0.0);
  for (std::size_t s = 1; s <= decomp.s_max(); ++s) {
    out[s] = level_lambda(decomp.l2_norm(s, f), s, config.n, config);
  }
  return out;
}

bool all_kept_sqrt_n(const ChainDecomposition& decomp, std::size_t f, double c0, std::size_t n) {
  EstimatorConfig config;
  config.c0 = c0;
  config.n = n;
  for (std::size_t s = 1; s <= decomp.s_max(); ++s) {
    if (decomp.max_abs(s, f) > level_lambda(decomp.l2_norm(s, f), s, n, config)) return false;
  }
  return true;
}

}  // namespace

double truncation_level(const ChainDecomposition& decomp, std::size_t f, std::size_t s,
                        const EstimatorConfig& config) {
  config.validate();
  if (s < 1 || s > decomp.s_max()) {
    throw Error(ErrorCode::LevelOutOfRange,
                "level " + std::to_string(s) + " outside 1.." + std::to_string(decomp.s_max()));
  }
  return level_lambda(decomp.l2_norm(s, f), s, config.n, config);
}

bool ModifiedFunction::identity() const noexcept {
  return std::all_of(kept_mask.begin(), kept_mask.end(), [](std::uint8_t k) { return k != 0; });
}

ModifiedFunction phi(const ChainDecomposition& decomp, std::size_t f, const EstimatorConfig& config) {
  config.validate();
  const std::size_t atoms = decomp.atom_count();
  const std::size_t s_max = decomp.s_max();
  const std::size_t start = first_level(config);
  const auto lambda = lambdas(decomp, f, config);
  const FunctionClass& cls = decomp.cls();

  ModifiedFunction out;
  out.atoms = atoms;
  out.values.assign(atoms, 0.0);
  out.kept_mask.assign(s_max * atoms, 0);
  for (std::size_t s = start; s <= s_max; ++s) {
    const auto inc = decomp.increment(s, f);
    for (std::size_t a = 0; a < atoms; ++a) {
      out.kept_mask[(s - 1) * atoms + a] = std::abs(inc[a]) <= lambda[s] ? 1 : 0;
    }
  }

  for (std::size_t a = 0; a < atoms; ++a) {
    double value = 0.0;
    std::size_t run_start = 0;  // 0: not inside a run
    for (std::size_t s = 1; s <= s_max + 1; ++s) {
      const bool keep = s <= s_max && out.kept(s, a);
      if (keep && run_start == 0) run_start = s;
      if (!keep && run_start != 0) {
        value += cls.value(decomp.pi(s - 1, f), a) - cls.value(decomp.pi(run_start - 1, f), a);
        run_start = 0;
      }
    }
    out.values[a] = value;
  }
  return out;
}

double identity_threshold(const ChainDecomposition& decomp, std::size_t f, double c0) {
  double n0 = 0.0;
  for (std::size_t s = 1; s <= decomp.s_max(); ++s) {
    const double m = decomp.max_abs(s, f);
    const double norm = decomp.l2_norm(s, f);
    if (m == 0.0) continue;
    if (norm == 0.0) return std::numeric_limits<double>::infinity();
    n0 = std::max(n0, std::pow(2.0, static_cast<double>(s)) * m * m / (c0 * c0 * norm * norm));
  }
  return n0;
}

std::size_t identity_sample_size(const ChainDecomposition& decomp, std::size_t f, double c0) {
  const double n0 = identity_threshold(decomp, f, c0);
  if (!std::isfinite(n0) || n0 > 1e18) return 0;
  auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(n0)));
  while (!all_kept_sqrt_n(decomp, f, c0, n)) ++n;
  while (n > 1 && all_kept_sqrt_n(decomp, f, c0, n - 1)) --n;
  return n;
}

bool identity_regime(const ChainDecomposition& decomp, const EstimatorConfig& config) {
  config.validate();
  if (first_level(config) > 1) {
    for (std::size_t f = 0; f < decomp.size(); ++f) {
      for (std::size_t s = 1; s < first_level(config) && s <= decomp.s_max(); ++s) {
        if (decomp.max_abs(s, f) != 0.0) return false;
      }
    }
  }
  for (std::size_t f = 0; f < decomp.size(); ++f) {
    for (std::size_t s = first_level(config); s <= decomp.s_max(); ++s) {
      if (decomp.max_abs(s, f) > level_lambda(decomp.l2_norm(s, f), s, config.n, config)) {
        return false;
      }
    }
  }
  return true;
}

ModifiedProcess::ModifiedProcess(const ChainDecomposition& decomp, const EstimatorConfig& config)
    : n_(config.n) {
  config.validate();
  const FunctionClass& cls = decomp.cls();
  phi_.reserve(decomp.size());
  for (std::size_t f = 0; f < decomp.size(); ++f) {
    phi_.push_back(truncchain::phi(decomp, f, config).values);
    phi_means_.push_back(expectation(cls.space(), phi_.back()));
  }
  means_ = cls.means();
}

double ModifiedProcess::empirical_mean(std::size_t f, std::span<const std::uint32_t> counts) const {
  const auto& values = phi_[f];
  double sum = 0.0;
  for (std::size_t a = 0; a < counts.size(); ++a) {
    if (counts[a] != 0) sum += static_cast<double>(counts[a]) * values[a];
  }
  return sum / static_cast<double>(n_);
}

double ModifiedProcess::centered(std::size_t f, std::span<const std::uint32_t> counts) const {
  return std::sqrt(static_cast<double>(n_)) * (empirical_mean(f, counts) - means_[f]);
}

double modified_process(const Sample& sample, const ChainDecomposition& decomp, std::size_t f,
                        const EstimatorConfig& config) {
  const auto counts = atom_counts(decomp.cls().space(), sample);
  if (sample.size() != config.n) {
    throw Error(ErrorCode::InvalidArgument, "sample size " + std::to_string(sample.size()) +
                                                " differs from config n " + std::to_string(config.n));
  }
  EstimatorConfig single = config;
  const ModifiedFunction mf = phi(decomp, f, single);
  double sum = 0.0;
  for (std::size_t a = 0; a < counts.size(); ++a) {
    if (counts[a] != 0) sum += static_cast<double>(counts[a]) * mf.values[a];
  }
  const double n = static_cast<double>(config.n);
  return std::sqrt(n) * (sum / n - decomp.cls().means()[f]);
}

BiasReport exact_bias(const ChainDecomposition& decomp, const EstimatorConfig& config) {
  config.validate();
  const std::size_t size = decomp.size();
  const std::size_t s_max = decomp.s_max();
  const std::size_t start = first_level(config);
  const auto probs = decomp.cls().space().probs();

  BiasReport report;
  report.bias.assign(size, 0.0);
  report.tail_terms.assign(s_max * size, 0.0);
  double worst = -1.0;
  for (std::size_t f = 0; f < size; ++f) {
    CompensatedSum removed;
    for (std::size_t s = 1; s <= s_max; ++s) {
      const double lambda = level_lambda(decomp.l2_norm(s, f), s, config.n, config);
      const auto inc = decomp.increment(s, f);
      CompensatedSum tail;
      for (std::size_t a = 0; a < inc.size(); ++a) {
        if (probs[a] == 0.0) continue;
        const bool over = std::abs(inc[a]) > lambda;
        if (over) tail.add(probs[a] * std::abs(inc[a]));
        if (s < start || over) removed.add(probs[a] * inc[a]);
      }
      report.tail_terms[(s - 1) * size + f] = tail.value();
    }
    report.bias[f] = -removed.value();
    if (std::abs(report.bias[f]) > worst) {
      worst = std::abs(report.bias[f]);
      report.worst_function = f;
    }
  }
  report.scaled_sup_bias = std::sqrt(static_cast<double>(config.n)) * worst;
  return report;
}

double bernstein_tail(double t, std::size_t n, double sigma2, double M) {
  if (!(t > 0.0) || !(sigma2 >= 0.0) || !(M > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "bernstein_tail needs t > 0, sigma2 >= 0, M > 0");
  }
  const double dn = static_cast<double>(n);
  return 2.0 * std::exp(-dn * t * t / (2.0 * sigma2 + (2.0 / 3.0) * M * t));
}

double ChainConstants::kappa() const noexcept {
  return c3 * c3 / (2.0 + (4.0 / 3.0) * c0 * c3);
}

double ChainConstants::level_c2() const noexcept {
  return kappa() - 8.0 * std::numbers::ln2;
}

double ChainConstants::global_c2() const noexcept {
  return (1.0 + std::numbers::sqrt2) * std::max(c3, 1.0 / c0);
}

namespace {

void check_u(double u) {
  if (!(u > 0.5)) throw Error(ErrorCode::BadU, "u must exceed 1/2, got " + std::to_string(u));
}

// log of 2^{2^{s+1}} * 2 exp(-c3^2 u^2 2^s / (2 + (4/3) c0 c3 u)).
double log_level_failure(double u, std::size_t s, const ChainConstants& k) {
  const double two_s = std::pow(2.0, static_cast<double>(s));
  const double exponent = k.c3 * k.c3 * u * u * two_s / (2.0 + (4.0 / 3.0) * k.c0 * k.c3 * u);
  return 2.0 * two_s * std::numbers::ln2 + std::numbers::ln2 - exponent;
}

}  // namespace

LevelDeviationBound level_deviation_bound(double u, std::size_t s, std::size_t n,
                                          const ChainConstants& constants) {
  check_u(u);
  if (s < 1) throw Error(ErrorCode::LevelOutOfRange, "levels start at 1");
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
  LevelDeviationBound out;
  out.u = u;
  out.s = s;
  out.c3 = constants.c3;
  out.c2 = constants.level_c2();
  const double two_s = std::pow(2.0, static_cast<double>(s));
  out.threshold_scale = constants.c3 * u * std::sqrt(two_s) / std::sqrt(static_cast<double>(n));
  out.failure_probability = std::min(1.0, std::exp(log_level_failure(u, s, constants)));
  out.closed_form_probability = 2.0 * std::exp(-out.c2 * two_s * std::min(u * u, u));
  return out;
}

double global_deviation_bound(double u, double gamma2_estimate, std::size_t n,
                              const ChainConstants& constants) {
  check_u(u);
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
  return constants.global_c2() * (u + 1.0) * gamma2_estimate / std::sqrt(static_cast<double>(n));
}

double deviation_success_probability(double u, std::size_t s0, std::size_t s_max,
                                     const ChainConstants& constants) {
  check_u(u);
  double failure = 0.0;
  for (std::size_t s = s0 + 1; s <= s_max; ++s) {
    failure += std::exp(log_level_failure(u, s, constants));
  }
  return std::clamp(1.0 - failure, 0.0, 1.0);
}

double tail_deviation_bound(const ChainDecomposition& decomp, double u, std::size_t s0,
                            std::size_t n, const ChainConstants& constants) {
  check_u(u);
  double sup = 0.0;
  for (std::size_t f = 0; f < decomp.size(); ++f) {
    double total = 0.0;
    for (std::size_t s = s0 + 1; s <= decomp.s_max(); ++s) {
      total += std::sqrt(std::pow(2.0, static_cast<double>(s))) * decomp.l2_norm(s, f);
    }
    sup = std::max(sup, total);
  }
  return constants.c3 * u * sup / std::sqrt(static_cast<double>(n));
}

double cor15_constant() noexcept {
  // Chain the Bernstein inequality over levels with x_s = 2^s (t + 2 ln 2):
  // the union over at most 2^{2^{s+1}} increments fails with probability
  // <= 2 exp(-2^s t), summing to C e^{-2t} for t >= 1 with C = 2 / (1 - e^{-2}).
  // On the good event sup_f |(P_n - P) f| <= a sqrt(t + k) + b (t + k) with
  // a = sqrt(2) A / sqrt(n), b = (2/3) B / n, A = sup_f sum 2^{s/2} ||Delta_s||_2
  // <= (1 + sqrt 2) gamma2 and B = sup_f sum 2^s ||Delta_s||_inf <= 3 gamma1.
  // Integrating the tail from t = 1 gives the coefficients below.
  const double k = 2.0 * std::numbers::ln2;
  const double big_c = 2.0 / (1.0 - std::exp(-2.0));
  const double tail = big_c * std::exp(-2.0);
  const double a_coef = std::sqrt(1.0 + k) + tail / (4.0 * std::sqrt(1.0 + k));
  const double b_coef = (1.0 + k) + tail / 2.0;
  const double gamma2_coef = std::numbers::sqrt2 * (1.0 + std::numbers::sqrt2) * a_coef;
  const double gamma1_coef = (2.0 / 3.0) * 3.0 * b_coef;
  return std::max(gamma2_coef, gamma1_coef);
}

double expectation_bound_cor15(double gamma2_estimate, double gamma1_estimate, std::size_t n,
                               double c) {
  if (!(gamma2_estimate >= 0.0) || !(gamma1_estimate >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "gamma estimates must be nonnegative");
  }
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
  const double dn = static_cast<double>(n);
  return c * (gamma2_estimate / std::sqrt(dn) + gamma1_estimate / dn);
}

}  // namespace truncchain
