#include "truncchain/gaussian.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "truncchain/error.hpp"
#include "truncchain/parallel.hpp"
#include "truncchain/rng.hpp"

namespace truncchain {

namespace {

constexpr double kPsdTolerance = 1e-10;
constexpr std::uint64_t kGaussianStream = 0x6761757373ULL;

MonteCarloEstimate summarize(const std::vector<double>& values) {
  MonteCarloEstimate out;
  out.replicates = values.size();
  if (values.empty()) return out;
  CompensatedSum sum;
  for (double v : values) sum.add(v);
  out.mean = sum.value() / static_cast<double>(values.size());
  if (values.size() > 1) {
    CompensatedSum sq;
    for (double v : values) sq.add((v - out.mean) * (v - out.mean));
    const double var = sq.value() / static_cast<double>(values.size() - 1);
    out.std_error = std::sqrt(var / static_cast<double>(values.size()));
  }
  return out;
}

}  // namespace

GaussianModel::GaussianModel(std::vector<std::size_t> subset, std::vector<double> covariance,
                             CovarianceMode mode)
    : subset_(std::move(subset)), cov_(std::move(covariance)), mode_(mode) {
  const std::size_t d = subset_.size();
  if (d == 0) throw Error(ErrorCode::InvalidArgument, "Gaussian model needs a nonempty subset");
  if (cov_.size() != d * d) {
    throw Error(ErrorCode::InvalidArgument, "covariance must be " + std::to_string(d) + "x" +
                                                std::to_string(d));
  }
  Eigen::MatrixXd m(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      m(i, j) = 0.5 * (cov_[i * d + j] + cov_[j * d + i]);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  const Eigen::VectorXd values = eig.eigenvalues();
  min_eig_ = values.minCoeff();
  if (min_eig_ < -kPsdTolerance) {
    throw Error(ErrorCode::NotPSD, "smallest eigenvalue " + std::to_string(min_eig_));
  }
  const Eigen::VectorXd roots = values.cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd r = eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
  root_.resize(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) root_[i * d + j] = r(i, j);
  }
}

double GaussianModel::rho2(std::size_t i, std::size_t j) const noexcept {
  if (i == j) return 0.0;
  const double v = cov(i, i) + cov(j, j) - 2.0 * cov(i, j);
  return v > 0.0 ? std::sqrt(v) : 0.0;
}

void GaussianModel::draw(std::uint64_t seed, std::size_t r, std::span<double> out) const {
  const std::size_t d = dim();
  CounterRng rng(derive_seed(seed, kGaussianStream, r));
  std::vector<double> z(d);
  for (auto& v : z) v = rng.normal();
  for (std::size_t i = 0; i < d; ++i) {
    double acc = 0.0;
    const double* row = root_.data() + i * d;
    for (std::size_t k = 0; k < d; ++k) acc += row[k] * z[k];
    out[i] = acc;
  }
}

GaussianModel build_model(const FunctionClass& cls, std::vector<std::size_t> subset,
                          CovarianceMode mode) {
  if (subset.empty()) throw Error(ErrorCode::InvalidArgument, "subset is empty");
  for (auto f : subset) {
    if (f >= cls.size()) throw Error(ErrorCode::InvalidArgument, "subset index " + std::to_string(f));
  }
  const std::size_t d = subset.size();
  const DiscreteSpace& space = cls.space();
  std::vector<double> cov(d * d, 0.0);
  std::vector<double> prod(cls.atom_count());
  for (std::size_t i = 0; i < d; ++i) {
    const auto fi = cls.row(subset[i]);
    for (std::size_t j = i; j < d; ++j) {
      const auto fj = cls.row(subset[j]);
      for (std::size_t a = 0; a < prod.size(); ++a) prod[a] = fi[a] * fj[a];
      double c = expectation(space, prod);
      if (mode == CovarianceMode::Bridge) c -= cls.means()[subset[i]] * cls.means()[subset[j]];
      cov[i * d + j] = c;
      cov[j * d + i] = c;
    }
  }
  return GaussianModel(std::move(subset), std::move(cov), mode);
}

GaussianModel build_full_model(const FunctionClass& cls, CovarianceMode mode) {
  std::vector<std::size_t> all(cls.size());
  for (std::size_t f = 0; f < all.size(); ++f) all[f] = f;
  return build_model(cls, std::move(all), mode);
}

std::vector<double> sample_gaussian(const GaussianModel& model, std::size_t replicates,
                                    std::uint64_t seed, unsigned threads) {
  if (replicates == 0) throw Error(ErrorCode::InvalidArgument, "replicates must be at least 1");
  const std::size_t d = model.dim();
  std::vector<double> out(replicates * d);
  parallel_for(replicates, threads, [&](std::size_t r) {
    model.draw(seed, r, std::span<double>(out).subspan(r * d, d));
  });
  return out;
}

MonteCarloEstimate sup_expectation(const GaussianModel& model, std::size_t replicates,
                                   std::uint64_t seed, unsigned threads,
                                   std::span<const std::size_t> columns) {
  if (replicates == 0) throw Error(ErrorCode::InvalidArgument, "replicates must be at least 1");
  for (auto c : columns) {
    if (c >= model.dim()) throw Error(ErrorCode::InvalidArgument, "column out of range");
  }
  std::vector<double> sups(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) {
    std::vector<double> g(model.dim());
    model.draw(seed, r, g);
    double m = 0.0;
    if (columns.empty()) {
      for (double v : g) m = std::max(m, std::abs(v));
    } else {
      for (auto c : columns) m = std::max(m, std::abs(g[c]));
    }
    sups[r] = m;
  });
  return summarize(sups);
}

MonteCarloEstimate continuity_modulus(const GaussianModel& model, double delta,
                                      std::size_t replicates, std::uint64_t seed,
                                      unsigned threads) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
  if (replicates == 0) throw Error(ErrorCode::InvalidArgument, "replicates must be at least 1");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < model.dim(); ++i) {
    for (std::size_t j = i + 1; j < model.dim(); ++j) {
      if (model.rho2(i, j) <= delta) pairs.emplace_back(i, j);
    }
  }
  std::vector<double> sups(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) {
    std::vector<double> g(model.dim());
    model.draw(seed, r, g);
    double m = 0.0;
    for (auto [i, j] : pairs) m = std::max(m, std::abs(g[i] - g[j]));
    sups[r] = m;
  });
  return summarize(sups);
}

std::string covariance_csv(const GaussianModel& model) {
  std::string out = "function";
  char buf[64];
  for (auto f : model.subset()) out += "," + std::to_string(f);
  out += '\n';
  for (std::size_t i = 0; i < model.dim(); ++i) {
    out += std::to_string(model.subset()[i]);
    for (std::size_t j = 0; j < model.dim(); ++j) {
      std::snprintf(buf, sizeof buf, ",%.17g", model.cov(i, j));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace truncchain
