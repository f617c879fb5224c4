#include "latentopt/cma_es.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "latentopt/errors.hpp"

namespace latentopt {

namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

// Expected norm of an n-dimensional standard normal vector.
double chi_n(int n) {
  const double nd = n;
  return std::sqrt(nd) * (1.0 - 1.0 / (4.0 * nd) + 1.0 / (21.0 * nd * nd));
}

}  // namespace

void CmaParams::validate() const {
  if (dim <= 0) throw InvalidArgument("cma: dim must be positive");
  if (population_size <= 0) throw InvalidArgument("cma: population size must be positive");
  if (parent_count <= 0 || parent_count > population_size)
    throw InvalidArgument("cma: parent count must be in [1, population size]");
  if (static_cast<int>(weights.size()) != parent_count)
    throw InvalidArgument("cma: need one recombination weight per parent");
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0)) throw InvalidArgument("cma: weights must be positive");
    if (i > 0 && weights[i] > weights[i - 1]) throw InvalidArgument("cma: weights must be non-increasing");
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InvalidArgument("cma: weights must sum to 1");
  if (!(c_sigma > 0.0 && c_sigma <= 1.0) || !(c_c > 0.0 && c_c <= 1.0) || !(c_1 > 0.0 && c_1 <= 1.0) ||
      !(c_mu >= 0.0 && c_mu <= 1.0))
    throw InvalidArgument("cma: learning rates must lie in (0, 1]");
  if (c_1 + c_mu > 1.0 + 1e-15) throw InvalidArgument("cma: c_1 + c_mu must not exceed 1");
  if (!(d_sigma >= 1.0)) throw InvalidArgument("cma: d_sigma must be >= 1");
  if (eigen_update_interval <= 0) throw InvalidArgument("cma: eigen update interval must be positive");
}

CmaParams make_cma_params(int dim, const CmaOverrides& overrides) {
  if (dim <= 0) throw InvalidArgument("cma: dim must be positive");
  CmaParams p;
  p.dim = dim;
  const double n = dim;
  p.population_size =
      overrides.population_size.value_or(4 + static_cast<int>(std::floor(3.0 * std::log(n))));
  if (p.population_size <= 0) throw InvalidArgument("cma: population size must be positive");
  p.parent_count = overrides.parent_count.value_or(p.population_size / 2);
  if (p.parent_count <= 0 || p.parent_count > p.population_size)
    throw InvalidArgument("cma: parent count must be in [1, population size]");
  p.covariance_mode = overrides.covariance_mode.value_or(dim > kFullCovarianceMaxDim ? CovarianceMode::Diagonal
                                                                                     : CovarianceMode::Full);

  const double lambda = p.population_size;
  p.weights.resize(p.parent_count);
  for (int i = 0; i < p.parent_count; ++i) p.weights[i] = std::log((lambda + 1.0) / 2.0) - std::log(i + 1.0);
  if (p.parent_count == 1 || p.weights.back() <= 0.0) {
    // lambda too small for log-rank weights to stay positive; fall back to equal weights
    std::fill(p.weights.begin(), p.weights.end(), 1.0);
  }
  const double wsum = std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
  for (double& w : p.weights) w /= wsum;
  double sq = 0.0;
  for (double w : p.weights) sq += w * w;
  p.mu_eff = 1.0 / sq;

  const double mu_eff = p.mu_eff;
  p.c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
  p.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0) + p.c_sigma;
  p.c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
  p.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff);
  p.c_mu = std::min(1.0 - p.c_1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0) * (n + 2.0) + mu_eff));
  if (p.covariance_mode == CovarianceMode::Diagonal) {
    const double scale = (n + 2.0) / 3.0;
    p.c_1 = std::min(1.0, p.c_1 * scale);
    p.c_mu = std::min(1.0 - p.c_1, p.c_mu * scale);
  }
  p.c_mu = std::max(0.0, p.c_mu);
  p.eigen_update_interval = overrides.eigen_update_interval.value_or(
      std::max(1, static_cast<int>(std::floor(1.0 / (10.0 * n * (p.c_1 + p.c_mu))))));
  p.validate();
  return p;
}

Eigen::MatrixXd CmaState::covariance() const {
  if (is_diagonal()) return cov_diag.asDiagonal();
  return cov;
}

CmaState cma_init(const Eigen::VectorXd& x0, double sigma0, const CmaParams& params, std::uint64_t seed) {
  params.validate();
  if (x0.size() != params.dim)
    throw InvalidArgument("cma_init: x0 has length " + std::to_string(x0.size()) + ", expected " +
                          std::to_string(params.dim));
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw InvalidArgument("cma_init: sigma0 must be positive");
  if (!all_finite(x0)) throw NumericError("cma_init: x0 has non-finite entries");

  CmaState s;
  s.params = params;
  s.mean = x0;
  s.sigma = sigma0;
  const int n = params.dim;
  if (s.is_diagonal()) {
    s.cov_diag = Eigen::VectorXd::Ones(n);
    s.eigen_sqrt = Eigen::VectorXd::Ones(n);
  } else {
    s.cov = Eigen::MatrixXd::Identity(n, n);
    s.eigen_basis = Eigen::MatrixXd::Identity(n, n);
    s.eigen_sqrt = Eigen::VectorXd::Ones(n);
  }
  s.eigen_fresh = true;
  s.eigen_generation = 0;
  s.path_sigma = Eigen::VectorXd::Zero(n);
  s.path_c = Eigen::VectorXd::Zero(n);
  s.rng.seed(seed);
  return s;
}

void cma_refresh_eigen(CmaState& s) {
  if (s.is_diagonal()) {
    s.eigen_sqrt = s.cov_diag.cwiseSqrt();
  } else {
    s.cov = 0.5 * (s.cov + s.cov.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s.cov);
    if (solver.info() != Eigen::Success) throw NumericError("cma: eigendecomposition failed");
    s.eigen_basis = solver.eigenvectors();
    s.eigen_sqrt = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  }
  s.eigen_fresh = true;
  s.eigen_generation = s.generation;
}

std::vector<Eigen::VectorXd> cma_ask(CmaState& s) {
  if (!std::isfinite(s.sigma) || !(s.sigma > 0.0) || !all_finite(s.mean))
    throw NumericError("cma_ask: state has non-finite mean or step size");
  // Lazy rule: C may drift from the cached B, D for up to eigen_update_interval generations.
  if (s.eigen_generation < 0 || s.generation - s.eigen_generation >= s.params.eigen_update_interval)
    cma_refresh_eigen(s);

  const int n = s.params.dim;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  out.reserve(s.params.population_size);
  Eigen::VectorXd z(n);
  for (int k = 0; k < s.params.population_size; ++k) {
    for (int i = 0; i < n; ++i) z[i] = normal(s.rng);
    Eigen::VectorXd y = s.eigen_sqrt.cwiseProduct(z);
    if (!s.is_diagonal()) y = s.eigen_basis * y;
    out.emplace_back(s.mean + s.sigma * y);
  }
  return out;
}

void cma_tell(CmaState& s, const std::vector<Eigen::VectorXd>& candidates, const std::vector<double>& fitnesses) {
  const CmaParams& p = s.params;
  const int n = p.dim;
  const int lambda = p.population_size;
  if (static_cast<int>(candidates.size()) != lambda || static_cast<int>(fitnesses.size()) != lambda)
    throw InvalidArgument("cma_tell: expected " + std::to_string(lambda) + " candidates and fitnesses");
  for (const auto& c : candidates)
    if (c.size() != n) throw InvalidArgument("cma_tell: candidate dimension mismatch");
  if (std::none_of(fitnesses.begin(), fitnesses.end(), [](double f) { return std::isfinite(f); }))
    throw NumericError("cma_tell: all fitnesses are non-finite");

  std::vector<int> order(lambda);
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](int i) {
    return std::isfinite(fitnesses[i]) ? fitnesses[i] : std::numeric_limits<double>::infinity();
  };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(a) < key(b); });

  if (key(order[0]) < s.best_fitness) {
    s.best_fitness = key(order[0]);
    s.best_x = candidates[order[0]];
  }

  const Eigen::VectorXd old_mean = s.mean;
  Eigen::VectorXd new_mean = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < p.parent_count; ++i) new_mean += p.weights[i] * candidates[order[i]];
  const Eigen::VectorXd y_w = (new_mean - old_mean) / s.sigma;

  // C^{-1/2} y_w with the eigen cache used to sample this batch
  Eigen::VectorXd c_inv_sqrt_y;
  if (s.is_diagonal()) {
    c_inv_sqrt_y = y_w.cwiseQuotient(s.eigen_sqrt);
  } else {
    c_inv_sqrt_y = s.eigen_basis * (s.eigen_basis.transpose() * y_w).cwiseQuotient(s.eigen_sqrt);
  }

  s.path_sigma = (1.0 - p.c_sigma) * s.path_sigma + std::sqrt(p.c_sigma * (2.0 - p.c_sigma) * p.mu_eff) * c_inv_sqrt_y;
  const double ps_norm = s.path_sigma.norm();
  const double decay = 1.0 - std::pow(1.0 - p.c_sigma, 2.0 * (s.generation + 1));
  const bool h_sigma = ps_norm / std::sqrt(decay) < (1.4 + 2.0 / (n + 1.0)) * chi_n(n);

  s.path_c = (1.0 - p.c_c) * s.path_c;
  if (h_sigma) s.path_c += std::sqrt(p.c_c * (2.0 - p.c_c) * p.mu_eff) * y_w;
  const double delta_h = h_sigma ? 0.0 : p.c_c * (2.0 - p.c_c);

  const double keep = 1.0 - p.c_1 - p.c_mu;
  if (s.is_diagonal()) {
    Eigen::VectorXd rank_mu = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < p.parent_count; ++i) {
      const Eigen::VectorXd y = (candidates[order[i]] - old_mean) / s.sigma;
      rank_mu += p.weights[i] * y.cwiseProduct(y);
    }
    s.cov_diag = keep * s.cov_diag + p.c_1 * (s.path_c.cwiseProduct(s.path_c) + delta_h * s.cov_diag) +
                 p.c_mu * rank_mu;
  } else {
    Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < p.parent_count; ++i) {
      const Eigen::VectorXd y = (candidates[order[i]] - old_mean) / s.sigma;
      rank_mu.noalias() += p.weights[i] * y * y.transpose();
    }
    s.cov = keep * s.cov + p.c_1 * (s.path_c * s.path_c.transpose() + delta_h * s.cov) + p.c_mu * rank_mu;
    s.cov = 0.5 * (s.cov + s.cov.transpose());
  }

  s.sigma *= std::exp((p.c_sigma / p.d_sigma) * (ps_norm / chi_n(n) - 1.0));
  s.mean = new_mean;
  s.generation += 1;
  s.eval_count += lambda;
  s.eigen_fresh = false;
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::MaxGenerations: return "MaxGenerations";
    case StopReason::MaxEvaluations: return "MaxEvaluations";
    case StopReason::TargetFitness: return "TargetFitness";
    case StopReason::SigmaCollapse: return "SigmaCollapse";
    case StopReason::ConditionBlowup: return "ConditionBlowup";
  }
  return "Unknown";
}

std::optional<StopReason> cma_should_stop(const CmaState& s, const StopCriteria& c) {
  if (c.max_generations && s.generation >= *c.max_generations) return StopReason::MaxGenerations;
  if (c.max_evaluations && s.eval_count >= *c.max_evaluations) return StopReason::MaxEvaluations;
  if (c.target_fitness && s.best_fitness < *c.target_fitness) return StopReason::TargetFitness;
  const double max_var = s.is_diagonal() ? s.cov_diag.maxCoeff() : s.cov.diagonal().maxCoeff();
  if (s.sigma * std::sqrt(max_var) < c.sigma_tolerance) return StopReason::SigmaCollapse;
  if (!s.is_diagonal() && s.eigen_sqrt.size() > 0) {
    const double dmin = s.eigen_sqrt.minCoeff();
    const double dmax = s.eigen_sqrt.maxCoeff();
    if (dmin <= 0.0 || (dmax * dmax) / (dmin * dmin) > c.max_condition) return StopReason::ConditionBlowup;
  }
  return std::nullopt;
}

}  // namespace latentopt
