#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace latentopt {

enum class CovarianceMode { Full, Diagonal };

/// Dimensions above this default to the separable (diagonal) covariance.
inline constexpr int kFullCovarianceMaxDim = 512;

/// User-facing knobs; anything left empty takes the standard default.
struct CmaOverrides {
  std::optional<int> population_size;
  std::optional<int> parent_count;
  std::optional<CovarianceMode> covariance_mode;
  std::optional<int> eigen_update_interval;
};

/// Strategy parameters of a CMA-ES run. Build with make_cma_params().
struct CmaParams {
  int dim = 0;
  int population_size = 0;  // lambda
  int parent_count = 0;     // mu
  std::vector<double> weights;
  double mu_eff = 0.0;
  double c_sigma = 0.0;
  double d_sigma = 0.0;
  double c_c = 0.0;
  double c_1 = 0.0;
  double c_mu = 0.0;
  CovarianceMode covariance_mode = CovarianceMode::Full;
  int eigen_update_interval = 1;

  /// Throws InvalidArgument when an invariant is broken.
  void validate() const;
};

/// Default strategy parameters for dimension `dim`:
/// lambda = 4 + floor(3 ln n), mu = floor(lambda / 2), log-rank weights,
/// and the usual learning rates. In diagonal mode c_1 and c_mu are scaled
/// by (n + 2) / 3 as in separable CMA-ES.
CmaParams make_cma_params(int dim, const CmaOverrides& overrides = {});

struct CmaState {
  CmaParams params;
  Eigen::VectorXd mean;
  double sigma = 0.0;
  Eigen::MatrixXd cov;       // Full mode only
  Eigen::VectorXd cov_diag;  // Diagonal mode only
  Eigen::VectorXd path_sigma;
  Eigen::VectorXd path_c;
  // C = B * diag(D)^2 * B^T; B is left empty in diagonal mode.
  Eigen::MatrixXd eigen_basis;
  Eigen::VectorXd eigen_sqrt;
  bool eigen_fresh = false;  // cache matches the current C
  long eigen_generation = -1;
  long generation = 0;
  long eval_count = 0;
  double best_fitness = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x;
  std::mt19937_64 rng;

  bool is_diagonal() const { return params.covariance_mode == CovarianceMode::Diagonal; }
  /// Dense copy of C regardless of mode.
  Eigen::MatrixXd covariance() const;
};

CmaState cma_init(const Eigen::VectorXd& x0, double sigma0, const CmaParams& params,
                  std::uint64_t seed = 0);

/// Recomputes the eigendecomposition of C now.
void cma_refresh_eigen(CmaState& state);

/// Samples lambda candidates m + sigma * B * D * z. Only the generator state
/// (and a stale eigen cache) changes.
std::vector<Eigen::VectorXd> cma_ask(CmaState& state);

/// Rank-based update from a complete batch. Lower fitness is better;
/// non-finite fitnesses rank last and ties keep candidate order.
void cma_tell(CmaState& state, const std::vector<Eigen::VectorXd>& candidates,
              const std::vector<double>& fitnesses);

enum class StopReason { MaxGenerations, MaxEvaluations, TargetFitness, SigmaCollapse, ConditionBlowup };

std::string_view to_string(StopReason reason);

struct StopCriteria {
  std::optional<long> max_generations;
  std::optional<long> max_evaluations;
  std::optional<double> target_fitness;
  double sigma_tolerance = 1e-12;
  double max_condition = 1e14;
};

std::optional<StopReason> cma_should_stop(const CmaState& state, const StopCriteria& criteria);

}  // namespace latentopt
