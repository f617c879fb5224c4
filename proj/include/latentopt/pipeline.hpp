#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "latentopt/adam.hpp"
#include "latentopt/cma_es.hpp"
#include "latentopt/gateway.hpp"
#include "latentopt/losses.hpp"

namespace latentopt {

enum class GradientSource { Backend, FiniteDifference };

struct InversionConfig {
  int refine_iterations = 100;
  AdamConfig adam;
  GradientSource gradient_source = GradientSource::Backend;
  double fd_step = 1e-5;
  std::optional<double> target_lpips;
  /// Abort when lpips rises this many steps in a row.
  int divergence_patience = 20;

  void validate() const;
};

struct InversionReport {
  double lpips_before = 0.0;
  double lpips_after = 0.0;
  int steps = 0;
  long eval_count = 0;  // objective probes spent on finite differences
};

struct InversionResult {
  LatentPoint x0;
  LatentPoint encoded;
  Eigen::VectorXd ref_features;
  InversionReport report;
};

/// Encoder projection followed by Adam refinement of the plain perceptual
/// loss. The best iterate seen is returned, so lpips_after <= lpips_before.
InversionResult invert(const ImageTensor& image, ModelGateway& gateway, const InversionConfig& cfg);

struct BeautifyConfig {
  double sigma0 = 0.06;
  int generations = 300;
  CmaOverrides cma{std::nullopt, std::nullopt, CovarianceMode::Diagonal, std::nullopt};
  StopCriteria stop;  // max_generations is taken from `generations`
  LossWeights weights;
  std::optional<LayerMask> layer_mask;
  std::uint64_t seed = 0;
  int retries = 2;
  /// Mean snapshots are kept every generation up to this optimizer dimension,
  /// and every `snapshot_stride` generations (plus first and last) above it.
  int full_snapshot_max_dim = kFullCovarianceMaxDim;
  int snapshot_stride = 5;

  void validate() const;
};

struct TrajectoryRecord {
  long generation = 0;
  double sigma = 0.0;
  double best_fitness = 0.0;  // best combined loss seen so far, x0 included
  double mean_fitness = 0.0;  // mean over this generation's finite fitnesses
  LossBreakdown best;         // breakdown of the best-so-far latent
  std::optional<Eigen::VectorXd> mean_snapshot;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  nlohmann::json metadata = nlohmann::json::object();

  /// One row per generation with the columns
  /// generation,sigma,best_fitness,mean_fitness,lpips,beauty,raw_score,hinge_active
  std::string to_csv() const;
};

struct BeautifyResult {
  LatentPoint x_optimal;
  LossBreakdown initial;
  LossBreakdown final;
  Trajectory trajectory;
  std::string stop_reason;
  long eval_count = 0;
};

BeautifyResult beautify(const LatentPoint& x0, const ImageTensor& image_ref, GatewayPool& pool,
                        const BeautifyConfig& cfg);
BeautifyResult beautify(const LatentPoint& x0, const ImageTensor& image_ref, ModelGateway& gateway,
                        const BeautifyConfig& cfg);

ImageTensor render_final(const LatentPoint& x_optimal, ModelGateway& gateway);

struct RunReport {
  LatentPoint x0;
  LatentPoint x_optimal;
  InversionReport inversion;
  LossBreakdown initial;
  LossBreakdown final;
  std::string stop_reason;
  double wall_clock_seconds = 0.0;
  long eval_count = 0;
  nlohmann::json metadata = nlohmann::json::object();

  nlohmann::json to_json() const;
};

struct RunArtifacts {
  RunReport report;
  Trajectory trajectory;
  ImageTensor reconstruction;
  ImageTensor final_image;
};

/// invert -> beautify -> render_final. When `output_dir` is given, writes
/// report.json, trajectory.csv, latent dumps and the three images there.
/// Errors are rethrown with the failing stage prefixed.
RunArtifacts run_full(const ImageTensor& image, GatewayPool& pool, const InversionConfig& inversion,
                      const BeautifyConfig& beautify_cfg, const std::optional<std::filesystem::path>& output_dir = {},
                      nlohmann::json metadata = nlohmann::json::object());

nlohmann::json to_json(const LossBreakdown& b);

}  // namespace latentopt
