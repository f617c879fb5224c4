#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "latentopt/errors.hpp"
#include "latentopt/pipeline.hpp"

namespace latentopt {

/// Everything a `beautify` / `invert` run needs. Parsed from one JSON
/// document; unknown keys are rejected. Schema (all keys optional):
///
///   backend        "toy" | "mock" | "tcp://host:port" | "exec:<command>"
///   seed           unsigned integer
///   output_dir     path
///   pool_size      positive integer
///   inversion      { refine_iterations, gradient_source ("backend" | "finite_difference"),
///                    fd_step, target_lpips, divergence_patience,
///                    adam: { step_size, decay_m, decay_v, epsilon } }
///   beautify       { sigma0, generations, retries, snapshot_stride, layer_mask: [int],
///                    weights: { beta1, beta2, theta, c_max },
///                    cma: { population_size, parent_count, covariance_mode ("full" | "diagonal"),
///                           eigen_update_interval },
///                    stop: { max_evaluations, target_fitness, sigma_tolerance, max_condition } }
struct RunConfig {
  std::optional<std::string> backend;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "runs/latest";
  int pool_size = 1;
  InversionConfig inversion;
  BeautifyConfig beautify;

  /// Fully resolved configuration, defaults included.
  nlohmann::json to_json() const;
};

/// Throws ConfigError with the offending key path.
RunConfig parse_run_config(const nlohmann::json& doc);
/// Throws ConfigError; a missing file is reported distinctly via ConfigNotFound.
RunConfig load_run_config(const std::filesystem::path& path);

class ConfigNotFound : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace latentopt
