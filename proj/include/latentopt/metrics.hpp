#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace latentopt {

struct MetricReport {
  double mae = 0.0;
  double rmse = 0.0;
  double pearson = 0.0;
  std::size_t n = 0;

  nlohmann::json to_json() const;
};

/// MAE, RMSE and Pearson correlation. Zero variance in either vector leaves
/// Pearson undefined and throws InvalidArgument.
MetricReport compute_metrics(std::span<const double> predictions, std::span<const double> targets);

struct PredictionTable {
  std::vector<double> predictions;
  std::vector<double> targets;
};

/// Two-column CSV (prediction, target) with one header row. Throws
/// InvalidArgument naming the 1-based line of the first bad row.
PredictionTable read_prediction_csv(const std::filesystem::path& path);
PredictionTable parse_prediction_csv(const std::string& text);

/// Shuffles 0..n-1 with the seeded SplitMix64 Fisher-Yates and deals the
/// result round-robin into k folds; each fold is returned sorted.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace latentopt
