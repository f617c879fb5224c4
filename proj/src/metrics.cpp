#include "latentopt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "latentopt/artifacts.hpp"
#include "latentopt/errors.hpp"
#include "latentopt/rng.hpp"

namespace latentopt {

nlohmann::json MetricReport::to_json() const {
  return nlohmann::json{{"mae", mae}, {"rmse", rmse}, {"pearson", pearson}, {"n", n}};
}

MetricReport compute_metrics(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) throw InvalidArgument("metrics: prediction and target counts differ");
  if (predictions.size() < 2) throw InvalidArgument("metrics: need at least two samples");
  const std::size_t n = predictions.size();
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(predictions[i]) || !std::isfinite(targets[i])) throw NumericError("metrics: non-finite value");

  double abs_sum = 0.0;
  double sq_sum = 0.0;
  double p_mean = 0.0;
  double t_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = predictions[i] - targets[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
    p_mean += predictions[i];
    t_mean += targets[i];
  }
  p_mean /= static_cast<double>(n);
  t_mean /= static_cast<double>(n);

  double cov = 0.0;
  double p_var = 0.0;
  double t_var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dp = predictions[i] - p_mean;
    const double dt = targets[i] - t_mean;
    cov += dp * dt;
    p_var += dp * dp;
    t_var += dt * dt;
  }
  if (p_var == 0.0) throw InvalidArgument("metrics: predictions have zero variance, Pearson correlation is undefined");
  if (t_var == 0.0) throw InvalidArgument("metrics: targets have zero variance, Pearson correlation is undefined");

  MetricReport r;
  r.n = n;
  r.mae = abs_sum / static_cast<double>(n);
  r.rmse = std::sqrt(sq_sum / static_cast<double>(n));
  r.pearson = std::clamp(cov / std::sqrt(p_var * t_var), -1.0, 1.0);
  return r;
}

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool parse_double(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  char* end = nullptr;
  out = std::strtod(cell.c_str(), &end);
  return end == cell.c_str() + cell.size() && std::isfinite(out);
}

}  // namespace

PredictionTable parse_prediction_csv(const std::string& text) {
  PredictionTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw InvalidArgument("row " + std::to_string(line_no) + ": expected exactly two columns");
    double p = 0.0;
    double t = 0.0;
    if (!parse_double(trim(line.substr(0, comma)), p) || !parse_double(trim(line.substr(comma + 1)), t))
      throw InvalidArgument("row " + std::to_string(line_no) + ": non-numeric cell");
    table.predictions.push_back(p);
    table.targets.push_back(t);
  }
  if (!header_seen) throw InvalidArgument("row 1: missing header row");
  return table;
}

PredictionTable read_prediction_csv(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InvalidArgument("CSV not found: " + path.string());
  return parse_prediction_csv(read_text(path));
}

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("kfold: k must be at least 2");
  if (k > n) throw InvalidArgument("kfold: k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
  const std::vector<std::size_t> order = shuffled_indices(n, seed);
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t i = 0; i < n; ++i) folds[i % k].push_back(order[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

}  // namespace latentopt
