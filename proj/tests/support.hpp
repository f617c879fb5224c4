#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "latentopt/artifacts.hpp"
#include "latentopt/tensor.hpp"

namespace test {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(LATENTOPT_FIXTURES) / rel; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("latentopt_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline Eigen::VectorXd random_vector(int n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline latentopt::LatentPoint random_latent(int layers, int dim, std::mt19937_64& rng, double scale) {
  latentopt::LatentPoint p = latentopt::LatentPoint::zeros(layers, dim);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& v : p.data) v = u(rng);
  return p;
}

inline latentopt::ImageTensor random_image(latentopt::ImageShape shape, std::mt19937_64& rng) {
  latentopt::ImageTensor img = latentopt::ImageTensor::filled(shape, 0.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : img.data) v = u(rng);
  return img;
}

/// Structural equality with numbers compared to `tol` (absolute or
/// relative). Object keys listed in `skip` are ignored at any depth.
inline bool json_close(const nlohmann::json& a, const nlohmann::json& b, double tol,
                       const std::vector<std::string>& skip = {}, std::string* where = nullptr,
                       const std::string& path = "") {
  auto fail = [&] {
    if (where) *where = path.empty() ? "/" : path;
    return false;
  };
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>(), y = b.get<double>();
    if (std::abs(x - y) <= tol * std::max(1.0, std::abs(y))) return true;
    return fail();
  }
  if (a.type() != b.type()) return fail();
  if (a.is_array()) {
    if (a.size() != b.size()) return fail();
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!json_close(a[i], b[i], tol, skip, where, path + "/" + std::to_string(i))) return false;
    return true;
  }
  if (a.is_object()) {
    for (const auto& [key, value] : b.items()) {
      if (std::find(skip.begin(), skip.end(), key) != skip.end()) continue;
      if (!a.contains(key) || !json_close(a[key], value, tol, skip, where, path + "/" + key)) return fail();
    }
    for (const auto& [key, value] : a.items())
      if (!b.contains(key) && std::find(skip.begin(), skip.end(), key) == skip.end()) return fail();
    return true;
  }
  return a == b || fail();
}

}  // namespace test
