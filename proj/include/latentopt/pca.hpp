#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace latentopt {

struct PcaProjection {
  Eigen::MatrixXd components;  // k x d, orthonormal rows
  Eigen::MatrixXd projected;   // n x k
  Eigen::VectorXd explained_variance_ratio;
  Eigen::VectorXd mean;

  /// Coordinates of new points in this basis.
  Eigen::MatrixXd transform(const Eigen::MatrixXd& points) const;
  nlohmann::json basis_json() const;
};

/// Top-k principal directions of the rows of `points` via a thin SVD of the
/// centered data. Each component is signed so its largest-magnitude entry
/// is positive.
PcaProjection pca_project(const Eigen::MatrixXd& points, int k);

/// A sequence of mean-latent snapshots (one row each) and their generations.
struct TrajectoryPath {
  std::vector<long> generations;
  Eigen::MatrixXd means;
};

struct ProjectedPaths {
  PcaProjection basis;                 // shared basis (first trajectory's when per_trajectory)
  std::vector<Eigen::MatrixXd> paths;  // per trajectory, snapshots x k
  std::vector<PcaProjection> per_trajectory_bases;

  /// trajectory_id,generation,pc1,pc2,...
  std::string to_csv(const std::vector<TrajectoryPath>& inputs) const;
};

/// Fits one PCA on the union of all snapshots and projects every path into
/// it, or fits each path separately when `per_trajectory` is set.
ProjectedPaths project_trajectories(const std::vector<TrajectoryPath>& trajectories, int k = 2,
                                    bool per_trajectory = false);

}  // namespace latentopt
