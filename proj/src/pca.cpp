#include "latentopt/pca.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/SVD>

#include "latentopt/errors.hpp"

namespace latentopt {

Eigen::MatrixXd PcaProjection::transform(const Eigen::MatrixXd& points) const {
  if (points.cols() != mean.size()) throw InvalidArgument("pca transform: dimension mismatch");
  return (points.rowwise() - mean.transpose()) * components.transpose();
}

nlohmann::json PcaProjection::basis_json() const {
  nlohmann::json comps = nlohmann::json::array();
  for (Eigen::Index r = 0; r < components.rows(); ++r) {
    std::vector<double> row(components.cols());
    for (Eigen::Index c = 0; c < components.cols(); ++c) row[c] = components(r, c);
    comps.push_back(row);
  }
  return nlohmann::json{{"components", comps},
                        {"mean", std::vector<double>(mean.data(), mean.data() + mean.size())},
                        {"explained_variance_ratio",
                         std::vector<double>(explained_variance_ratio.data(),
                                             explained_variance_ratio.data() + explained_variance_ratio.size())}};
}

PcaProjection pca_project(const Eigen::MatrixXd& points, int k) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  if (n < 2) throw InvalidArgument("pca: need at least two points");
  if (k < 1 || k > std::min<Eigen::Index>(n - 1, d))
    throw InvalidArgument("pca: k = " + std::to_string(k) + " outside [1, min(n - 1, d)]");
  if (!points.allFinite()) throw NumericError("pca: non-finite input");

  PcaProjection out;
  out.mean = points.colwise().mean().transpose();
  const Eigen::MatrixXd centered = points.rowwise() - out.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double total = sv.squaredNorm();
  if (!(total > 0.0)) throw InvalidArgument("pca: all points are identical");

  out.components = svd.matrixV().leftCols(k).transpose();
  for (Eigen::Index r = 0; r < k; ++r) {
    Eigen::Index arg = 0;
    out.components.row(r).cwiseAbs().maxCoeff(&arg);
    if (out.components(r, arg) < 0.0) out.components.row(r) *= -1.0;
  }
  out.explained_variance_ratio = sv.head(k).cwiseAbs2() / total;
  out.projected = centered * out.components.transpose();
  return out;
}

ProjectedPaths project_trajectories(const std::vector<TrajectoryPath>& trajectories, int k, bool per_trajectory) {
  if (trajectories.empty()) throw InvalidArgument("pca paths: no trajectories");
  const Eigen::Index d = trajectories.front().means.cols();
  Eigen::Index total = 0;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const auto& t = trajectories[i];
    if (t.means.cols() != d)
      throw InvalidArgument("pca paths: trajectory " + std::to_string(i) + " has dimension " +
                            std::to_string(t.means.cols()) + ", expected " + std::to_string(d));
    if (static_cast<std::size_t>(t.means.rows()) != t.generations.size())
      throw InvalidArgument("pca paths: generation labels do not match snapshot count");
    total += t.means.rows();
  }
  if (total < 2) throw InvalidArgument("pca paths: need at least two snapshots in total");

  ProjectedPaths out;
  if (per_trajectory) {
    for (const auto& t : trajectories) {
      out.per_trajectory_bases.push_back(pca_project(t.means, k));
      out.paths.push_back(out.per_trajectory_bases.back().projected);
    }
    out.basis = out.per_trajectory_bases.front();
    return out;
  }
  Eigen::MatrixXd pooled(total, d);
  Eigen::Index row = 0;
  for (const auto& t : trajectories) {
    pooled.middleRows(row, t.means.rows()) = t.means;
    row += t.means.rows();
  }
  out.basis = pca_project(pooled, k);
  row = 0;
  for (const auto& t : trajectories) {
    out.paths.push_back(out.basis.projected.middleRows(row, t.means.rows()));
    row += t.means.rows();
  }
  return out;
}

std::string ProjectedPaths::to_csv(const std::vector<TrajectoryPath>& inputs) const {
  std::ostringstream out;
  const Eigen::Index k = paths.empty() ? 0 : paths.front().cols();
  out << "trajectory_id,generation";
  for (Eigen::Index c = 0; c < k; ++c) out << ",pc" << (c + 1);
  out << '\n';
  char buf[32];
  for (std::size_t t = 0; t < paths.size(); ++t) {
    for (Eigen::Index r = 0; r < paths[t].rows(); ++r) {
      out << t << ',' << inputs[t].generations[r];
      for (Eigen::Index c = 0; c < k; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", paths[t](r, c));
        out << ',' << buf;
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace latentopt
