#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "latentopt/errors.hpp"
#include "latentopt/metrics.hpp"
#include "latentopt/pca.hpp"
#include "latentopt/rng.hpp"
#include "support.hpp"

using namespace latentopt;
using Folds = std::vector<std::vector<std::size_t>>;

namespace {

// Naive long-double reference for the three metrics.
MetricReport naive_metrics(const std::vector<double>& p, const std::vector<double>& t) {
  const long double n = p.size();
  long double abs_sum = 0, sq_sum = 0, mp = 0, mt = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    abs_sum += std::fabs(static_cast<long double>(p[i]) - t[i]);
    sq_sum += (static_cast<long double>(p[i]) - t[i]) * (static_cast<long double>(p[i]) - t[i]);
    mp += p[i];
    mt += t[i];
  }
  mp /= n;
  mt /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sxy += (p[i] - mp) * (t[i] - mt);
    sxx += (p[i] - mp) * (p[i] - mp);
    syy += (t[i] - mt) * (t[i] - mt);
  }
  MetricReport r;
  r.mae = static_cast<double>(abs_sum / n);
  r.rmse = static_cast<double>(std::sqrt(sq_sum / n));
  r.pearson = static_cast<double>(sxy / std::sqrt(sxx * syy));
  r.n = p.size();
  return r;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("metrics on small examples") {
  const std::vector<double> p{1.0, 2.0, 3.0, 4.0}, t{1.5, 2.0, 2.0, 5.0};
  const MetricReport r = compute_metrics(p, t);
  CHECK(r.mae == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(r.rmse == doctest::Approx(std::sqrt(2.25 / 4.0)).epsilon(1e-15));
  CHECK(r.n == 4);
  const MetricReport ref = naive_metrics(p, t);
  CHECK(std::abs(r.pearson - ref.pearson) <= 1e-12);

  const std::vector<double> same{1.0, 2.0, 4.0};
  const MetricReport perfect = compute_metrics(same, same);
  CHECK(perfect.mae == 0.0);
  CHECK(perfect.rmse == 0.0);
  CHECK(perfect.pearson == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> rev{-1.0, -2.0, -4.0};
  CHECK(compute_metrics(same, rev).pearson == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("metrics reproduce the fixture oracle") {
  const auto expected = nlohmann::json::parse(read_text(test::fixture("metrics/expected.json")));
  for (const auto& [name, want] : expected.items()) {
    CAPTURE(name);
    const PredictionTable table = read_prediction_csv(test::fixture("metrics/" + name));
    const MetricReport r = compute_metrics(table.predictions, table.targets);
    CHECK(r.n == want["n"].get<std::size_t>());
    CHECK(std::abs(r.mae - want["mae"].get<double>()) <= 1e-12);
    CHECK(std::abs(r.rmse - want["rmse"].get<double>()) <= 1e-12);
    CHECK(std::abs(r.pearson - want["pearson"].get<double>()) <= 1e-12);
  }
}

TEST_CASE("rmse bounds mae from above") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len(2, 300);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = len(rng);
    const std::vector<double> p = to_std(test::random_vector(n, rng, 1.0, 5.0));
    const std::vector<double> t = to_std(test::random_vector(n, rng, 1.0, 5.0));
    const MetricReport r = compute_metrics(p, t);
    CHECK(r.rmse >= r.mae);
    CHECK(r.pearson >= -1.0);
    CHECK(r.pearson <= 1.0);
  }
}

TEST_CASE("pearson ignores affine rescaling of predictions") {
  std::mt19937_64 rng(3);
  const std::vector<double> p = to_std(test::random_vector(50, rng));
  const std::vector<double> t = to_std(test::random_vector(50, rng));
  std::vector<double> q(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) q[i] = 3.0 * p[i] + 7.0;
  CHECK(std::abs(compute_metrics(p, t).pearson - compute_metrics(q, t).pearson) <= 1e-12);
  // swapping the roles leaves MAE and RMSE alone
  const MetricReport a = compute_metrics(p, t), b = compute_metrics(t, p);
  CHECK(a.mae == b.mae);
  CHECK(a.rmse == b.rmse);
}

TEST_CASE("metric errors") {
  const std::vector<double> flat{2.0, 2.0, 2.0}, varied{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(compute_metrics(flat, varied), InvalidArgument);
  CHECK_THROWS_AS(compute_metrics(varied, flat), InvalidArgument);
  CHECK_THROWS_AS(compute_metrics(varied, std::vector<double>{1.0, 2.0}), InvalidArgument);
  CHECK_THROWS_AS(compute_metrics(std::vector<double>{1.0}, std::vector<double>{1.0}), InvalidArgument);
  CHECK_THROWS_AS(compute_metrics(varied, std::vector<double>{1.0, std::nan(""), 2.0}), NumericError);
}

TEST_CASE("prediction CSV parsing") {
  const PredictionTable t = parse_prediction_csv("prediction,target\n1.5,2\n3,4.25\n");
  CHECK(t.predictions == std::vector<double>{1.5, 3.0});
  CHECK(t.targets == std::vector<double>{2.0, 4.25});
  try {
    read_prediction_csv(test::fixture("metrics/bad_cell.csv"));
    FAIL("expected an error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).rfind("row 4:", 0) == 0);
  }
  CHECK_THROWS_AS(parse_prediction_csv("prediction,target\n1,2,3\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_prediction_csv(""), InvalidArgument);
  CHECK_THROWS_AS(read_prediction_csv("/nonexistent/file.csv"), InvalidArgument);
}

TEST_CASE("splitmix64 reference outputs") {
  SplitMix64 rng(1234567);
  const std::uint64_t want[] = {6457827717110365317ull, 3203168211198807973ull, 9817491932198370423ull,
                                4593380528125082431ull, 16408922859458223821ull};
  for (std::uint64_t w : want) CHECK(rng.next() == w);
}

TEST_CASE("k-fold assignments") {
  CHECK(kfold_split(10, 5, 42) == Folds{{0, 4}, {7, 9}, {2, 5}, {1, 8}, {3, 6}});
  CHECK(kfold_split(11, 5, 42) == Folds{{2, 8, 9}, {3, 6}, {4, 10}, {0, 7}, {1, 5}});
  CHECK(kfold_split(7, 3, 0) == Folds{{2, 5, 6}, {3, 4}, {0, 1}});
  CHECK_THROWS_AS(kfold_split(10, 1, 0), InvalidArgument);
  CHECK_THROWS_AS(kfold_split(3, 4, 0), InvalidArgument);
}

TEST_CASE("k-fold partitions every index exactly once with balanced sizes") {
  for (std::size_t n = 2; n <= 200; ++n) {
    for (std::size_t k = 2; k <= n; ++k) {
      const Folds folds = kfold_split(n, k, n * 1000 + k);
      REQUIRE(folds.size() == k);
      std::vector<int> seen(n, 0);
      std::size_t lo = n, hi = 0;
      for (const auto& f : folds) {
        lo = std::min(lo, f.size());
        hi = std::max(hi, f.size());
        REQUIRE(std::is_sorted(f.begin(), f.end()));
        for (std::size_t i : f) ++seen[i];
      }
      REQUIRE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
      REQUIRE(hi - lo <= 1);
    }
  }
}

TEST_CASE("pca of points on a line") {
  std::mt19937_64 rng(9);
  const Eigen::VectorXd dir = test::random_vector(6, rng).normalized();
  const Eigen::VectorXd offset = test::random_vector(6, rng);
  Eigen::MatrixXd pts(40, 6);
  for (int i = 0; i < 40; ++i) pts.row(i) = (offset + (0.1 * i - 1.3) * dir).transpose();
  const PcaProjection p = pca_project(pts, 2);
  CHECK(std::abs(p.explained_variance_ratio[0] - 1.0) <= 1e-10);
  CHECK(std::abs(p.explained_variance_ratio[1]) <= 1e-10);
  CHECK(std::abs(std::abs(p.components.row(0).dot(dir)) - 1.0) <= 1e-10);
}

TEST_CASE("pca agrees with the covariance eigendecomposition") {
  std::mt19937_64 rng(17);
  Eigen::MatrixXd pts(60, 5);
  const Eigen::VectorXd scale = (Eigen::VectorXd(5) << 3.0, 2.0, 1.0, 0.5, 0.1).finished();
  for (int i = 0; i < 60; ++i) pts.row(i) = test::random_vector(5, rng).cwiseProduct(scale).transpose();
  const PcaProjection p = pca_project(pts, 3);

  const Eigen::MatrixXd centered = pts.rowwise() - pts.colwise().mean();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centered.transpose() * centered);
  const Eigen::VectorXd values = eig.eigenvalues().reverse();
  for (int c = 0; c < 3; ++c) {
    CHECK(std::abs(p.explained_variance_ratio[c] - values[c] / values.sum()) <= 1e-10);
    const Eigen::VectorXd v = eig.eigenvectors().col(4 - c);
    CHECK(std::abs(std::abs(p.components.row(c).dot(v)) - 1.0) <= 1e-8);
    // sign convention: largest-magnitude entry is positive
    Eigen::Index arg = 0;
    p.components.row(c).cwiseAbs().maxCoeff(&arg);
    CHECK(p.components(c, arg) > 0.0);
  }
  CHECK((p.components * p.components.transpose() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((p.transform(pts) - p.projected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("full-rank pca reconstructs its input") {
  std::mt19937_64 rng(23);
  Eigen::MatrixXd pts(30, 8);
  for (int i = 0; i < 30; ++i) pts.row(i) = test::random_vector(8, rng).transpose();
  const PcaProjection p = pca_project(pts, 8);
  const Eigen::MatrixXd back = (p.projected * p.components).rowwise() + p.mean.transpose();
  CHECK((back - pts).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(std::abs(p.explained_variance_ratio.sum() - 1.0) <= 1e-12);
}

TEST_CASE("pca is equivariant under rotation") {
  std::mt19937_64 rng(29);
  Eigen::MatrixXd pts(25, 4);
  for (int i = 0; i < 25; ++i)
    pts.row(i) = test::random_vector(4, rng).cwiseProduct(Eigen::Vector4d(4, 2, 1, 0.5)).transpose();
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(4, 4)).householderQ();
  const PcaProjection a = pca_project(pts, 2);
  const PcaProjection b = pca_project(pts * q, 2);
  CHECK((a.explained_variance_ratio - b.explained_variance_ratio).cwiseAbs().maxCoeff() <= 1e-12);
  for (int c = 0; c < 2; ++c) CHECK(std::abs(std::abs((a.components.row(c) * q).dot(b.components.row(c))) - 1.0) <= 1e-10);
}

TEST_CASE("pca input errors") {
  CHECK_THROWS_AS(pca_project(Eigen::MatrixXd::Zero(1, 3), 1), InvalidArgument);
  CHECK_THROWS_AS(pca_project(Eigen::MatrixXd::Random(5, 3), 4), InvalidArgument);
  CHECK_THROWS_AS(pca_project(Eigen::MatrixXd::Random(5, 3), 0), InvalidArgument);
  CHECK_THROWS_AS(pca_project(Eigen::MatrixXd::Ones(5, 3), 1), InvalidArgument);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Random(5, 3);
  bad(2, 1) = std::nan("");
  CHECK_THROWS_AS(pca_project(bad, 1), NumericError);
}

TEST_CASE("trajectory projection") {
  std::mt19937_64 rng(31);
  std::vector<TrajectoryPath> paths(2);
  for (int t = 0; t < 2; ++t) {
    paths[t].means = Eigen::MatrixXd(10, 6);
    for (int g = 0; g < 10; ++g) {
      paths[t].generations.push_back(g * 5);
      paths[t].means.row(g) = test::random_vector(6, rng).transpose();
    }
  }
  const ProjectedPaths pooled = project_trajectories(paths, 2);
  REQUIRE(pooled.paths.size() == 2);
  Eigen::MatrixXd all(20, 6);
  all << paths[0].means, paths[1].means;
  const PcaProjection direct = pca_project(all, 2);
  CHECK((pooled.paths[0] - direct.projected.topRows(10)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((pooled.paths[1] - direct.projected.bottomRows(10)).cwiseAbs().maxCoeff() <= 1e-12);

  const std::string csv = pooled.to_csv(paths);
  CHECK(csv.rfind("trajectory_id,generation,pc1,pc2\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 21);
  CHECK(csv.find("\n1,45,") != std::string::npos);

  const ProjectedPaths separate = project_trajectories(paths, 2, true);
  REQUIRE(separate.per_trajectory_bases.size() == 2);
  CHECK((separate.paths[1] - pca_project(paths[1].means, 2).projected).cwiseAbs().maxCoeff() <= 1e-12);

  paths[1].means = Eigen::MatrixXd::Zero(10, 5);
  CHECK_THROWS_AS(project_trajectories(paths, 2), InvalidArgument);
  paths[1].means = Eigen::MatrixXd::Zero(9, 6);
  CHECK_THROWS_AS(project_trajectories(paths, 2), InvalidArgument);
  CHECK_THROWS_AS(project_trajectories({}, 2), InvalidArgument);
}
