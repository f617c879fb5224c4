#include <doctest.h>

#include <cmath>

#include "latentopt/adam.hpp"
#include "latentopt/errors.hpp"

using namespace latentopt;

TEST_CASE("first step has unit bias-corrected moments") {
  AdamState s = AdamState::zeros(1);
  const Eigen::VectorXd d = adam_step(s, AdamConfig{}, Eigen::VectorXd::Constant(1, 1.0));
  CHECK(s.t == 1);
  CHECK(d[0] == doctest::Approx(-0.01).epsilon(1e-7));
  CHECK(std::abs(d[0] - (-0.01 / (1.0 + 1e-8))) < 1e-17);
}

TEST_CASE("zero gradient gives zero delta") {
  AdamState s = AdamState::zeros(3);
  for (int t = 0; t < 5; ++t) {
    const Eigen::VectorXd d = adam_step(s, AdamConfig{}, Eigen::VectorXd::Zero(3));
    CHECK(d.isZero(0.0));
  }
  CHECK(s.t == 5);
}

TEST_CASE("three steps against a hand trace") {
  // grads 1, 1, -1 with the default constants:
  //   m: 0.1, 0.19, 0.071        v: 0.001, 0.001999, 0.002997001
  //   bias corrections 1 - 0.9^t: 0.1, 0.19, 0.271
  //                    1 - 0.999^t: 0.001, 0.001999, 0.002997001
  const double m[3] = {0.1, 0.19, 0.071};
  const double v[3] = {0.001, 0.001999, 0.002997001};
  const double cm[3] = {0.1, 0.19, 0.271};
  const double cv[3] = {0.001, 0.001999, 0.002997001};
  const double g[3] = {1.0, 1.0, -1.0};
  AdamState s = AdamState::zeros(1);
  for (int t = 0; t < 3; ++t) {
    const Eigen::VectorXd d = adam_step(s, AdamConfig{}, Eigen::VectorXd::Constant(1, g[t]));
    CHECK(s.t == t + 1);
    CHECK(std::abs(s.m[0] - m[t]) <= 1e-15);
    CHECK(std::abs(s.v[0] - v[t]) <= 1e-15);
    const double expected = -0.01 * (m[t] / cm[t]) / (std::sqrt(v[t] / cv[t]) + 1e-8);
    CHECK(std::abs(d[0] - expected) <= 1e-15);
  }
}

TEST_CASE("second moment stays non-negative") {
  AdamState s = AdamState::zeros(4);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd g(4);
    g << std::sin(t), -std::cos(t), t % 3 - 1.0, 1e-3 * t;
    adam_step(s, AdamConfig{}, g);
    CHECK(s.v.minCoeff() >= 0.0);
  }
}

TEST_CASE("adam errors") {
  AdamState s = AdamState::zeros(2);
  CHECK_THROWS_AS(adam_step(s, AdamConfig{}, Eigen::VectorXd::Zero(3)), InvalidArgument);
  Eigen::VectorXd bad(2);
  bad << 1.0, std::nan("");
  CHECK_THROWS_AS(adam_step(s, AdamConfig{}, bad), NumericError);
  CHECK(s.t == 0);
  CHECK_THROWS_AS(AdamConfig{.step_size = 0.0}.validate(), InvalidArgument);
  CHECK_THROWS_AS(AdamConfig{.decay_m = 1.0}.validate(), InvalidArgument);
}

TEST_CASE("central differences") {
  SUBCASE("squared norm") {
    const Eigen::VectorXd g =
        fd_gradient([](const Eigen::VectorXd& x) { return x.squaredNorm(); }, Eigen::Vector2d(1, -2), 1e-5);
    CHECK(std::abs(g[0] - 2.0) < 1e-8);
    CHECK(std::abs(g[1] + 4.0) < 1e-8);
  }
  SUBCASE("constant") {
    const Eigen::VectorXd g = fd_gradient([](const Eigen::VectorXd&) { return 3.5; }, Eigen::Vector3d(1, 2, 3), 1e-5);
    CHECK(g.isZero(0.0));
  }
  SUBCASE("bilinear") {
    const Eigen::VectorXd g =
        fd_gradient([](const Eigen::VectorXd& x) { return x[0] * x[1]; }, Eigen::Vector2d(3, 5), 1e-5);
    CHECK(std::abs(g[0] - 5.0) < 1e-8);
    CHECK(std::abs(g[1] - 3.0) < 1e-8);
  }
  SUBCASE("exactly two evaluations per coordinate") {
    int calls = 0;
    fd_gradient([&](const Eigen::VectorXd& x) { ++calls; return x.sum(); }, Eigen::VectorXd::Zero(7), 1e-4);
    CHECK(calls == 14);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(fd_gradient([](const Eigen::VectorXd&) { return 1.0; }, Eigen::Vector2d(0, 0), 0.0),
                    InvalidArgument);
    CHECK_THROWS_AS(fd_gradient([](const Eigen::VectorXd& x) { return x[0] > 0 ? std::log(-1.0) : 0.0; },
                                Eigen::Vector2d(0, 0), 1e-3),
                    NumericError);
  }
}

TEST_CASE("adam with analytic and finite-difference gradients agree") {
  Eigen::MatrixXd a(3, 3);
  a << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  const Eigen::Vector3d b(1, -2, 0.5);
  auto f = [&](const Eigen::VectorXd& x) { return 0.5 * x.dot(a * x) - b.dot(x); };
  Eigen::VectorXd xa = Eigen::Vector3d(2, 2, 2), xf = xa;
  AdamState sa = AdamState::zeros(3), sf = AdamState::zeros(3);
  for (int t = 0; t < 100; ++t) {
    xa += adam_step(sa, AdamConfig{}, a * xa - b);
    xf += adam_step(sf, AdamConfig{}, fd_gradient(f, xf, 1e-6));
  }
  CHECK((xa - xf).cwiseAbs().maxCoeff() < 1e-4);
}
