#include <doctest.h>

#include "latentopt/bench.hpp"
#include "latentopt/errors.hpp"

using namespace latentopt;

TEST_CASE("benchmark functions") {
  CHECK(sphere(Eigen::Vector3d(1, 2, 3)) == 14.0);
  CHECK(rosenbrock(Eigen::Vector3d(1, 1, 1)) == 0.0);
  CHECK(rosenbrock(Eigen::Vector2d(0, 0)) == 1.0);
  CHECK(rosenbrock(Eigen::Vector2d(-1, 1)) == 4.0);
  CHECK(rastrigin(Eigen::Vector2d(0, 0)) == 0.0);
  CHECK(rastrigin(Eigen::Vector2d(1, 1)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(rastrigin(Eigen::Vector2d(0.5, 0)) == doctest::Approx(0.25 + 20.0).epsilon(1e-12));
}

TEST_CASE("sphere dim 10 converges within budget") {
  const BenchRow row = run_bench({"sphere", {10}, 5000, 1}).front();
  REQUIRE(row.evals_to_target.has_value());
  CHECK(*row.evals_to_target <= 5000);
  CHECK(row.best_fitness < 1e-10);
  CHECK(*row.evals_to_target % 10 == 0);  // lambda 10, counted per generation
}

TEST_CASE("budget exhaustion is reported as a miss") {
  const BenchRow row = run_bench({"rastrigin", {10}, 500, 1}).front();
  CHECK_FALSE(row.evals_to_target.has_value());
  CHECK(row.evaluations <= 500 + 14);
  const std::string table = format_bench_table({row});
  CHECK(table.rfind("function    dim  evals_to_target  best_fitness\n", 0) == 0);
  CHECK(table.find("missed") != std::string::npos);
}

TEST_CASE("runs are deterministic per seed") {
  const BenchRow a = run_bench({"rosenbrock", {4}, 20000, 3}).front();
  const BenchRow b = run_bench({"rosenbrock", {4}, 20000, 3}).front();
  CHECK(a.evals_to_target == b.evals_to_target);
  CHECK(a.best_fitness == b.best_fitness);
}

TEST_CASE("bench input errors") {
  CHECK_THROWS_AS(bench_suite("ackley"), InvalidArgument);
  CHECK_THROWS_AS(run_bench({"sphere", {0}, 100, 1}), InvalidArgument);
  CHECK_THROWS_AS(run_bench({"sphere", {}, 100, 1}), InvalidArgument);
}
