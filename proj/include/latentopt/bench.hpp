#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "latentopt/cma_es.hpp"

namespace latentopt {

double sphere(const Eigen::VectorXd& x);
double rosenbrock(const Eigen::VectorXd& x);
double rastrigin(const Eigen::VectorXd& x);

struct BenchSuite {
  std::string name;
  double (*fn)(const Eigen::VectorXd&);
  double x0_value;  // every coordinate of the start point
  double sigma0;
  double target;
};

/// sphere, rosenbrock or rastrigin; throws InvalidArgument otherwise.
BenchSuite bench_suite(const std::string& name);

struct BenchRow {
  std::string function;
  int dim = 0;
  std::optional<long> evals_to_target;  // empty when the budget ran out first
  double best_fitness = 0.0;
  long evaluations = 0;
  long generations = 0;
  std::string stop_reason;
};

struct BenchOptions {
  std::string suite;
  std::vector<int> dims;
  long budget = 5000;
  std::uint64_t seed = 1;
  std::optional<double> target;  // suite default when empty
  std::optional<double> sigma0;
  CmaOverrides cma;
};

/// Minimizes `fn` from x0 until the target is hit, the evaluation budget is
/// spent, or a stop criterion fires. Evaluations are counted per candidate.
BenchRow cma_minimize(const std::string& name, double (*fn)(const Eigen::VectorXd&), const Eigen::VectorXd& x0,
                      double sigma0, double target, long budget, std::uint64_t seed,
                      const CmaOverrides& overrides = {});

/// One row per requested dimension. Throws InvalidArgument for an unknown
/// suite or a non-positive dimension.
std::vector<BenchRow> run_bench(const BenchOptions& options);

/// Fixed-width table: function, dim, evals_to_target, best_fitness.
std::string format_bench_table(const std::vector<BenchRow>& rows);

}  // namespace latentopt
