#include "latentopt/bench.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "latentopt/errors.hpp"

namespace latentopt {

double sphere(const Eigen::VectorXd& x) { return x.squaredNorm(); }

double rosenbrock(const Eigen::VectorXd& x) {
  double f = 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i + 1] - x[i] * x[i];
    const double b = 1.0 - x[i];
    f += 100.0 * a * a + b * b;
  }
  return f;
}

double rastrigin(const Eigen::VectorXd& x) {
  double f = 10.0 * static_cast<double>(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) f += x[i] * x[i] - 10.0 * std::cos(2.0 * std::numbers::pi * x[i]);
  return f;
}

BenchSuite bench_suite(const std::string& name) {
  if (name == "sphere") return {name, &sphere, 1.0, 0.3, 1e-10};
  if (name == "rosenbrock") return {name, &rosenbrock, 0.0, 0.5, 1e-6};
  if (name == "rastrigin") return {name, &rastrigin, 3.0, 2.0, 1e-6};
  throw InvalidArgument("unknown suite '" + name + "' (expected sphere, rosenbrock or rastrigin)");
}

BenchRow cma_minimize(const std::string& name, double (*fn)(const Eigen::VectorXd&), const Eigen::VectorXd& x0,
                      double sigma0, double target, long budget, std::uint64_t seed, const CmaOverrides& overrides) {
  const int dim = static_cast<int>(x0.size());
  CmaState state = cma_init(x0, sigma0, make_cma_params(dim, overrides), seed);
  StopCriteria stop;
  stop.max_evaluations = budget;
  stop.target_fitness = target;

  BenchRow row;
  row.function = name;
  row.dim = dim;
  while (true) {
    if (auto reason = cma_should_stop(state, stop)) {
      row.stop_reason = std::string(to_string(*reason));
      break;
    }
    const auto candidates = cma_ask(state);
    std::vector<double> fitness(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      fitness[i] = fn(candidates[i]);
      if (!row.evals_to_target && fitness[i] < target) row.evals_to_target = state.eval_count + static_cast<long>(i) + 1;
    }
    cma_tell(state, candidates, fitness);
  }
  row.best_fitness = state.best_fitness;
  row.evaluations = state.eval_count;
  row.generations = state.generation;
  return row;
}

std::vector<BenchRow> run_bench(const BenchOptions& options) {
  const BenchSuite suite = bench_suite(options.suite);
  if (options.dims.empty()) throw InvalidArgument("no dimensions given");
  for (int d : options.dims)
    if (d <= 0) throw InvalidArgument("invalid dimension " + std::to_string(d));
  if (options.budget <= 0) throw InvalidArgument("budget must be positive");

  std::vector<BenchRow> rows;
  for (int d : options.dims) {
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(d, suite.x0_value);
    rows.push_back(cma_minimize(suite.name, suite.fn, x0, options.sigma0.value_or(suite.sigma0),
                                options.target.value_or(suite.target), options.budget, options.seed, options.cma));
  }
  return rows;
}

std::string format_bench_table(const std::vector<BenchRow>& rows) {
  std::string out = "function    dim  evals_to_target  best_fitness\n";
  char line[128];
  for (const auto& r : rows) {
    const std::string evals = r.evals_to_target ? std::to_string(*r.evals_to_target) : "missed";
    std::snprintf(line, sizeof line, "%-10s %4d  %15s  %.6e\n", r.function.c_str(), r.dim, evals.c_str(),
                  r.best_fitness);
    out += line;
  }
  return out;
}

}  // namespace latentopt
