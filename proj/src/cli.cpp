#include "latentopt/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "latentopt/artifacts.hpp"
#include "latentopt/bench.hpp"
#include "latentopt/config.hpp"
#include "latentopt/errors.hpp"
#include "latentopt/metrics.hpp"
#include "latentopt/pca.hpp"
#include "latentopt/pipeline.hpp"

namespace latentopt {

using nlohmann::json;

namespace {

struct Failure {
  int exit_code;
  std::string tag;
  std::string message;
};

[[noreturn]] void fail(int code, const char* tag, const std::string& message) { throw Failure{code, tag, message}; }

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string backend;
};

RunConfig resolve_config(const GlobalOptions& g) {
  RunConfig cfg;
  if (!g.config_path.empty()) {
    try {
      cfg = load_run_config(g.config_path);
    } catch (const ConfigNotFound& e) {
      fail(1, "CONFIG_NOT_FOUND", e.what());
    } catch (const ConfigError& e) {
      fail(1, "CONFIG_INVALID", e.what());
    }
  }
  if (g.seed) cfg.seed = *g.seed;
  cfg.beautify.seed = cfg.seed;
  if (!g.out.empty()) cfg.output_dir = g.out;
  if (!g.backend.empty()) {
    cfg.backend = g.backend;
  } else if (!cfg.backend) {
    const char* env = std::getenv("LATENTOPT_BACKEND");
    cfg.backend = env && *env ? env : "toy";
  }
  return cfg;
}

GatewayPool open_pool(const RunConfig& cfg) {
  try {
    return GatewayPool::open(*cfg.backend, cfg.pool_size);
  } catch (const VersionMismatch& e) {
    fail(2, "PROTOCOL_VERSION", e.what());
  } catch (const TransportError& e) {
    fail(2, "BACKEND_UNREACHABLE", e.what());
  } catch (const ProtocolError& e) {
    fail(2, "BACKEND_ERROR", e.what());
  } catch (const ModelError& e) {
    fail(2, "BACKEND_ERROR", e.what());
  } catch (const InvalidArgument& e) {
    fail(1, "CONFIG_INVALID", e.what());
  }
}

ImageTensor load_input(const std::string& path, const BackendCapabilities& caps) {
  if (!std::filesystem::exists(path)) fail(1, "INPUT_NOT_FOUND", "input image not found: " + path);
  ImageTensor image;
  try {
    image = read_image(path);
  } catch (const Error& e) {
    fail(1, "INPUT_INVALID", e.what());
  }
  if (!(image.shape == caps.image_shape))
    fail(1, "DIMENSION_MISMATCH",
         "input image is " + image.shape.str() + " but the backend expects " + caps.image_shape.str());
  return image;
}

/// Maps errors raised while a run is in progress.
template <typename F>
void guarded_run(F&& body) {
  try {
    body();
  } catch (const OptimizationAborted& e) {
    fail(3, "OPTIMIZATION_ABORTED", e.what());
  } catch (const NumericError& e) {
    fail(3, "OPTIMIZATION_ABORTED", e.what());
  } catch (const VersionMismatch& e) {
    fail(2, "PROTOCOL_VERSION", e.what());
  } catch (const ProtocolError& e) {
    fail(2, "BACKEND_ERROR", e.what());
  } catch (const TransportError& e) {
    fail(2, "BACKEND_ERROR", e.what());
  } catch (const ModelError& e) {
    fail(2, "BACKEND_ERROR", e.what());
  } catch (const InvalidArgument& e) {
    fail(1, "INPUT_INVALID", e.what());
  }
}

json run_metadata(const RunConfig& cfg, const std::string& command, const std::string& input) {
  return json{{"command", command}, {"input", input}, {"seed", cfg.seed}, {"config", cfg.to_json()}};
}

int cmd_beautify(const GlobalOptions& g, const std::string& input, std::ostream& out) {
  RunConfig cfg = resolve_config(g);
  GatewayPool pool = open_pool(cfg);
  const ImageTensor image = load_input(input, pool.front().capabilities());
  guarded_run([&] {
    const RunArtifacts run = run_full(image, pool, cfg.inversion, cfg.beautify, cfg.output_dir,
                                      run_metadata(cfg, "beautify", input));
    out << json{{"output_dir", cfg.output_dir.string()},
                {"initial_raw_score", run.report.initial.raw_score},
                {"final_raw_score", run.report.final.raw_score},
                {"final_lpips", run.report.final.lpips},
                {"stop_reason", run.report.stop_reason},
                {"eval_count", run.report.eval_count}}
               .dump()
        << '\n';
  });
  return 0;
}

int cmd_invert(const GlobalOptions& g, const std::string& input, std::ostream& out) {
  RunConfig cfg = resolve_config(g);
  GatewayPool pool = open_pool(cfg);
  ModelGateway& gw = pool.front();
  const ImageTensor image = load_input(input, gw.capabilities());
  guarded_run([&] {
    const auto t0 = std::chrono::steady_clock::now();
    const InversionResult inv = invert(image, gw, cfg.inversion);
    const ImageTensor recon = render_final(inv.x0, gw);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json meta = run_metadata(cfg, "invert", input);
    meta["backend"] = gw.identity();
    const json report{{"lpips_before", inv.report.lpips_before},
                      {"lpips_after", inv.report.lpips_after},
                      {"steps", inv.report.steps},
                      {"eval_count", inv.report.eval_count},
                      {"wall_clock_seconds", seconds},
                      {"metadata", meta}};
    try {
      std::filesystem::create_directories(cfg.output_dir);
      write_text(cfg.output_dir / "inversion.json", report.dump(2) + "\n");
      write_png(cfg.output_dir / "reconstruction.png", recon, meta.dump());
      write_f32_dump(cfg.output_dir / "latent_x0.f32", inv.x0.data, {inv.x0.layers, inv.x0.dim},
                     json{{"metadata", meta}});
    } catch (const std::filesystem::filesystem_error& e) {
      fail(1, "OUTPUT_UNWRITABLE", e.what());
    }
    out << json{{"output_dir", cfg.output_dir.string()},
                {"lpips_before", inv.report.lpips_before},
                {"lpips_after", inv.report.lpips_after},
                {"steps", inv.report.steps}}
               .dump()
        << '\n';
  });
  return 0;
}

int cmd_eval_metrics(const std::string& csv, std::ostream& out) {
  if (!std::filesystem::exists(csv)) fail(1, "INPUT_NOT_FOUND", "CSV not found: " + csv);
  PredictionTable table;
  try {
    table = read_prediction_csv(csv);
  } catch (const Error& e) {
    fail(1, "CSV_MALFORMED", csv + ": " + e.what());
  }
  try {
    out << compute_metrics(table.predictions, table.targets).to_json().dump() << '\n';
  } catch (const Error& e) {
    fail(1, "METRICS_UNDEFINED", e.what());
  }
  return 0;
}

/// Header `generation,x0,x1,...`, then one snapshot per row.
TrajectoryPath read_trajectory_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) fail(1, "CSV_MALFORMED", path + ": row 1: missing header row");
  std::vector<std::vector<double>> rows;
  std::vector<long> generations;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> values;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        fail(1, "CSV_MALFORMED", path + ": row " + std::to_string(line_no) + ": non-numeric cell");
      }
    }
    if (values.size() < 2) fail(1, "CSV_MALFORMED", path + ": row " + std::to_string(line_no) + ": too few columns");
    if (!rows.empty() && values.size() - 1 != rows.front().size())
      fail(1, "CSV_MALFORMED", path + ": row " + std::to_string(line_no) + ": column count changes");
    generations.push_back(static_cast<long>(values.front()));
    rows.emplace_back(values.begin() + 1, values.end());
  }
  TrajectoryPath t;
  t.generations = generations;
  t.means.resize(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) t.means(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return t;
}

TrajectoryPath read_trajectory_dump(const std::string& path) {
  F32Dump dump;
  try {
    dump = read_f32_dump(path);
  } catch (const Error& e) {
    fail(1, "INPUT_INVALID", e.what());
  }
  if (dump.shape.size() != 2) fail(1, "INPUT_INVALID", path + ": expected a 2-D dump (snapshots x dimension)");
  TrajectoryPath t;
  t.means.resize(dump.shape[0], dump.shape[1]);
  for (int r = 0; r < dump.shape[0]; ++r)
    for (int c = 0; c < dump.shape[1]; ++c) t.means(r, c) = dump.values[static_cast<std::size_t>(r) * dump.shape[1] + c];
  if (dump.sidecar.contains("generations")) {
    t.generations = dump.sidecar["generations"].get<std::vector<long>>();
  } else {
    for (int r = 0; r < dump.shape[0]; ++r) t.generations.push_back(r);
  }
  return t;
}

int cmd_pca_paths(const GlobalOptions& g, const std::vector<std::string>& inputs, int components, bool per_trajectory,
                  std::ostream& out) {
  std::vector<TrajectoryPath> paths;
  for (const auto& in : inputs) {
    if (!std::filesystem::exists(in)) fail(1, "INPUT_NOT_FOUND", "trajectory not found: " + in);
    paths.push_back(std::filesystem::path(in).extension() == ".csv" ? read_trajectory_csv(in)
                                                                     : read_trajectory_dump(in));
  }
  for (std::size_t i = 1; i < paths.size(); ++i)
    if (paths[i].means.cols() != paths[0].means.cols())
      fail(1, "DIMENSION_MISMATCH", inputs[i] + " has dimension " + std::to_string(paths[i].means.cols()) + ", " +
                                        inputs[0] + " has " + std::to_string(paths[0].means.cols()));
  ProjectedPaths projected;
  try {
    projected = project_trajectories(paths, components, per_trajectory);
  } catch (const Error& e) {
    fail(1, "INPUT_INVALID", e.what());
  }
  const std::filesystem::path dir = g.out.empty() ? std::filesystem::path(".") : std::filesystem::path(g.out);
  json basis = projected.basis.basis_json();
  basis["per_trajectory"] = per_trajectory;
  basis["inputs"] = inputs;
  if (per_trajectory) {
    basis["trajectory_bases"] = json::array();
    for (const auto& b : projected.per_trajectory_bases) basis["trajectory_bases"].push_back(b.basis_json());
  }
  std::filesystem::create_directories(dir);
  write_text(dir / "paths.csv", projected.to_csv(paths));
  write_text(dir / "basis.json", basis.dump(2) + "\n");
  out << json{{"paths", (dir / "paths.csv").string()}, {"basis", (dir / "basis.json").string()}}.dump() << '\n';
  return 0;
}

int cmd_bench(const GlobalOptions& g, BenchOptions opts, const std::string& mode, std::ostream& out) {
  if (g.seed) opts.seed = *g.seed;
  if (mode == "full") opts.cma.covariance_mode = CovarianceMode::Full;
  else if (mode == "diagonal") opts.cma.covariance_mode = CovarianceMode::Diagonal;
  else if (mode != "auto") fail(1, "CONFIG_INVALID", "--mode must be auto, full or diagonal");
  try {
    bench_suite(opts.suite);
  } catch (const InvalidArgument& e) {
    fail(1, "UNKNOWN_SUITE", e.what());
  }
  for (int d : opts.dims)
    if (d <= 0) fail(1, "INVALID_DIMENSION", "invalid dimension " + std::to_string(d));
  std::vector<BenchRow> rows;
  try {
    rows = run_bench(opts);
  } catch (const InvalidArgument& e) {
    fail(1, "CONFIG_INVALID", e.what());
  }
  out << format_bench_table(rows);
  return 0;
}

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Latent-space face beautification with CMA-ES", "latentopt"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "JSON run configuration");
  auto* seed_opt = app.add_option("--seed", seed, "Seed, overrides the config");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--backend", g.backend, "toy | mock | tcp://host:port | exec:<command>");

  std::string input;
  auto* beautify_cmd = app.add_subcommand("beautify", "Invert an image and optimize its beauty score");
  beautify_cmd->add_option("--input", input, "Input image (.png or .ppm)")->required();
  auto* invert_cmd = app.add_subcommand("invert", "Project an image into latent space");
  invert_cmd->add_option("--input", input, "Input image (.png or .ppm)")->required();

  std::string csv;
  auto* metrics_cmd = app.add_subcommand("eval-metrics", "MAE, RMSE and Pearson of a prediction CSV");
  metrics_cmd->add_option("csv", csv, "CSV with columns prediction,target")->required();

  std::vector<std::string> trajectories;
  int components = 2;
  bool per_trajectory = false;
  auto* pca_cmd = app.add_subcommand("pca-paths", "Project mean-latent trajectories onto principal axes");
  pca_cmd->add_option("trajectories", trajectories, "trajectory_means.f32 dumps or CSV files")->required();
  pca_cmd->add_option("--components", components, "Number of principal axes")->check(CLI::PositiveNumber);
  pca_cmd->add_flag("--per-trajectory", per_trajectory, "Fit one basis per trajectory");

  BenchOptions bench;
  bench.dims = {10};
  std::string mode = "auto";
  double target = 0.0, sigma0 = 0.0;
  auto* bench_cmd = app.add_subcommand("bench-cmaes", "CMA-ES on standard test functions");
  bench_cmd->add_option("--suite", bench.suite, "sphere | rosenbrock | rastrigin")->required();
  bench_cmd->add_option("--dims", bench.dims, "Comma-separated dimensions")->delimiter(',');
  bench_cmd->add_option("--budget", bench.budget, "Evaluation budget per run");
  auto* target_opt = bench_cmd->add_option("--target", target, "Target fitness");
  auto* sigma_opt = bench_cmd->add_option("--sigma0", sigma0, "Initial step size");
  bench_cmd->add_option("--mode", mode, "Covariance mode: auto | full | diagonal");

  std::vector<std::string> argv_store{"latentopt"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::ParseError& e) {
      fail(1, "USAGE", e.what());
    }
    if (seed_opt->count() > 0) g.seed = seed;
    if (target_opt->count() > 0) bench.target = target;
    if (sigma_opt->count() > 0) bench.sigma0 = sigma0;

    if (beautify_cmd->parsed()) return cmd_beautify(g, input, out);
    if (invert_cmd->parsed()) return cmd_invert(g, input, out);
    if (metrics_cmd->parsed()) return cmd_eval_metrics(csv, out);
    if (pca_cmd->parsed()) return cmd_pca_paths(g, trajectories, components, per_trajectory, out);
    if (bench_cmd->parsed()) return cmd_bench(g, bench, mode, out);
    fail(1, "USAGE", "no command given");
  } catch (const Failure& f) {
    err << "error: " << f.tag << ": " << one_line(f.message) << '\n';
    return f.exit_code;
  } catch (const std::exception& e) {
    err << "error: INTERNAL: " << one_line(e.what()) << '\n';
    return 4;
  }
}

}  // namespace latentopt
