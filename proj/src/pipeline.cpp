#include "latentopt/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include "latentopt/artifacts.hpp"
#include "latentopt/errors.hpp"

namespace latentopt {

namespace fs = std::filesystem;
using nlohmann::json;

void InversionConfig::validate() const {
  if (refine_iterations < 0) throw InvalidArgument("inversion: refine_iterations must be >= 0");
  adam.validate();
  if (gradient_source == GradientSource::FiniteDifference && !(fd_step > 0.0))
    throw InvalidArgument("inversion: finite-difference step must be positive");
  if (divergence_patience <= 0) throw InvalidArgument("inversion: divergence_patience must be positive");
}

void BeautifyConfig::validate() const {
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw InvalidArgument("beautify: sigma0 must be positive");
  if (generations < 0) throw InvalidArgument("beautify: generations must be >= 0");
  if (retries < 0) throw InvalidArgument("beautify: retries must be >= 0");
  if (snapshot_stride <= 0) throw InvalidArgument("beautify: snapshot_stride must be positive");
  weights.validate();
}

namespace {

// Weights that make grad_objective the gradient of the plain perceptual loss.
constexpr LossWeights kInversionWeights{1.0, 0.0, 0.0, 5.0};

double lpips_of(ModelGateway& g, const LatentPoint& x, const Eigen::VectorXd& ref) {
  return perceptual_loss(ref, g.features(g.generate(x)));
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename F>
auto staged(const char* stage, F&& body) {
  const std::string prefix = std::string(stage) + ": ";
  try {
    return body();
  } catch (const ModelError& e) {
    throw ModelError(e.code(), prefix + e.what());
  } catch (const VersionMismatch& e) {
    throw VersionMismatch(prefix + e.what());
  } catch (const ProtocolError& e) {
    throw ProtocolError(prefix + e.what());
  } catch (const TransportError& e) {
    throw TransportError(prefix + e.what());
  } catch (const OptimizationAborted& e) {
    throw OptimizationAborted(prefix + e.what());
  } catch (const NumericError& e) {
    throw NumericError(prefix + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(prefix + e.what());
  }
}

}  // namespace

json to_json(const LossBreakdown& b) {
  return json{{"lpips", b.lpips},
              {"beauty", b.beauty},
              {"combined", b.combined},
              {"raw_score", b.raw_score},
              {"hinge_active", b.hinge_active}};
}

InversionResult invert(const ImageTensor& image, ModelGateway& gateway, const InversionConfig& cfg) {
  cfg.validate();
  const BackendCapabilities& caps = gateway.capabilities();
  if (!caps.encode) throw CapabilityError("encode");
  if (!caps.generate) throw CapabilityError("generate");
  if (!caps.features) throw CapabilityError("features");
  if (cfg.refine_iterations > 0 && cfg.gradient_source == GradientSource::Backend && !caps.grad_objective)
    throw CapabilityError("grad_objective");

  InversionResult out;
  out.encoded = gateway.encode(image);
  out.ref_features = gateway.features(image);
  const int layers = out.encoded.layers;
  const int dim = out.encoded.dim;

  LatentPoint x = out.encoded;
  LatentPoint best = x;
  double best_lpips = lpips_of(gateway, x, out.ref_features);
  out.report.lpips_before = best_lpips;

  AdamState adam = AdamState::zeros(static_cast<Eigen::Index>(x.size()));
  double previous = best_lpips;
  int rising = 0;
  for (int step = 0; step < cfg.refine_iterations; ++step) {
    if (cfg.target_lpips && best_lpips <= *cfg.target_lpips) break;
    Eigen::VectorXd grad;
    if (cfg.gradient_source == GradientSource::Backend) {
      grad = gateway.grad_objective(x, kInversionWeights, out.ref_features);
    } else {
      grad = fd_gradient(
          [&](const Eigen::VectorXd& v) {
            return lpips_of(gateway, LatentPoint::from_flat(layers, dim, v), out.ref_features);
          },
          x.flat(), cfg.fd_step);
      out.report.eval_count += 2 * static_cast<long>(x.size());
    }
    const Eigen::VectorXd delta = adam_step(adam, cfg.adam, grad);
    x = LatentPoint::from_flat(layers, dim, x.flat() + delta);
    const double current = lpips_of(gateway, x, out.ref_features);
    out.report.steps = step + 1;
    if (current < best_lpips) {
      best_lpips = current;
      best = x;
    }
    rising = current > previous ? rising + 1 : 0;
    previous = current;
    if (rising >= cfg.divergence_patience)
      throw OptimizationAborted("inversion diverged: lpips rose for " + std::to_string(rising) +
                                " consecutive steps (now " + format_double(current) + ", best " +
                                format_double(best_lpips) + ")");
  }
  out.x0 = std::move(best);
  out.report.lpips_after = best_lpips;
  return out;
}

namespace {

std::optional<LossBreakdown> evaluate_with_retry(ModelGateway& g, const LatentPoint& latent,
                                                 const Eigen::VectorXd& ref, const LossWeights& w, int retries,
                                                 std::string& last_error) {
  for (int attempt = 0; attempt <= retries; ++attempt) {
    try {
      return evaluate_objective(latent, g, ref, w);
    } catch (const std::exception& e) {
      last_error = e.what();
    }
  }
  return std::nullopt;
}

}  // namespace

BeautifyResult beautify(const LatentPoint& x0, const ImageTensor& image_ref, ModelGateway& gateway,
                        const BeautifyConfig& cfg) {
  GatewayPool pool = GatewayPool::borrow(gateway);
  return beautify(x0, image_ref, pool, cfg);
}

BeautifyResult beautify(const LatentPoint& x0, const ImageTensor& image_ref, GatewayPool& pool,
                        const BeautifyConfig& cfg) {
  cfg.validate();
  x0.validate();
  ModelGateway& primary = pool.front();
  const BackendCapabilities& caps = primary.capabilities();
  if (!caps.generate) throw CapabilityError("generate");
  if (!caps.features) throw CapabilityError("features");
  if (!caps.score) throw CapabilityError("score");

  LayerMask mask;
  if (cfg.layer_mask) {
    mask = *cfg.layer_mask;
  } else {
    for (int l = 0; l < x0.layers; ++l) mask.push_back(l);
  }
  validate_mask(mask, x0.layers);
  const Eigen::VectorXd start = gather_layers(x0, mask);
  const int dim = static_cast<int>(start.size());

  const Eigen::VectorXd ref = primary.features(image_ref);

  BeautifyResult result;
  result.initial = evaluate_objective(x0, primary, ref, cfg.weights);
  result.final = result.initial;
  result.x_optimal = x0;

  const CmaParams params = make_cma_params(dim, cfg.cma);
  result.trajectory.metadata = json{{"seed", cfg.seed},
                                    {"sigma0", cfg.sigma0},
                                    {"generations", cfg.generations},
                                    {"optimizer_dim", dim},
                                    {"population_size", params.population_size},
                                    {"parent_count", params.parent_count},
                                    {"covariance_mode", params.covariance_mode == CovarianceMode::Full ? "full" : "diagonal"},
                                    {"weights", {{"beta1", cfg.weights.beta1}, {"beta2", cfg.weights.beta2},
                                                 {"theta", cfg.weights.theta}, {"c_max", cfg.weights.c_max}}},
                                    {"layer_mask", mask},
                                    {"backend", primary.identity()}};
  if (cfg.generations == 0) {
    result.stop_reason = std::string(to_string(StopReason::MaxGenerations));
    return result;
  }

  CmaState state = cma_init(start, cfg.sigma0, params, cfg.seed);
  StopCriteria criteria = cfg.stop;
  criteria.max_generations = cfg.generations;
  const bool snapshot_all = dim <= cfg.full_snapshot_max_dim;
  const std::size_t workers = pool.size();

  std::optional<StopReason> reason;
  while (!(reason = cma_should_stop(state, criteria))) {
    const std::vector<Eigen::VectorXd> candidates = cma_ask(state);
    const std::size_t lambda = candidates.size();
    std::vector<LatentPoint> latents;
    latents.reserve(lambda);
    for (const auto& c : candidates) latents.push_back(scatter_layers(x0, mask, c));

    std::vector<std::optional<LossBreakdown>> evals(lambda);
    std::vector<std::string> errors(workers);
    auto work = [&](std::size_t worker) {
      for (std::size_t i = worker; i < lambda; i += workers)
        evals[i] = evaluate_with_retry(pool.at(worker), latents[i], ref, cfg.weights, cfg.retries, errors[worker]);
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::jthread> threads;
      for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work, w);
    }

    std::vector<double> fitness(lambda, std::numeric_limits<double>::infinity());
    double sum = 0.0;
    int finite = 0;
    for (std::size_t i = 0; i < lambda; ++i) {
      if (!evals[i]) continue;
      fitness[i] = evals[i]->combined;
      if (std::isfinite(fitness[i])) {
        sum += fitness[i];
        ++finite;
      }
    }
    if (finite == 0) {
      std::string why;
      for (const auto& e : errors)
        if (!e.empty()) why = e;
      throw OptimizationAborted("every candidate of generation " + std::to_string(state.generation) +
                                " failed to evaluate" + (why.empty() ? "" : ": " + why));
    }

    for (std::size_t i = 0; i < lambda; ++i) {
      if (evals[i] && std::isfinite(fitness[i]) && fitness[i] < result.final.combined) {
        result.final = *evals[i];
        result.x_optimal = latents[i];
      }
    }
    cma_tell(state, candidates, fitness);

    TrajectoryRecord rec;
    rec.generation = state.generation - 1;
    rec.sigma = state.sigma;
    rec.best_fitness = result.final.combined;
    rec.mean_fitness = sum / finite;
    rec.best = result.final;
    if (snapshot_all || rec.generation == 0 || rec.generation % cfg.snapshot_stride == 0) rec.mean_snapshot = state.mean;
    result.trajectory.records.push_back(std::move(rec));
  }
  if (!result.trajectory.records.back().mean_snapshot) result.trajectory.records.back().mean_snapshot = state.mean;
  result.stop_reason = std::string(to_string(*reason));
  result.eval_count = state.eval_count;
  return result;
}

std::string Trajectory::to_csv() const {
  std::ostringstream out;
  out << "generation,sigma,best_fitness,mean_fitness,lpips,beauty,raw_score,hinge_active\n";
  for (const auto& r : records) {
    out << r.generation << ',' << format_double(r.sigma) << ',' << format_double(r.best_fitness) << ','
        << format_double(r.mean_fitness) << ',' << format_double(r.best.lpips) << ',' << format_double(r.best.beauty)
        << ',' << format_double(r.best.raw_score) << ',' << (r.best.hinge_active ? 1 : 0) << '\n';
  }
  return out.str();
}

ImageTensor render_final(const LatentPoint& x_optimal, ModelGateway& gateway) { return gateway.generate(x_optimal); }

json RunReport::to_json() const {
  auto latent_json = [](const LatentPoint& p) { return json{{"layers", p.layers}, {"dim", p.dim}, {"data", p.data}}; };
  return json{{"x0", latent_json(x0)},
              {"x_optimal", latent_json(x_optimal)},
              {"inversion",
               {{"lpips_before", inversion.lpips_before},
                {"lpips_after", inversion.lpips_after},
                {"steps", inversion.steps},
                {"eval_count", inversion.eval_count}}},
              {"initial", latentopt::to_json(initial)},
              {"final", latentopt::to_json(final)},
              {"initial_raw_score", initial.raw_score},
              {"final_raw_score", final.raw_score},
              {"stop_reason", stop_reason},
              {"wall_clock_seconds", wall_clock_seconds},
              {"eval_count", eval_count},
              {"metadata", metadata}};
}

RunArtifacts run_full(const ImageTensor& image, GatewayPool& pool, const InversionConfig& inversion,
                      const BeautifyConfig& beautify_cfg, const std::optional<fs::path>& output_dir, json metadata) {
  const auto started = std::chrono::steady_clock::now();
  ModelGateway& gateway = pool.front();

  InversionResult inv = staged("invert", [&] { return invert(image, gateway, inversion); });
  BeautifyResult beau = staged("beautify", [&] { return beautify(inv.x0, image, pool, beautify_cfg); });
  ImageTensor reconstruction = staged("render", [&] { return render_final(inv.x0, gateway); });
  ImageTensor final_image = staged("render", [&] { return render_final(beau.x_optimal, gateway); });

  RunArtifacts out;
  out.report.x0 = inv.x0;
  out.report.x_optimal = beau.x_optimal;
  out.report.inversion = inv.report;
  out.report.initial = beau.initial;
  out.report.final = beau.final;
  out.report.stop_reason = beau.stop_reason;
  out.report.eval_count = inv.report.eval_count + beau.eval_count;
  metadata["backend"] = gateway.identity();
  metadata["trajectory"] = beau.trajectory.metadata;
  out.report.metadata = metadata;
  beau.trajectory.metadata = metadata;
  out.trajectory = std::move(beau.trajectory);
  out.reconstruction = std::move(reconstruction);
  out.final_image = std::move(final_image);
  out.report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  if (output_dir) {
    staged("write artifacts", [&] {
      fs::create_directories(*output_dir);
      const std::string comment = metadata.dump();
      write_png(*output_dir / "original.png", image, comment);
      write_png(*output_dir / "reconstruction.png", out.reconstruction, comment);
      write_png(*output_dir / "final.png", out.final_image, comment);
      write_text(*output_dir / "trajectory.csv", out.trajectory.to_csv());
      write_text(*output_dir / "report.json", out.report.to_json().dump(2) + "\n");
      write_f32_dump(*output_dir / "latent_x0.f32", out.report.x0.data, {out.report.x0.layers, out.report.x0.dim},
                     json{{"metadata", metadata}});
      write_f32_dump(*output_dir / "latent_optimal.f32", out.report.x_optimal.data,
                     {out.report.x_optimal.layers, out.report.x_optimal.dim}, json{{"metadata", metadata}});
      std::vector<double> means;
      std::vector<long> generations;
      int width = 0;
      for (const auto& r : out.trajectory.records) {
        if (!r.mean_snapshot) continue;
        width = static_cast<int>(r.mean_snapshot->size());
        means.insert(means.end(), r.mean_snapshot->data(), r.mean_snapshot->data() + r.mean_snapshot->size());
        generations.push_back(r.generation);
      }
      write_f32_dump(*output_dir / "trajectory_means.f32", means, {static_cast<int>(generations.size()), width},
                     json{{"generations", generations}, {"metadata", metadata}});
      return 0;
    });
  }
  return out;
}

}  // namespace latentopt
