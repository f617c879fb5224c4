#include "latentopt/config.hpp"

#include <set>

#include "latentopt/artifacts.hpp"
#include "latentopt/errors.hpp"

namespace latentopt {

using nlohmann::json;

namespace {

std::string key_path(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!keys.count(key)) throw ConfigError("unknown key '" + key_path(where, key) + "'");
}

template <typename T>
void read(const json& obj, const char* key, const std::string& where, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + key_path(where, key) + "' has the wrong type");
  }
}

double read_number(const json& obj, const char* key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) throw ConfigError("key '" + key_path(where, key) + "' must be a number");
  return obj.at(key).get<double>();
}

int read_int(const json& obj, const char* key, const std::string& where, int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_integer()) throw ConfigError("key '" + key_path(where, key) + "' must be an integer");
  return obj.at(key).get<int>();
}

std::optional<double> read_optional_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return read_number(obj, key, where, 0.0);
}

std::optional<int> read_optional_int(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return read_int(obj, key, where, 0);
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  RunConfig cfg;
  reject_unknown(doc, "", {"backend", "seed", "output_dir", "pool_size", "inversion", "beautify"});
  if (doc.contains("backend")) {
    if (!doc["backend"].is_string()) throw ConfigError("key 'backend' must be a string");
    cfg.backend = doc["backend"].get<std::string>();
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw ConfigError("key 'seed' must be a non-negative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("output_dir")) {
    std::string dir;
    read(doc, "output_dir", "", dir);
    cfg.output_dir = dir;
  }
  cfg.pool_size = read_int(doc, "pool_size", "", cfg.pool_size);
  if (cfg.pool_size <= 0) throw ConfigError("key 'pool_size' must be positive");

  if (doc.contains("inversion")) {
    const json& inv = doc["inversion"];
    reject_unknown(inv, "inversion",
                   {"refine_iterations", "gradient_source", "fd_step", "target_lpips", "divergence_patience", "adam"});
    InversionConfig& c = cfg.inversion;
    c.refine_iterations = read_int(inv, "refine_iterations", "inversion", c.refine_iterations);
    if (inv.contains("gradient_source")) {
      std::string src;
      read(inv, "gradient_source", "inversion", src);
      if (src == "backend") c.gradient_source = GradientSource::Backend;
      else if (src == "finite_difference") c.gradient_source = GradientSource::FiniteDifference;
      else throw ConfigError("key 'inversion.gradient_source' must be \"backend\" or \"finite_difference\"");
    }
    c.fd_step = read_number(inv, "fd_step", "inversion", c.fd_step);
    c.target_lpips = read_optional_number(inv, "target_lpips", "inversion");
    c.divergence_patience = read_int(inv, "divergence_patience", "inversion", c.divergence_patience);
    if (inv.contains("adam")) {
      const json& a = inv["adam"];
      reject_unknown(a, "inversion.adam", {"step_size", "decay_m", "decay_v", "epsilon"});
      c.adam.step_size = read_number(a, "step_size", "inversion.adam", c.adam.step_size);
      c.adam.decay_m = read_number(a, "decay_m", "inversion.adam", c.adam.decay_m);
      c.adam.decay_v = read_number(a, "decay_v", "inversion.adam", c.adam.decay_v);
      c.adam.epsilon = read_number(a, "epsilon", "inversion.adam", c.adam.epsilon);
    }
  }

  if (doc.contains("beautify")) {
    const json& b = doc["beautify"];
    reject_unknown(b, "beautify",
                   {"sigma0", "generations", "retries", "snapshot_stride", "layer_mask", "weights", "cma", "stop"});
    BeautifyConfig& c = cfg.beautify;
    c.sigma0 = read_number(b, "sigma0", "beautify", c.sigma0);
    c.generations = read_int(b, "generations", "beautify", c.generations);
    c.retries = read_int(b, "retries", "beautify", c.retries);
    c.snapshot_stride = read_int(b, "snapshot_stride", "beautify", c.snapshot_stride);
    if (b.contains("layer_mask") && !b["layer_mask"].is_null()) {
      LayerMask mask;
      read(b, "layer_mask", "beautify", mask);
      c.layer_mask = mask;
    }
    if (b.contains("weights")) {
      const json& w = b["weights"];
      reject_unknown(w, "beautify.weights", {"beta1", "beta2", "theta", "c_max"});
      c.weights.beta1 = read_number(w, "beta1", "beautify.weights", c.weights.beta1);
      c.weights.beta2 = read_number(w, "beta2", "beautify.weights", c.weights.beta2);
      c.weights.theta = read_number(w, "theta", "beautify.weights", c.weights.theta);
      c.weights.c_max = read_number(w, "c_max", "beautify.weights", c.weights.c_max);
    }
    if (b.contains("cma")) {
      const json& m = b["cma"];
      reject_unknown(m, "beautify.cma", {"population_size", "parent_count", "covariance_mode", "eigen_update_interval"});
      c.cma.population_size = read_optional_int(m, "population_size", "beautify.cma");
      c.cma.parent_count = read_optional_int(m, "parent_count", "beautify.cma");
      c.cma.eigen_update_interval = read_optional_int(m, "eigen_update_interval", "beautify.cma");
      if (m.contains("covariance_mode")) {
        std::string mode;
        read(m, "covariance_mode", "beautify.cma", mode);
        if (mode == "full") c.cma.covariance_mode = CovarianceMode::Full;
        else if (mode == "diagonal") c.cma.covariance_mode = CovarianceMode::Diagonal;
        else throw ConfigError("key 'beautify.cma.covariance_mode' must be \"full\" or \"diagonal\"");
      }
    }
    if (b.contains("stop")) {
      const json& s = b["stop"];
      reject_unknown(s, "beautify.stop", {"max_evaluations", "target_fitness", "sigma_tolerance", "max_condition"});
      if (auto v = read_optional_int(s, "max_evaluations", "beautify.stop")) c.stop.max_evaluations = *v;
      c.stop.target_fitness = read_optional_number(s, "target_fitness", "beautify.stop");
      c.stop.sigma_tolerance = read_number(s, "sigma_tolerance", "beautify.stop", c.stop.sigma_tolerance);
      c.stop.max_condition = read_number(s, "max_condition", "beautify.stop", c.stop.max_condition);
    }
  }
  cfg.beautify.seed = cfg.seed;

  try {
    cfg.inversion.validate();
    cfg.beautify.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigNotFound("config file not found: " + path.string());
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(doc);
}

json RunConfig::to_json() const {
  const auto opt = [](const auto& o) { return o ? json(*o) : json(nullptr); };
  const auto& b = beautify;
  std::string mode = "auto";
  if (b.cma.covariance_mode) mode = *b.cma.covariance_mode == CovarianceMode::Full ? "full" : "diagonal";
  return json{
      {"backend", opt(backend)},
      {"seed", seed},
      {"output_dir", output_dir.string()},
      {"pool_size", pool_size},
      {"inversion",
       {{"refine_iterations", inversion.refine_iterations},
        {"gradient_source", inversion.gradient_source == GradientSource::Backend ? "backend" : "finite_difference"},
        {"fd_step", inversion.fd_step},
        {"target_lpips", opt(inversion.target_lpips)},
        {"divergence_patience", inversion.divergence_patience},
        {"adam",
         {{"step_size", inversion.adam.step_size},
          {"decay_m", inversion.adam.decay_m},
          {"decay_v", inversion.adam.decay_v},
          {"epsilon", inversion.adam.epsilon}}}}},
      {"beautify",
       {{"sigma0", b.sigma0},
        {"generations", b.generations},
        {"retries", b.retries},
        {"snapshot_stride", b.snapshot_stride},
        {"layer_mask", opt(b.layer_mask)},
        {"weights", {{"beta1", b.weights.beta1}, {"beta2", b.weights.beta2}, {"theta", b.weights.theta}, {"c_max", b.weights.c_max}}},
        {"cma",
         {{"population_size", opt(b.cma.population_size)},
          {"parent_count", opt(b.cma.parent_count)},
          {"covariance_mode", mode},
          {"eigen_update_interval", opt(b.cma.eigen_update_interval)}}},
        {"stop",
         {{"max_evaluations", opt(b.stop.max_evaluations)},
          {"target_fitness", opt(b.stop.target_fitness)},
          {"sigma_tolerance", b.stop.sigma_tolerance},
          {"max_condition", b.stop.max_condition}}}}}};
}

}  // namespace latentopt
