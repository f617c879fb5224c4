// Regenerates tests/fixtures from the toy model. Usage: latentopt_fixtures <dir>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "latentopt/artifacts.hpp"
#include "latentopt/conformance.hpp"
#include "latentopt/rng.hpp"
#include "latentopt/toy_backend.hpp"

using namespace latentopt;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSharedFixtures = 50;

std::vector<double> flatten(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  return out;
}

void write_toy(const fs::path& dir, const ToyModel& model) {
  const ToyConfig& c = model.config();
  fs::create_directories(dir);
  const json description{{"seed", c.seed},
                         {"layers", c.layers},
                         {"dim", c.dim},
                         {"image_shape", {c.image_shape.height, c.image_shape.width, c.image_shape.channels}},
                         {"pool", c.pool},
                         {"coarse_scale", c.coarse_scale},
                         {"fine_scale", c.fine_scale},
                         {"bias", c.bias},
                         {"reference_scale", c.reference_scale},
                         {"target_distance", c.target_distance},
                         {"sharpness", c.sharpness},
                         {"feature_dim", model.feature_dim()}};
  write_text(dir / "model.json", description.dump(2) + "\n");
  write_f32_dump(dir / "basis.f32", flatten(model.basis()),
                 {static_cast<int>(model.basis().rows()), static_cast<int>(model.basis().cols())});
  write_f32_dump(dir / "reference_latent.f32", model.reference_latent().data, {c.layers, c.dim});
  write_f32_dump(dir / "ideal_latent.f32", model.ideal_latent().data, {c.layers, c.dim});
  write_f32_dump(dir / "ideal_image.f32", model.ideal_image().data,
                 {c.image_shape.height, c.image_shape.width, c.image_shape.channels});
}

// Latents spread from the reference towards and past the ideal, with noise.
std::vector<LatentPoint> shared_latents(const ToyModel& model) {
  const ToyConfig& c = model.config();
  SplitMix64 rng(7);
  std::vector<LatentPoint> out;
  for (int i = 0; i < kSharedFixtures; ++i) {
    const double t = 1.5 * i / (kSharedFixtures - 1);
    LatentPoint w = LatentPoint::zeros(c.layers, c.dim);
    for (std::size_t j = 0; j < w.data.size(); ++j)
      w.data[j] = model.reference_latent().data[j] +
                  t * (model.ideal_latent().data[j] - model.reference_latent().data[j]) +
                  0.05 * (2.0 * rng.uniform() - 1.0);
    // Round through f32 so the stored inputs are exactly what consumers read.
    for (double& v : w.data) v = static_cast<float>(v);
    out.push_back(w);
  }
  return out;
}

void write_shared(const fs::path& dir, const ToyModel& model) {
  fs::create_directories(dir);
  const ToyConfig& c = model.config();
  std::vector<double> latents, images, features, scores, encoded;
  for (const LatentPoint& w : shared_latents(model)) {
    const ImageTensor img = model.generate(w);
    latents.insert(latents.end(), w.data.begin(), w.data.end());
    images.insert(images.end(), img.data.begin(), img.data.end());
    const Eigen::VectorXd f = model.features(img);
    features.insert(features.end(), f.data(), f.data() + f.size());
    scores.push_back(model.score(img));
    const LatentPoint e = model.encode(img);
    encoded.insert(encoded.end(), e.data.begin(), e.data.end());
  }
  const int n = kSharedFixtures;
  write_f32_dump(dir / "latents.f32", latents, {n, c.layers, c.dim});
  write_f32_dump(dir / "generate.f32", images, {n, c.image_shape.height, c.image_shape.width, c.image_shape.channels});
  write_f32_dump(dir / "features.f32", features, {n, model.feature_dim()});
  write_f32_dump(dir / "score.f32", scores, {n});
  write_f32_dump(dir / "encode.f32", encoded, {n, c.layers, c.dim});
}

void write_protocol(const fs::path& dir, const ToyModel& model) {
  fs::create_directories(dir);
  auto backend = std::make_shared<ToyBackend>(std::make_shared<ToyModel>(model.config()));
  const protocol::Transcript t = protocol::record_conformance(backend, model);
  write_text(dir / "client_to_server.bin", t.client_to_server);
  write_text(dir / "server_to_client.bin", t.server_to_client);
  write_text(dir / "index.json", t.index.dump(2) + "\n");
}

void write_metrics(const fs::path& dir, const ToyModel& model) {
  fs::create_directories(dir);
  char line[96];
  std::string perfect = "prediction,target\n";
  for (int i = 0; i < 20; ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", 1.0 + 0.2 * i, 1.0 + 0.2 * i);
    perfect += line;
  }
  write_text(dir / "perfect.csv", perfect);

  SplitMix64 rng(11);
  std::string random = "prediction,target\n";
  for (int i = 0; i < 100; ++i) {
    const double target = 1.0 + 4.0 * rng.uniform();
    const double pred = target + 0.6 * (rng.uniform() - 0.5);
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", pred, target);
    random += line;
  }
  write_text(dir / "random100.csv", random);

  // Toy scorer outputs against the same scores rounded to a rating grid.
  std::string scorer = "prediction,target\n";
  for (const LatentPoint& w : shared_latents(model)) {
    const double s = model.score(model.generate(w));
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", s, std::round(s * 10.0) / 10.0);
    scorer += line;
  }
  write_text(dir / "toy_scorer.csv", scorer);
}

void write_face(const fs::path& path, const ToyModel& model) {
  write_ppm(path, model.generate(model.reference_latent()));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: latentopt_fixtures <fixture-dir>\n";
    return 1;
  }
  const fs::path root = argv[1];
  const auto model = default_toy_model();
  write_toy(root / "toy", *model);
  write_shared(root / "toy" / "shared", *model);
  write_protocol(root / "protocol", *model);
  write_metrics(root / "metrics", *model);
  write_face(root / "face.ppm", *model);
  std::cout << "fixtures written to " << root << "\n";
  return 0;
}
