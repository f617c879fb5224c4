#include "latentopt/toy_backend.hpp"

#include <algorithm>
#include <cmath>

#include "latentopt/errors.hpp"
#include "latentopt/rng.hpp"

namespace latentopt {

namespace {

double draw(SplitMix64& rng, double scale) { return scale * (2.0 * rng.uniform() - 1.0); }

}  // namespace

ToyModel::ToyModel(const ToyConfig& config) : config_(config) {
  const ImageShape& s = config_.image_shape;
  if (config_.layers <= 0 || config_.dim <= 0 || config_.pool <= 0 || s.height % config_.pool != 0 ||
      s.width % config_.pool != 0 || s.channels <= 0)
    throw InvalidArgument("toy model: inconsistent sizes");

  const int n = config_.layers * config_.dim;
  const int pixels = static_cast<int>(s.size());
  const int cells = feature_dim();

  SplitMix64 rng(config_.seed);
  Eigen::MatrixXd coarse(cells, n);
  for (int i = 0; i < cells; ++i)
    for (int j = 0; j < n; ++j) coarse(i, j) = draw(rng, config_.coarse_scale);

  basis_.resize(pixels, n);
  const int gw = s.width / config_.pool;
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x)
      for (int c = 0; c < s.channels; ++c) {
        const int p = (y * s.width + x) * s.channels + c;
        const int cell = ((y / config_.pool) * gw + x / config_.pool) * s.channels + c;
        for (int j = 0; j < n; ++j) basis_(p, j) = coarse(cell, j);
      }
  for (int p = 0; p < pixels; ++p)
    for (int j = 0; j < n; ++j) basis_(p, j) += draw(rng, config_.fine_scale);

  Eigen::VectorXd ref(n);
  for (int j = 0; j < n; ++j) ref[j] = draw(rng, config_.reference_scale);
  Eigen::VectorXd dir(n);
  for (int j = 0; j < n; ++j) dir[j] = draw(rng, 1.0);
  dir *= config_.target_distance / dir.norm();

  reference_ = LatentPoint::from_flat(config_.layers, config_.dim, ref);
  ideal_ = LatentPoint::from_flat(config_.layers, config_.dim, ref + dir);
  pinv_ = basis_.completeOrthogonalDecomposition().pseudoInverse();
  ideal_image_ = generate(ideal_);
}

int ToyModel::feature_dim() const {
  const ImageShape& s = config_.image_shape;
  return (s.height / config_.pool) * (s.width / config_.pool) * s.channels;
}

BackendCapabilities ToyModel::capabilities() const {
  BackendCapabilities caps;
  caps.encode = caps.generate = caps.features = caps.score = caps.grad_objective = true;
  caps.latent_layers = config_.layers;
  caps.latent_dim = config_.dim;
  caps.image_shape = config_.image_shape;
  caps.feature_dim = feature_dim();
  return caps;
}

Eigen::VectorXd ToyModel::pre_clamp(const LatentPoint& latent) const {
  return basis_ * latent.flat() + Eigen::VectorXd::Constant(basis_.rows(), config_.bias);
}

ImageTensor ToyModel::generate(const LatentPoint& latent) const {
  const Eigen::VectorXd raw = pre_clamp(latent);
  ImageTensor img{config_.image_shape, std::vector<double>(raw.size())};
  for (Eigen::Index i = 0; i < raw.size(); ++i) img.data[i] = std::clamp(raw[i], 0.0, 1.0);
  return img;
}

LatentPoint ToyModel::encode(const ImageTensor& image) const {
  const Eigen::Map<const Eigen::VectorXd> pixels(image.data.data(), static_cast<Eigen::Index>(image.data.size()));
  const Eigen::VectorXd centered = pixels.array() - config_.bias;
  return LatentPoint::from_flat(config_.layers, config_.dim, pinv_ * centered);
}

Eigen::VectorXd ToyModel::features(const ImageTensor& image) const {
  const ImageShape& s = config_.image_shape;
  const int pool = config_.pool;
  const int gw = s.width / pool;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(feature_dim());
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x)
      for (int c = 0; c < s.channels; ++c) out[((y / pool) * gw + x / pool) * s.channels + c] += image.at(y, x, c);
  return out / static_cast<double>(pool * pool);
}

double ToyModel::score(const ImageTensor& image) const {
  double dist2 = 0.0;
  for (std::size_t i = 0; i < image.data.size(); ++i) {
    const double d = image.data[i] - ideal_image_.data[i];
    dist2 += d * d;
  }
  return 1.0 + 4.0 * std::exp(-config_.sharpness * dist2);
}

Eigen::VectorXd ToyModel::grad_objective(const LatentPoint& latent, const LossWeights& w,
                                         const Eigen::VectorXd& ref_features) const {
  const Eigen::VectorXd raw = pre_clamp(latent);
  const ImageTensor img = generate(latent);
  const Eigen::VectorXd diff = features(img) - ref_features;
  if (diff.squaredNorm() < w.theta) return Eigen::VectorXd::Zero(basis_.cols());

  // d lpips / d pixel = 2 (F - ref)[cell] / pool^2, zero where the clamp is active
  const ImageShape& s = config_.image_shape;
  const int pool = config_.pool;
  const int gw = s.width / pool;
  Eigen::VectorXd pixel_grad(raw.size());
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x)
      for (int c = 0; c < s.channels; ++c) {
        const std::size_t p = img.index(y, x, c);
        const bool inside = raw[p] > 0.0 && raw[p] < 1.0;
        pixel_grad[p] = inside ? 2.0 * diff[((y / pool) * gw + x / pool) * s.channels + c] / (pool * pool) : 0.0;
      }
  return w.beta1 * (basis_.transpose() * pixel_grad);
}

ToyBackend::ToyBackend(std::shared_ptr<const ToyModel> model)
    : model_(std::move(model)), caps_(model_->capabilities()) {}

std::string ToyBackend::identity() const { return "toy(seed=" + std::to_string(model_->config().seed) + ")"; }

std::shared_ptr<const ToyModel> default_toy_model() {
  static const std::shared_ptr<const ToyModel> model = std::make_shared<const ToyModel>();
  return model;
}

}  // namespace latentopt
