#include "latentopt/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "latentopt/errors.hpp"

namespace latentopt {

LatentPoint LatentPoint::zeros(int layers, int dim) {
  if (layers <= 0 || dim <= 0) throw InvalidArgument("latent: layers and dim must be positive");
  return LatentPoint{layers, dim, std::vector<double>(static_cast<std::size_t>(layers) * dim, 0.0)};
}

LatentPoint LatentPoint::from_flat(int layers, int dim, const Eigen::VectorXd& flat) {
  LatentPoint p = zeros(layers, dim);
  if (static_cast<std::size_t>(flat.size()) != p.size())
    throw InvalidArgument("latent: flat vector has length " + std::to_string(flat.size()) + ", expected " +
                          std::to_string(p.size()));
  std::copy(flat.data(), flat.data() + flat.size(), p.data.begin());
  return p;
}

Eigen::VectorXd LatentPoint::flat() const {
  return Eigen::Map<const Eigen::VectorXd>(data.data(), static_cast<Eigen::Index>(data.size()));
}

void LatentPoint::validate() const {
  if (layers <= 0 || dim <= 0) throw InvalidArgument("latent: layers and dim must be positive");
  if (data.size() != static_cast<std::size_t>(layers) * dim) throw InvalidArgument("latent: data length mismatch");
  if (!std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); }))
    throw InvalidArgument("latent: non-finite entry");
}

void validate_mask(const LayerMask& mask, int layers) {
  if (mask.empty()) throw InvalidArgument("layer mask is empty");
  std::vector<bool> seen(layers, false);
  for (int l : mask) {
    if (l < 0 || l >= layers) throw InvalidArgument("layer mask index " + std::to_string(l) + " out of range");
    if (seen[l]) throw InvalidArgument("layer mask repeats layer " + std::to_string(l));
    seen[l] = true;
  }
}

Eigen::VectorXd gather_layers(const LatentPoint& latent, const LayerMask& mask) {
  validate_mask(mask, latent.layers);
  Eigen::VectorXd out(static_cast<Eigen::Index>(mask.size()) * latent.dim);
  Eigen::Index k = 0;
  for (int l : mask)
    for (int d = 0; d < latent.dim; ++d) out[k++] = latent.data[static_cast<std::size_t>(l) * latent.dim + d];
  return out;
}

LatentPoint scatter_layers(const LatentPoint& base, const LayerMask& mask, const Eigen::VectorXd& values) {
  validate_mask(mask, base.layers);
  if (values.size() != static_cast<Eigen::Index>(mask.size()) * base.dim)
    throw InvalidArgument("scatter_layers: value length does not match mask");
  LatentPoint out = base;
  Eigen::Index k = 0;
  for (int l : mask)
    for (int d = 0; d < base.dim; ++d) out.data[static_cast<std::size_t>(l) * base.dim + d] = values[k++];
  return out;
}

std::string ImageShape::str() const {
  return std::to_string(height) + "x" + std::to_string(width) + "x" + std::to_string(channels);
}

ImageTensor ImageTensor::filled(ImageShape shape, double value) {
  return ImageTensor{shape, std::vector<double>(shape.size(), value)};
}

void ImageTensor::validate() const {
  if (shape.height <= 0 || shape.width <= 0 || shape.channels <= 0)
    throw InvalidArgument("image: dimensions must be positive");
  if (data.size() != shape.size()) throw InvalidArgument("image: data length does not match " + shape.str());
  for (double v : data)
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("image: entries must lie in [0, 1]");
}

}  // namespace latentopt
