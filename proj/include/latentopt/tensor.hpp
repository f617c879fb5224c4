#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace latentopt {

/// A point in a layered latent space: `layers` style vectors of `dim` entries,
/// stored row-major. The optimizer works on the flattened view.
struct LatentPoint {
  int layers = 0;
  int dim = 0;
  std::vector<double> data;

  static LatentPoint zeros(int layers, int dim);
  static LatentPoint from_flat(int layers, int dim, const Eigen::VectorXd& flat);

  std::size_t size() const { return data.size(); }
  Eigen::VectorXd flat() const;
  /// Throws InvalidArgument on inconsistent sizes or non-finite entries.
  void validate() const;

  friend bool operator==(const LatentPoint&, const LatentPoint&) = default;
};

/// Selects which latent layers the optimizer may move; the rest stay fixed.
using LayerMask = std::vector<int>;

/// Entries of `latent` belonging to the masked layers, in mask order.
Eigen::VectorXd gather_layers(const LatentPoint& latent, const LayerMask& mask);
/// Copy of `base` with the masked layers overwritten by `values`.
LatentPoint scatter_layers(const LatentPoint& base, const LayerMask& mask, const Eigen::VectorXd& values);
/// Throws InvalidArgument for out-of-range or repeated layer indices.
void validate_mask(const LayerMask& mask, int layers);

struct ImageShape {
  int height = 0;
  int width = 0;
  int channels = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
  }
  std::string str() const;
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

/// Channel-last, row-major image with values in [0, 1].
struct ImageTensor {
  ImageShape shape;
  std::vector<double> data;

  static ImageTensor filled(ImageShape shape, double value);

  double& at(int y, int x, int c) { return data[index(y, x, c)]; }
  double at(int y, int x, int c) const { return data[index(y, x, c)]; }
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * shape.width + x) * shape.channels + c;
  }

  /// Throws InvalidArgument when the data length or value range is wrong.
  void validate() const;

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;
};

}  // namespace latentopt
