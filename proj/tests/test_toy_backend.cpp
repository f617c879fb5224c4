#include <doctest.h>

#include <random>

#include "latentopt/adam.hpp"
#include "latentopt/artifacts.hpp"
#include "latentopt/errors.hpp"
#include "latentopt/gateway.hpp"
#include "latentopt/toy_backend.hpp"
#include "support.hpp"

using namespace latentopt;

namespace {

const ToyModel& toy() { return *default_toy_model(); }

bool inside_clamp(const LatentPoint& w) {
  const Eigen::VectorXd raw = toy().pre_clamp(w);
  return raw.minCoeff() > 0.0 && raw.maxCoeff() < 1.0;
}

// 4x4 mean pooling written out cell by cell.
Eigen::VectorXd pooling_oracle(const ImageTensor& img) {
  Eigen::VectorXd out(192);
  for (int cy = 0; cy < 8; ++cy)
    for (int cx = 0; cx < 8; ++cx)
      for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (int dy = 0; dy < 4; ++dy)
          for (int dx = 0; dx < 4; ++dx) sum += img.at(4 * cy + dy, 4 * cx + dx, c);
        out[(cy * 8 + cx) * 3 + c] = sum / 16.0;
      }
  return out;
}

double hinged_lpips(const Eigen::VectorXd& x, const Eigen::VectorXd& ref, const LossWeights& w) {
  const Eigen::VectorXd f = toy().features(toy().generate(LatentPoint::from_flat(4, 16, x)));
  return w.beta1 * std::max((f - ref).squaredNorm(), w.theta);
}

}  // namespace

TEST_CASE("capabilities") {
  const BackendCapabilities caps = toy().capabilities();
  CHECK(caps.encode);
  CHECK(caps.generate);
  CHECK(caps.features);
  CHECK(caps.score);
  CHECK(caps.grad_objective);
  CHECK(caps.latent_layers == 4);
  CHECK(caps.latent_dim == 16);
  CHECK(caps.image_shape == ImageShape{32, 32, 3});
  CHECK(caps.feature_dim == 192);
}

TEST_CASE("basis matches the committed fixture") {
  const F32Dump dump = read_f32_dump(test::fixture("toy/basis.f32"));
  REQUIRE(dump.shape == std::vector<int>{3072, 64});
  for (int p = 0; p < 3072; ++p)
    for (int j = 0; j < 64; ++j) {
      const double stored = dump.values[static_cast<std::size_t>(p) * 64 + j];
      REQUIRE(stored == static_cast<float>(toy().basis()(p, j)));
    }
  const F32Dump ideal = read_f32_dump(test::fixture("toy/ideal_image.f32"));
  for (std::size_t i = 0; i < ideal.values.size(); ++i)
    REQUIRE(ideal.values[i] == static_cast<float>(toy().ideal_image().data[i]));
}

TEST_CASE("generate") {
  const ImageTensor zero = toy().generate(LatentPoint::zeros(4, 16));
  for (double v : zero.data) CHECK(v == 0.5);

  std::mt19937_64 rng(1);
  const LatentPoint w = test::random_latent(4, 16, rng, 0.5);
  CHECK(toy().generate(w) == toy().generate(w));

  for (int trial = 0; trial < 10; ++trial) {
    const LatentPoint a = test::random_latent(4, 16, rng, 0.2), b = test::random_latent(4, 16, rng, 0.2);
    LatentPoint sum = a;
    for (std::size_t i = 0; i < sum.data.size(); ++i) sum.data[i] += b.data[i];
    REQUIRE(inside_clamp(sum));
    REQUIRE(inside_clamp(a));
    REQUIRE(inside_clamp(b));
    const ImageTensor ga = toy().generate(a), gb = toy().generate(b), gs = toy().generate(sum);
    for (std::size_t i = 0; i < gs.data.size(); ++i)
      CHECK(std::abs((gs.data[i] - 0.5) - ((ga.data[i] - 0.5) + (gb.data[i] - 0.5))) < 1e-12);
  }

  LatentPoint huge = LatentPoint::zeros(4, 16);
  for (double& v : huge.data) v = 1e3;
  for (double v : toy().generate(huge).data) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("encode inverts generate inside the clamp bounds") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const LatentPoint w = test::random_latent(4, 16, rng, 0.5);
    REQUIRE(inside_clamp(w));
    const LatentPoint back = toy().encode(toy().generate(w));
    double worst = 0.0;
    for (std::size_t i = 0; i < w.data.size(); ++i) worst = std::max(worst, std::abs(back.data[i] - w.data[i]));
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("encoding the zero image solves the normal equations") {
  const Eigen::MatrixXd& b = toy().basis();
  const Eigen::VectorXd rhs = Eigen::VectorXd::Constant(b.rows(), -0.5);
  const Eigen::VectorXd expected = (b.transpose() * b).ldlt().solve(b.transpose() * rhs);
  const LatentPoint got = toy().encode(ImageTensor::filled({32, 32, 3}, 0.0));
  for (int j = 0; j < 64; ++j) CHECK(std::abs(got.data[j] - expected[j]) < 1e-8 * std::max(1.0, std::abs(expected[j])));
}

TEST_CASE("features") {
  const Eigen::VectorXd half = toy().features(ImageTensor::filled({32, 32, 3}, 0.5));
  CHECK(half.size() == toy().capabilities().feature_dim);
  for (Eigen::Index i = 0; i < half.size(); ++i) CHECK(half[i] == 0.5);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const ImageTensor img = test::random_image({32, 32, 3}, rng);
    const Eigen::VectorXd got = toy().features(img);
    CHECK(got.size() == 192);
    CHECK((got - pooling_oracle(img)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("score") {
  CHECK(toy().score(toy().ideal_image()) == 5.0);
  ImageTensor near = toy().ideal_image();
  near.data[100] += near.data[100] > 0.5 ? -1e-3 : 1e-3;
  CHECK(toy().score(near) < 5.0);
  CHECK(toy().score(near) > 4.99);

  const double far = toy().score(ImageTensor::filled({32, 32, 3}, 1.0));
  CHECK(far >= 1.0);
  CHECK(far < 1.0 + 1e-6);

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const double s = toy().score(toy().generate(test::random_latent(4, 16, rng, 0.8)));
    CHECK(s >= 1.0);
    CHECK(s <= 5.0);
  }
}

TEST_CASE("reference fixture sits well below the ideal score") {
  const double s = toy().score(toy().generate(toy().reference_latent()));
  CHECK(s == doctest::Approx(2.1).epsilon(0.01));
}

TEST_CASE("objective gradient") {
  const Eigen::VectorXd ref = toy().features(toy().generate(toy().reference_latent()));

  SUBCASE("zero inside the hinge") {
    const LossWeights w;
    LatentPoint x = toy().reference_latent();
    x.data[0] += 0.01;
    CHECK(toy().grad_objective(x, w, ref).isZero(0.0));
  }
  SUBCASE("matches central differences") {
    std::mt19937_64 rng(5);
    const LossWeights w{2.0, 0.25, 0.15, 5.0};
    int checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
      LatentPoint x = toy().reference_latent();
      const LatentPoint d = test::random_latent(4, 16, rng, 0.6);
      for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] += d.data[i];
      REQUIRE(inside_clamp(x));
      const Eigen::VectorXd analytic = toy().grad_objective(x, w, ref);
      const Eigen::VectorXd numeric =
          fd_gradient([&](const Eigen::VectorXd& v) { return hinged_lpips(v, ref, w); }, x.flat(), 1e-5);
      CHECK((analytic - numeric).cwiseAbs().maxCoeff() < 1e-4);
      checked += !analytic.isZero(0.0);
    }
    CHECK(checked == 20);
  }
  SUBCASE("vanishes at the exact reconstruction") {
    const LossWeights w{1.0, 0.0, 0.0, 5.0};
    CHECK(toy().grad_objective(toy().reference_latent(), w, ref).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("shared fixtures") {
  const F32Dump latents = read_f32_dump(test::fixture("toy/shared/latents.f32"));
  const F32Dump images = read_f32_dump(test::fixture("toy/shared/generate.f32"));
  const F32Dump features = read_f32_dump(test::fixture("toy/shared/features.f32"));
  const F32Dump scores = read_f32_dump(test::fixture("toy/shared/score.f32"));
  const F32Dump encoded = read_f32_dump(test::fixture("toy/shared/encode.f32"));
  REQUIRE(latents.shape == std::vector<int>{50, 4, 16});
  for (int i = 0; i < 50; ++i) {
    LatentPoint w = LatentPoint::zeros(4, 16);
    std::copy_n(latents.values.begin() + i * 64, 64, w.data.begin());
    const ImageTensor img = toy().generate(w);
    double worst = 0.0;
    for (int p = 0; p < 3072; ++p) worst = std::max(worst, std::abs(img.data[p] - images.values[i * 3072 + p]));
    const Eigen::VectorXd f = toy().features(img);
    for (int k = 0; k < 192; ++k) worst = std::max(worst, std::abs(f[k] - features.values[i * 192 + k]));
    worst = std::max(worst, std::abs(toy().score(img) - scores.values[i]));
    const LatentPoint e = toy().encode(img);
    for (int j = 0; j < 64; ++j) worst = std::max(worst, std::abs(e.data[j] - encoded.values[i * 64 + j]));
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("gateway rejects mismatched shapes") {
  ModelGateway gw(std::make_unique<ToyBackend>(default_toy_model()));
  CHECK_THROWS_AS(gw.encode(ImageTensor::filled({16, 16, 3}, 0.5)), ShapeMismatch);
  CHECK_THROWS_AS(gw.features(ImageTensor::filled({32, 32, 1}, 0.5)), ShapeMismatch);
  CHECK_THROWS_AS(gw.score(ImageTensor::filled({32, 31, 3}, 0.5)), ShapeMismatch);
  CHECK_THROWS_AS(gw.generate(LatentPoint::zeros(5, 16)), ShapeMismatch);
  CHECK_THROWS_AS(gw.grad_objective(LatentPoint::zeros(4, 16), LossWeights{}, Eigen::VectorXd::Zero(10)),
                  ShapeMismatch);
}
