#pragma once

// Scalar re-derivation of one CMA-ES generation in two dimensions with
// lambda = 4, mu = 2. Shares nothing with the library: constants are
// recomputed here and C^{-1/2} uses the closed form for 2x2 SPD matrices,
// sqrt(C) = (C + sqrt(det C) I) / sqrt(tr C + 2 sqrt(det C)).

#include <algorithm>
#include <array>
#include <cmath>

namespace oracle {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

struct State2 {
  Vec2 mean{};
  double sigma = 0.0;
  Mat2 cov{{{1.0, 0.0}, {0.0, 1.0}}};
  Vec2 path_sigma{};
  Vec2 path_c{};
  int generation = 0;
};

inline Mat2 inverse_sqrt(const Mat2& c) {
  const double det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
  const double s = std::sqrt(det);
  const double t = std::sqrt(c[0][0] + c[1][1] + 2.0 * s);
  const Mat2 root{{{(c[0][0] + s) / t, c[0][1] / t}, {c[1][0] / t, (c[1][1] + s) / t}}};
  const double rdet = root[0][0] * root[1][1] - root[0][1] * root[1][0];
  return Mat2{{{root[1][1] / rdet, -root[0][1] / rdet}, {-root[1][0] / rdet, root[0][0] / rdet}}};
}

/// One tell with candidates x[0..3] and fitnesses f[0..3].
inline State2 step(const State2& s, const std::array<Vec2, 4>& x, const std::array<double, 4>& f) {
  const double n = 2.0, lambda = 4.0;
  // mu = 2, raw weights ln((lambda + 1) / 2) - ln(i)
  const double w1_raw = std::log(2.5), w2_raw = std::log(2.5) - std::log(2.0);
  const double w1 = w1_raw / (w1_raw + w2_raw), w2 = w2_raw / (w1_raw + w2_raw);
  const double mu_eff = 1.0 / (w1 * w1 + w2 * w2);
  const double cs = (mu_eff + 2.0) / (n + mu_eff + 5.0);
  const double ds = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0) + cs;
  const double cc = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
  const double c1 = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff);
  const double cmu = std::min(1.0 - c1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0) * (n + 2.0) + mu_eff));
  const double chi = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
  (void)lambda;

  // the two best, ties by index
  int best = 0;
  for (int i = 1; i < 4; ++i)
    if (f[i] < f[best]) best = i;
  int second = best == 0 ? 1 : 0;
  for (int i = 0; i < 4; ++i)
    if (i != best && f[i] < f[second]) second = i;

  State2 o = s;
  for (int k = 0; k < 2; ++k) o.mean[k] = w1 * x[best][k] + w2 * x[second][k];
  const Vec2 yw{(o.mean[0] - s.mean[0]) / s.sigma, (o.mean[1] - s.mean[1]) / s.sigma};

  const Mat2 ci = inverse_sqrt(s.cov);
  const Vec2 ciy{ci[0][0] * yw[0] + ci[0][1] * yw[1], ci[1][0] * yw[0] + ci[1][1] * yw[1]};
  const double a = std::sqrt(cs * (2.0 - cs) * mu_eff);
  for (int k = 0; k < 2; ++k) o.path_sigma[k] = (1.0 - cs) * s.path_sigma[k] + a * ciy[k];
  const double ps = std::sqrt(o.path_sigma[0] * o.path_sigma[0] + o.path_sigma[1] * o.path_sigma[1]);
  const double corr = std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * (s.generation + 1)));
  const bool hs = ps / corr < (1.4 + 2.0 / (n + 1.0)) * chi;

  const double b = std::sqrt(cc * (2.0 - cc) * mu_eff);
  for (int k = 0; k < 2; ++k) o.path_c[k] = (1.0 - cc) * s.path_c[k] + (hs ? b * yw[k] : 0.0);
  const double dh = hs ? 0.0 : cc * (2.0 - cc);

  const Vec2 y1{(x[best][0] - s.mean[0]) / s.sigma, (x[best][1] - s.mean[1]) / s.sigma};
  const Vec2 y2{(x[second][0] - s.mean[0]) / s.sigma, (x[second][1] - s.mean[1]) / s.sigma};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      o.cov[i][j] = (1.0 - c1 - cmu) * s.cov[i][j] + c1 * (o.path_c[i] * o.path_c[j] + dh * s.cov[i][j]) +
                    cmu * (w1 * y1[i] * y1[j] + w2 * y2[i] * y2[j]);

  o.sigma = s.sigma * std::exp((cs / ds) * (ps / chi - 1.0));
  o.generation = s.generation + 1;
  return o;
}

}  // namespace oracle
