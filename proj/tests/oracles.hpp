#pragma once

// Independent Monte Carlo references shared by unit and acceptance tests.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "mfsmd/data.hpp"
#include "mfsmd/model.hpp"

namespace oracle {

using mfsmd::Vec;

struct Estimate {
  Vec mean;
  Vec se;
};

// Mean and standard error of g(z) over `count` fresh draws.
inline Estimate mc_mean(const mfsmd::LabeledGaussianMixture& data, std::size_t count,
                        std::uint64_t seed, Eigen::Index dim,
                        const std::function<Vec(const mfsmd::Sample&)>& g) {
  mfsmd::Rng rng(seed);
  Vec sum = Vec::Zero(dim), sq = Vec::Zero(dim);
  for (std::size_t k = 0; k < count; ++k) {
    const Vec v = g(data.sample_one(rng));
    sum += v;
    sq += v.cwiseProduct(v);
  }
  const double n = static_cast<double>(count);
  Estimate e;
  e.mean = sum / n;
  const Vec var = (sq / n - e.mean.cwiseProduct(e.mean)) * (n / (n - 1.0));
  e.se = (var.cwiseMax(0.0) / n).cwiseSqrt();
  return e;
}

inline bool within_se(const Vec& value, const Estimate& e, double k) {
  return ((value - e.mean).cwiseAbs().array() <= k * e.se.array() + 1e-12).all();
}

inline Vec scalar(double x) { return Vec::Constant(1, x); }

// Plain SGD written out coordinate by coordinate, with no library calls
// beyond the data sampler.
inline mfsmd::Mat reference_sgd(mfsmd::Mat theta, const mfsmd::LabeledGaussianMixture& data,
                                double tau, std::size_t steps, std::uint64_t stream_seed) {
  mfsmd::Rng rng(stream_seed);
  const auto n = theta.cols();
  const double two_over_sqrt_pi = 2.0 * std::numbers::inv_sqrtpi;
  std::vector<double> u(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < steps; ++k) {
    const mfsmd::Sample z = data.sample_one(rng);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      u[i] = theta(0, i) * z.x[0] + theta(1, i) * z.x[1];
      sum += std::erf(u[i]);
    }
    const double yhat = sum / static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double g = (z.y - yhat) * (two_over_sqrt_pi * std::exp(-u[i] * u[i]));
      for (int r = 0; r < 2; ++r)
        theta(r, i) += tau / static_cast<double>(n) * (g * z.x[r]);
    }
  }
  return theta;
}

}  // namespace oracle
