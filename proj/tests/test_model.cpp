#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fd.hpp"
#include "mfsmd/errors.hpp"
#include "mfsmd/model.hpp"

using namespace mfsmd;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

const Activation kErf{ActivationKind::Erf};
const Activation kTanh{ActivationKind::Tanh};
const Loss kSquared{LossKind::Squared};
const Loss kLogistic{LossKind::Logistic};

Vec random_vec(Rng& rng, Eigen::Index d, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Vec v(d);
  for (auto& e : v) e = g(rng);
  return v;
}

}  // namespace

TEST(Model, SigmaExamples) {
  EXPECT_EQ(sigma(kErf, v2(1, 2), v2(2, -1)), 0.0);
  EXPECT_NEAR(sigma(kErf, v2(1, 0), v2(1, 0)), 0.8427007929497149, 1e-15);
  EXPECT_NEAR(sigma(kErf, v2(10, 0), v2(5, 0)), 1.0, 1e-12);
  EXPECT_THROW(sigma(kErf, Vec::Ones(3), v2(1, 1)), InvalidArgument);
}

TEST(Model, GradSigmaExamples) {
  const Vec x = v2(1, 2);
  EXPECT_LT((grad_sigma(kErf, x, Vec::Zero(2)) - 1.1283791670955126 * x).norm(), 1e-15);
  EXPECT_EQ(grad_sigma(kErf, Vec::Zero(2), v2(0.3, 0.1)), Vec::Zero(2));
  const Vec t = v2(0.3, -0.8);
  const Vec g = fd::gradient([&](const Vec& th) { return sigma(kErf, x, th); }, t, 1e-6);
  EXPECT_LT((grad_sigma(kErf, x, t) - g).norm(), 1e-7);
  EXPECT_THROW(grad_sigma(kErf, Vec::Ones(3), t), InvalidArgument);
}

TEST(Model, PredictExamples) {
  const Vec t = v2(0.4, -0.9), x = v2(1.5, 0.2);
  Mat same(2, 4);
  same.colwise() = t;
  EXPECT_DOUBLE_EQ(predict(ParticleEnsemble(same), kErf, x), sigma(kErf, x, t));

  Mat pm(2, 2);
  pm << t, -t;
  for (const Vec& xx : {x, v2(-3, 7), v2(0.01, 0.0)})
    EXPECT_EQ(predict(ParticleEnsemble(pm), kErf, xx), 0.0);

  Mat three(2, 3);
  three << 0.1, -0.5, 1.2, 0.7, 0.3, -0.4;
  const double hand = (std::erf(0.1 * 1.5 + 0.7 * 0.2) + std::erf(-0.5 * 1.5 + 0.3 * 0.2) +
                       std::erf(1.2 * 1.5 - 0.4 * 0.2)) /
                      3.0;
  EXPECT_NEAR(predict(ParticleEnsemble(three), kErf, x), hand, 1e-15);

  EXPECT_THROW(predict(ParticleEnsemble(), kErf, x), InvalidArgument);
  EXPECT_THROW(predict(ParticleEnsemble(three), kErf, Vec::Ones(3)), InvalidArgument);
}

TEST(Model, EnsembleValidation) {
  EXPECT_THROW(ParticleEnsemble(Mat(2, 0)), InvalidArgument);
  Mat bad = Mat::Zero(2, 2);
  bad(1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(ParticleEnsemble{bad}, InvalidArgument);
  EXPECT_TRUE(ParticleEnsemble().empty());
}

TEST(Model, LossD2Examples) {
  EXPECT_EQ(loss_d2(kSquared, 0.3, 0.3), 0.0);
  EXPECT_EQ(loss_d2(kSquared, 1.0, 0.25), -0.75);
  EXPECT_DOUBLE_EQ(loss_d2(kLogistic, 1.0, 0.0), -0.5);
  EXPECT_THROW(loss_d2(kSquared, std::nan(""), 0.0), InvalidArgument);
}

TEST(Model, LossD2MatchesDifference) {
  Rng rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  for (const Loss& loss : {kSquared, kLogistic})
    for (int k = 0; k < 50; ++k) {
      const double y = k % 2 ? 1.0 : -1.0, yh = u(rng), h = 1e-6;
      const double fdv = (loss.value(y, yh + h) - loss.value(y, yh - h)) / (2 * h);
      EXPECT_NEAR(loss.d2(y, yh), fdv, 1e-8);
    }
}

TEST(Model, GradFExamples) {
  Mat ens_m(2, 3);
  ens_m << 0.2, -0.4, 0.9, 0.5, 0.1, -0.3;
  const ParticleEnsemble ens(ens_m);
  const Vec x = v2(0.8, -1.1);
  const Sample exact{x, predict(ens, kErf, x)};
  EXPECT_LT(grad_F(kErf, kSquared, v2(0.3, 0.3), ens, exact).norm(), 1e-15);

  const Sample z{v2(1, 0), 1.0};
  const Vec F = grad_F(kErf, kSquared, Vec::Zero(2), 0.0, z);
  EXPECT_LT((F - v2(1.1283791670955126, 0.0)).norm(), 1e-15);
}

// With yhat held fixed, F is minus the theta-gradient of l(y, yhat) through
// the per-particle channel: d/dtheta l(y, yhat + sigma(x, theta) / n) * n.
TEST(Model, GradFMatchesLossDifference) {
  Rng rng(9);
  for (const Loss& loss : {kSquared, kLogistic})
    for (const Activation& act : {kErf, kTanh})
      for (int k = 0; k < 20; ++k) {
        const Vec t = random_vec(rng, 3, 0.8);
        const Sample z{random_vec(rng, 3, 1.0), k % 2 ? 1.0 : -1.0};
        const double yhat = 0.37;
        const double n = 1e3;
        auto per_sample = [&](const Vec& th) {
          return n * loss.value(z.y, yhat + (sigma(act, z.x, th) - sigma(act, z.x, t)) / n);
        };
        const Vec g = fd::gradient(per_sample, t, 1e-6);
        EXPECT_LT((grad_F(act, loss, t, yhat, z) + g).norm(), 1e-6);
      }
}

TEST(Model, BoundednessProperty) {
  Rng rng(1);
  for (const Activation& act : {kErf, kTanh})
    for (int k = 0; k < 200; ++k) {
      const Vec t = random_vec(rng, 4, 5.0), x = random_vec(rng, 4, 5.0);
      EXPECT_LE(std::abs(sigma(act, x, t)), 1.0);
    }
}

TEST(Model, GradientCheckProperty) {
  Rng rng(2);
  for (const Activation& act : {kErf, kTanh})
    for (int k = 0; k < 100; ++k) {
      const Vec t = random_vec(rng, 3, 0.7), x = random_vec(rng, 3, 1.0);
      const Vec g = fd::gradient([&](const Vec& th) { return sigma(act, x, th); }, t, 1e-6);
      EXPECT_LE(fd::rel_err(grad_sigma(act, x, t), g), 1e-5);

      const Sample z{x, k % 2 ? 1.0 : -1.0};
      const double yhat = 0.1;
      auto l = [&](const Vec& th) {
        return Loss{}.value(z.y, yhat + sigma(act, x, th) - sigma(act, x, t));
      };
      const Vec gl = fd::gradient(l, t, 1e-6);
      EXPECT_LE(fd::rel_err(-grad_F(act, Loss{}, t, yhat, z), gl), 1e-5);
    }
}

TEST(Model, ConvexityProbe) {
  Rng rng(3);
  std::uniform_real_distribution<double> u(-4, 4);
  for (const Loss& loss : {kSquared, kLogistic})
    for (int k = 0; k < 200; ++k) {
      const double y = k % 2 ? 1.0 : -1.0, a = u(rng), b = u(rng);
      EXPECT_LE(loss.value(y, 0.5 * (a + b)),
                0.5 * (loss.value(y, a) + loss.value(y, b)) + 1e-15);
    }
}

TEST(Model, PredictPermutationInvariant) {
  Rng rng(4);
  Mat m(2, 7);
  for (auto& e : m.reshaped()) e = std::normal_distribution<double>(0, 1)(rng);
  Mat perm = m;
  std::vector<int> order{6, 2, 4, 0, 1, 5, 3};
  for (int j = 0; j < 7; ++j) perm.col(j) = m.col(order[j]);
  const Vec x = v2(0.7, -0.2);
  EXPECT_NEAR(predict(ParticleEnsemble(m), kErf, x),
              predict(ParticleEnsemble(perm), kErf, x), 1e-15);
}
