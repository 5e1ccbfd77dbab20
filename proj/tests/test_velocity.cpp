#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fd.hpp"
#include "mfsmd/errors.hpp"
#include "mfsmd/metrics.hpp"
#include "mfsmd/smd.hpp"
#include "mfsmd/velocity.hpp"
#include "oracles.hpp"

using namespace mfsmd;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

const Activation kErf{};
const Loss kSquared{};

ParticleEnsemble draw(std::size_t n, double std, std::uint64_t seed) {
  Rng rng(seed);
  return InitialDistribution::gaussian(2, std).sample(n, rng);
}

std::vector<Vec> thetas(std::size_t count, double std, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, std);
  std::vector<Vec> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(v2(g(rng), g(rng)));
  return out;
}

class Velocity : public ::testing::Test {
 protected:
  LabeledGaussianMixture data = paper_dataset(1.0);
  VelocityEvaluator closed = VelocityEvaluator::closed_form(paper_dataset(1.0));
};

}  // namespace

TEST_F(Velocity, ModeAndArgumentErrors) {
  auto mc = VelocityEvaluator::monte_carlo(kErf, kSquared, data, 100, 1);
  const auto ens = draw(5, 1.0, 1);
  EXPECT_THROW(mc.big_v(v2(0, 0)), InvalidState);
  EXPECT_THROW(mc.big_u(v2(0, 0), v2(1, 1)), InvalidState);
  EXPECT_THROW(mc.v_closed(v2(0, 0), ens), InvalidState);
  EXPECT_THROW(closed.v_mc(v2(0, 0), ens), InvalidState);
  EXPECT_THROW(VelocityEvaluator::closed_form(data, 7), InvalidArgument);
  EXPECT_THROW(VelocityEvaluator::monte_carlo(kErf, kSquared, data, 0, 1), InvalidArgument);
  EXPECT_THROW(closed.big_v(Vec::Zero(3)), InvalidArgument);
  EXPECT_THROW(closed.v_closed(v2(0, 0), ParticleEnsemble()), InvalidArgument);
}

TEST_F(Velocity, McZeroWhenFVanishes) {
  // Data collapsed onto x = 0 up to a negligible spread: F = -d2 phi' x = 0.
  const LabeledGaussianMixture flat({{1.0, v2(0, 0), 1e-300, 1.0}});
  auto mc = VelocityEvaluator::monte_carlo(kErf, kSquared, flat, 1000, 3);
  EXPECT_LT(mc.v_mc(v2(0.3, -0.2), draw(4, 1.0, 2)).norm(), 1e-250);
}

TEST_F(Velocity, McMatchesClosedAtReferencePoint) {
  auto mc = VelocityEvaluator::monte_carlo(kErf, kSquared, data, 100000, 11);
  const auto ens = draw(10, 0.4, 12);
  const McEstimate est = mc.v_mc_estimate(v2(0.5, 0.5), ens);
  const Vec ref = closed.v_closed(v2(0.5, 0.5), ens);
  EXPECT_TRUE(oracle::within_se(ref, {est.mean, est.std_error}, 4.0))
      << "mc " << est.mean.transpose() << " se " << est.std_error.transpose()
      << " closed " << ref.transpose();
}

TEST_F(Velocity, McStdScalesAsInverseRootBatch) {
  const auto ens = draw(6, 1.0, 4);
  const Vec t = v2(0.4, -0.6);
  auto spread = [&](std::size_t batch) {
    auto mc = VelocityEvaluator::monte_carlo(kErf, kSquared, data, batch, 77);
    const int reps = 400;
    double s = 0.0, s2 = 0.0;
    for (int r = 0; r < reps; ++r) {
      const double x = mc.v_mc(t, ens)[0];
      s += x;
      s2 += x * x;
    }
    return std::sqrt((s2 - s * s / reps) / (reps - 1));
  };
  const double ratio = spread(250) / spread(1000);
  EXPECT_NEAR(ratio, 2.0, 0.6);
}

TEST_F(Velocity, BigVExamples) {
  EXPECT_EQ(closed.big_v(v2(0, 0)), 0.0);
  EXPECT_LT(closed.big_v_grad(v2(0, 0)).norm(), 1e-15);
  const Vec t = v2(0.4, -0.2);
  const Vec g = fd::gradient([&](const Vec& x) { return closed.big_v(x); }, t, 1e-5);
  EXPECT_LT((closed.big_v_grad(t) - g).norm(), 1e-6);

  std::vector<MixtureComponent> flipped = data.components();
  for (auto& c : flipped) c.label = -c.label;
  const auto flip = VelocityEvaluator::closed_form(LabeledGaussianMixture(flipped));
  for (const Vec& th : thetas(10, 1.0, 3)) {
    EXPECT_NEAR(closed.big_v(-th), flip.big_v(th), 1e-15);
    EXPECT_NEAR(closed.big_v(-th), -closed.big_v(th), 1e-15);
  }
}

TEST_F(Velocity, BigVSmoothingIdentityMc) {
  const MixtureComponent c{1.0, v2(0.8, -0.3), 0.4, 1.0};
  const LabeledGaussianMixture single({c});
  const auto ev = VelocityEvaluator::closed_form(single);
  const Vec t = v2(1.1, 0.6);
  const double b = 1.0 + 2.0 * 0.16 * t.squaredNorm();
  EXPECT_NEAR(ev.big_v(t), -std::erf(t.dot(c.center) / std::sqrt(b)), 1e-15);
  const auto est = oracle::mc_mean(single, 1000000, 5, 1, [&](const Sample& z) {
    return oracle::scalar(-z.y * std::erf(t.dot(z.x)));
  });
  EXPECT_TRUE(oracle::within_se(oracle::scalar(ev.big_v(t)), est, 4.0));
}

TEST_F(Velocity, BigVGradMc) {
  const Vec t = v2(0.7, 1.2);
  const auto est = oracle::mc_mean(data, 100000, 8, 2, [&](const Sample& z) -> Vec {
    return -z.y * kErf.dphi(t.dot(z.x)) * z.x;
  });
  EXPECT_TRUE(oracle::within_se(closed.big_v_grad(t), est, 4.0));
}

TEST_F(Velocity, BigUExamples) {
  for (const Vec& t : thetas(10, 1.5, 4)) {
    EXPECT_EQ(closed.big_u(t, v2(0, 0)), 0.0);
    EXPECT_LT(closed.big_u_grad1(t, v2(0, 0)).norm(), 1e-15);
    const double uu = closed.big_u(t, t);
    EXPECT_GE(uu, 0.0);
    EXPECT_LE(uu, 1.0);
  }
  const Vec t = v2(1, 0), tp = v2(0.3, 0.7);
  const auto est = oracle::mc_mean(data, 1000000, 9, 1, [&](const Sample& z) {
    return oracle::scalar(std::erf(t.dot(z.x)) * std::erf(tp.dot(z.x)));
  });
  EXPECT_TRUE(oracle::within_se(oracle::scalar(closed.big_u(t, tp)), est, 4.0))
      << closed.big_u(t, tp) << " vs " << est.mean[0] << " +- " << est.se[0];
}

TEST_F(Velocity, BigUGrad1FiniteDifference) {
  const auto a = thetas(20, 1.0, 5), b = thetas(20, 1.0, 6);
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Vec g = fd::gradient([&](const Vec& x) { return closed.big_u(x, b[k]); }, a[k], 1e-5);
    EXPECT_LT((closed.big_u_grad1(a[k], b[k]) - g).norm(), 1e-6);
    // U(a, b) = U(b, a): the first-slot gradient at (a, b) is the second-slot
    // gradient of U(b, .) at a
    const Vec g2 = fd::gradient([&](const Vec& x) { return closed.big_u(b[k], x); }, a[k], 1e-5);
    EXPECT_LT((closed.big_u_grad1(a[k], b[k]) - g2).norm(), 1e-6);
    EXPECT_NEAR(closed.big_u(a[k], b[k]), closed.big_u(b[k], a[k]), 1e-14);
  }
}

TEST_F(Velocity, GradientConsistencyProperty) {
  const auto a = thetas(30, 1.2, 7), b = thetas(30, 1.2, 8);
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Vec gv = fd::gradient([&](const Vec& x) { return closed.big_v(x); }, a[k], 1e-5);
    EXPECT_LE(fd::rel_err(closed.big_v_grad(a[k]), gv), 1e-5);
    const Vec gu = fd::gradient([&](const Vec& x) { return closed.big_u(x, b[k]); }, a[k], 1e-5);
    EXPECT_LE(fd::rel_err(closed.big_u_grad1(a[k], b[k]), gu), 1e-5);
  }
}

TEST_F(Velocity, QuadratureConvergenceProperty) {
  const auto hi = VelocityEvaluator::closed_form(data, 64);
  const auto a = thetas(40, 1.5, 9), b = thetas(40, 1.5, 10);
  for (std::size_t k = 0; k < a.size(); ++k)
    EXPECT_LE(std::abs(closed.big_u(a[k], b[k]) - hi.big_u(a[k], b[k])), 1e-8);
  for (double scale : {3.0, 6.0})
    EXPECT_LE(std::abs(closed.big_u(scale * a[0], scale * b[0]) -
                       hi.big_u(scale * a[0], scale * b[0])),
              1e-8);
}

TEST_F(Velocity, VClosedExamples) {
  const auto zeros = ParticleEnsemble(Mat::Zero(2, 5));
  for (const Vec& t : thetas(5, 1.0, 11))
    EXPECT_LT((closed.v_closed(t, zeros) + closed.big_v_grad(t)).norm(), 1e-15);
}

TEST_F(Velocity, OracleEquivalenceProperty) {
  auto mc = VelocityEvaluator::monte_carlo(kErf, kSquared, data, 100000, 21);
  const auto ts = thetas(20, 1.0, 12);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const auto ens = draw(8, 1.0, 100 + k);
    const McEstimate est = mc.v_mc_estimate(ts[k], ens);
    EXPECT_TRUE(oracle::within_se(closed.v_closed(ts[k], ens), {est.mean, est.std_error}, 4.0))
        << "case " << k;
  }
}

TEST_F(Velocity, VariationalIdentity) {
  const auto ens = draw(12, 1.0, 13);
  for (const Vec& t : thetas(5, 1.0, 14)) {
    const Vec g = first_variation_grad_fd(ens, t, closed);
    EXPECT_LT((closed.v_closed(t, ens) + g).norm(), 1e-5);
  }
}

TEST_F(Velocity, FieldMatchesPointwise) {
  const auto ens = draw(37, 1.0, 15);
  const Mat f = closed.field(ens);
  for (Eigen::Index j = 0; j < ens.size(); ++j)
    EXPECT_LT((f.col(j) - closed.v_closed(ens.particle(j), ens)).norm(), 1e-12);
}

TEST_F(Velocity, McFieldSharesBatchAndIsSeeded) {
  const auto ens = draw(9, 1.0, 16);
  auto a = VelocityEvaluator::monte_carlo(kErf, kSquared, data, 500, 42);
  auto b = VelocityEvaluator::monte_carlo(kErf, kSquared, data, 500, 42);
  const Mat fa = a.field(ens);
  EXPECT_EQ(fa, b.field(ens));
  EXPECT_NE(fa, a.field(ens));
}
