#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "mfsmd/errors.hpp"
#include "mfsmd/smd.hpp"
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

TestFunction quadratic_probe() {
  return {"theta1*theta2", [](const Vec& w) { return w[0] * w[1]; },
          [](const Vec& w) { return v2(w[1], w[0]); }, false};
}

TestFunction bump_probe() {
  return {"exp(-|theta|^2)", [](const Vec& w) { return std::exp(-w.squaredNorm()); },
          [](const Vec& w) -> Vec { return -2.0 * std::exp(-w.squaredNorm()) * w; }, true};
}

}  // namespace

TEST(Smd, InitExamples) {
  const auto pot = MirrorPotential::pnorm(1.5);
  Rng rng(1);
  const auto s = init(InitialDistribution::point_mass(v2(0.3, -0.4)), 7, pot, 0.5, rng);
  for (Eigen::Index i = 0; i < 7; ++i) EXPECT_EQ(Vec(s.thetas.col(i)), v2(0.3, -0.4));
  EXPECT_EQ(s.k, 0u);
  EXPECT_EQ(Vec(s.omegas.col(0)), pot.grad(v2(0.3, -0.4)));

  const std::size_t n = 20000;
  Rng r2(2);
  const auto big = init(InitialDistribution::gaussian(2, 0.4), n, pot, 0.5, r2);
  const Vec mean = big.thetas.rowwise().mean();
  for (int i = 0; i < 2; ++i) EXPECT_LE(std::abs(mean[i]), 4.0 * 0.4 / std::sqrt(double(n)));

  Rng a(3), b(3);
  const auto sa = init(InitialDistribution::gaussian(2, 1.0), 50, pot, 0.5, a);
  const auto sb = init(InitialDistribution::gaussian(2, 1.0), 50, pot, 0.5, b);
  EXPECT_EQ(sa.thetas, sb.thetas);
  EXPECT_EQ(sa.omegas, sb.omegas);
}

TEST(Smd, ConfigValidation) {
  TrainConfig c;
  c.n = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = TrainConfig{};
  c.tau = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = TrainConfig{};
  c.delta = -1.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = TrainConfig{};
  c.stride = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = TrainConfig{};
  c.n = 200;
  c.delta = 2.0;
  c.tau = 0.5;
  EXPECT_EQ(c.steps(), 400u);
  EXPECT_DOUBLE_EQ(c.horizon(), 1.0);
}

TEST(Smd, StepEuclideanIsSgd) {
  const auto pot = MirrorPotential::euclidean();
  const Mat m = (Mat(2, 3) << 0.2, -0.7, 1.1, 0.5, 0.3, -0.9).finished();
  const auto s = init(ParticleEnsemble(m), pot, 0.5);
  const Sample z{v2(0.6, -0.4), 1.0};
  const auto next = step(s, pot, kErf, kSquared, z);
  const ParticleEnsemble ens(m);
  for (Eigen::Index i = 0; i < 3; ++i) {
    const Vec F = grad_F(kErf, kSquared, m.col(i), ens, z);
    EXPECT_EQ(Vec(next.thetas.col(i)), Vec(m.col(i) + (0.5 / 3.0) * F));
  }
  EXPECT_EQ(next.k, 1u);
}

TEST(Smd, StepZeroForceLeavesState) {
  const auto pot = MirrorPotential::pnorm(1.5);
  const Mat m = (Mat(2, 2) << 0.2, -0.7, 0.5, 0.3).finished();
  const auto s = init(ParticleEnsemble(m), pot, 0.5);
  const Vec x = v2(0.4, 0.9);
  const Sample z{x, predict(ParticleEnsemble(m), kErf, x)};
  const auto next = step(s, pot, kErf, kSquared, z);
  EXPECT_EQ(next.omegas, s.omegas);
  EXPECT_LT((next.thetas - s.thetas).norm(), 1e-9);
  EXPECT_EQ(next.k, 1u);
}

// n = 2, theta_1 = (1, 0), theta_2 = (0, 1), z = ((1, 1), +1), tau = 1:
//   u_1 = u_2 = 1, yhat = erf(1), F_i = (1 - erf(1)) (2/sqrt(pi)) e^{-1} (1, 1),
//   theta_i += F_i / 2.
TEST(Smd, StepHandComputed) {
  const auto pot = MirrorPotential::euclidean();
  const auto s = init(ParticleEnsemble(Mat::Identity(2, 2)), pot, 1.0);
  const auto next = step(s, pot, kErf, kSquared, {v2(1, 1), 1.0});
  const double erf1 = 0.8427007929497149;
  const double dphi1 = 1.1283791670955126 * 0.36787944117144233;
  const double inc = 0.5 * ((1.0 - erf1) * dphi1);
  EXPECT_NEAR(next.thetas(0, 0), 1.0 + inc, 1e-15);
  EXPECT_NEAR(next.thetas(1, 0), inc, 1e-15);
  EXPECT_NEAR(next.thetas(0, 1), inc, 1e-15);
  EXPECT_NEAR(next.thetas(1, 1), 1.0 + inc, 1e-15);
}

TEST(Smd, RunSnapshotsAndZeroHorizon) {
  const auto data = paper_dataset();
  const auto pot = MirrorPotential::pnorm(1.5);
  const auto battery = ObservableBattery::standard(2);
  Rng rng(4);
  const auto s0 = init(InitialDistribution::gaussian(2, 1.0), 20, pot, 0.5, rng);

  TrainConfig cfg;
  cfg.n = 20;
  cfg.delta = 0.0;
  auto traj = run(s0, cfg, data, pot, kErf, kSquared, battery);
  EXPECT_EQ(traj.snapshots.size(), 1u);
  EXPECT_EQ(traj.times.size(), 1u);

  cfg.delta = 2.35;  // K = 47
  cfg.stride = 5;
  traj = run(s0, cfg, data, pot, kErf, kSquared, battery);
  EXPECT_EQ(traj.snapshots.size(), 47u / 5u + 1u);
  EXPECT_EQ(traj.times.size(), 48u);
  EXPECT_DOUBLE_EQ(traj.snapshots[2].t, 10 * 0.5 / 20.0);
  EXPECT_DOUBLE_EQ(traj.end_time(), 47 * 0.5 / 20.0);

  cfg.n = 21;
  EXPECT_THROW(run(s0, cfg, data, pot, kErf, kSquared, battery), InvalidArgument);
}

TEST(Smd, EuclideanRunMatchesReferenceSgdBitwise) {
  const auto data = paper_dataset();
  const auto pot = MirrorPotential::euclidean();
  Rng rng(5);
  const auto s0 = init(InitialDistribution::gaussian(2, 1.0), 64, pot, 0.5, rng);
  TrainConfig cfg;
  cfg.n = 64;
  cfg.delta = 2.0;
  cfg.stride = 128;
  cfg.seed = 77;
  const auto traj = run(s0, cfg, data, pot, kErf, kSquared, ObservableBattery::standard(2));
  const Mat ref = oracle::reference_sgd(s0.thetas, data, 0.5, cfg.steps(), derive_seed(77, 1));
  const Mat& got = traj.snapshots.back().ensemble.thetas();
  EXPECT_EQ(std::memcmp(got.data(), ref.data(), sizeof(double) * ref.size()), 0);
}

TEST(Smd, CoherenceAndBoundedMotionProperty) {
  const auto data = paper_dataset();
  const auto pot = MirrorPotential::pnorm(1.5);
  Rng rng(6), stream(7);
  auto s = init(InitialDistribution::gaussian(2, 1.0), 30, pot, 0.5, rng);
  const double scale = 0.5 / 30.0;
  for (int k = 0; k < 200; ++k) {
    const Sample z = data.sample_one(stream);
    const auto next = step(s, pot, kErf, kSquared, z);
    // |d2| <= |y| + 1 for the squared loss, |phi'| <= 2/sqrt(pi)
    const double bound = scale * 2.0 * 1.1283791670955126 * z.x.norm();
    for (Eigen::Index i = 0; i < 30; ++i) {
      EXPECT_LE((next.omegas.col(i) - s.omegas.col(i)).norm(), bound * (1 + 1e-12));
      EXPECT_LE((next.thetas.col(i) - pot.grad_inv(next.omegas.col(i))).norm(), 1e-9);
      EXPECT_LE((pot.grad(next.thetas.col(i)) - next.omegas.col(i)).norm(), 1e-9);
    }
    s = next;
  }
}

TEST(Smd, ExchangeabilityProperty) {
  const auto data = paper_dataset();
  const auto pot = MirrorPotential::pnorm(1.5);
  Rng rng(8);
  const auto s0 = init(InitialDistribution::gaussian(2, 1.0), 6, pot, 0.5, rng);
  const std::vector<int> perm{3, 0, 5, 1, 4, 2};
  Mat permuted(2, 6);
  for (int j = 0; j < 6; ++j) permuted.col(j) = s0.thetas.col(perm[j]);
  auto a = s0;
  auto b = init(ParticleEnsemble(permuted), pot, 0.5);
  Rng sa(9), sb(9);
  for (int k = 0; k < 50; ++k) {
    a = step(a, pot, kErf, kSquared, data.sample_one(sa));
    b = step(b, pot, kErf, kSquared, data.sample_one(sb));
  }
  for (int j = 0; j < 6; ++j)
    EXPECT_LT((Vec(b.thetas.col(j)) - Vec(a.thetas.col(perm[j]))).norm(), 1e-12);
}

TEST(Smd, IncrementSumIdentity) {
  const auto data = paper_dataset();
  for (const auto& pot : {MirrorPotential::euclidean(), MirrorPotential::pnorm(1.5)}) {
    Rng rng(10);
    auto s = init(InitialDistribution::gaussian(2, 1.0), 40, pot, 0.5, rng);
    for (int k = 0; k < 20; ++k) {
      const auto d = increment_decomposition(s, pot, kErf, kSquared, data, bump_probe(), 64, rng);
      EXPECT_LT(std::abs(d.drift + d.martingale + d.remainder - d.realized), 1e-12);
      s = step(s, pot, kErf, kSquared, data.sample_one(rng));
    }
  }
}

TEST(Smd, MartingaleMeanZero) {
  const auto data = paper_dataset();
  const auto pot = MirrorPotential::pnorm(1.5);
  Rng rng(11);
  const auto s = init(InitialDistribution::gaussian(2, 1.0), 50, pot, 0.5, rng);
  const int draws = 1000;
  double sum = 0.0, sq = 0.0;
  for (int k = 0; k < draws; ++k) {
    const auto d = increment_decomposition(s, pot, kErf, kSquared, data, quadratic_probe(), 16, rng);
    sum += d.martingale;
    sq += d.martingale * d.martingale;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sq / draws - mean * mean) / (draws - 1));
  EXPECT_LE(std::abs(mean), 4.0 * se);
}

TEST(Smd, RemainderScalesInverseSquare) {
  const auto data = paper_dataset();
  const auto pot = MirrorPotential::pnorm(1.5);
  auto mean_abs_r = [&](std::size_t n) {
    Rng rng(12);
    const auto s = init(InitialDistribution::gaussian(2, 1.0), n, pot, 0.5, rng);
    double acc = 0.0;
    const int draws = 400;
    for (int k = 0; k < draws; ++k)
      acc += std::abs(increment_decomposition(s, pot, kErf, kSquared, bump_probe(), 0.0,
                                              data.sample_one(rng))
                          .remainder);
    return acc / draws;
  };
  const double ratio = mean_abs_r(50) / mean_abs_r(200);
  EXPECT_GE(ratio, 16.0 * 0.5);
  EXPECT_LE(ratio, 16.0 * 1.5);
}
