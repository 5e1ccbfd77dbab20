#include "mfsmd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mfsmd/errors.hpp"
#include "mfsmd/parallel.hpp"

namespace mfsmd {

RiskEstimate risk_mc(const ParticleEnsemble& ens, const Activation& act,
                     const Loss& loss, const LabeledGaussianMixture& data,
                     std::size_t batch, std::uint64_t seed) {
  if (batch < 2) throw InvalidArgument("risk_mc: batch must be >= 2");
  Rng rng(seed);
  const std::vector<Sample> samples = data.sample(rng, batch);
  std::vector<double> losses(batch);
  parallel_for(batch, [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b)
      losses[b] = loss.value(samples[b].y, predict(ens, act, samples[b].x));
  });
  double sum = 0.0, sum_sq = 0.0;
  for (double l : losses) {
    sum += l;
    sum_sq += l * l;
  }
  const double nb = static_cast<double>(batch);
  const double mean = sum / nb;
  const double var = std::max(0.0, (sum_sq / nb - mean * mean) * nb / (nb - 1.0));
  return {mean, std::sqrt(var / nb)};
}

double risk_closed_weighted(const Mat& thetas, const Vec& weights,
                            const VelocityEvaluator& vel) {
  if (thetas.cols() != weights.size() || thetas.cols() == 0)
    throw InvalidArgument("risk_closed: weights do not match atoms");
  double linear = 0.0;
  for (Eigen::Index i = 0; i < thetas.cols(); ++i)
    linear += weights[i] * vel.big_v(thetas.col(i));
  return 0.5 * vel.data().second_moment_y() + linear +
         0.5 * vel.u_double_sum(thetas, weights);
}

double risk_closed(const ParticleEnsemble& ens, const VelocityEvaluator& vel) {
  if (ens.empty()) throw InvalidArgument("risk_closed: empty ensemble");
  const Vec w = Vec::Constant(ens.size(), 1.0 / static_cast<double>(ens.size()));
  return risk_closed_weighted(ens.thetas(), w, vel);
}

std::vector<double> risk_curve(const FlowTrajectory& traj,
                               const VelocityEvaluator& vel) {
  std::vector<double> out;
  out.reserve(traj.snapshots.size());
  for (const auto& s : traj.snapshots) out.push_back(risk_closed(s.ensemble, vel));
  return out;
}

Vec first_variation_grad_fd(const ParticleEnsemble& ens, const Vec& theta,
                            const VelocityEvaluator& vel, double h) {
  const Eigen::Index n = ens.size();
  Mat atoms(ens.dim(), n + 1);
  atoms.leftCols(n) = ens.thetas();
  Vec weights(n + 1);
  weights.head(n).setConstant(1.0 / static_cast<double>(n));

  // R(rho + eps delta_x) is quadratic in eps, so the eps-central difference
  // returns dR/drho(x) exactly.
  auto first_variation = [&](const Vec& x) {
    atoms.col(n) = x;
    weights[n] = 1.0;
    const double plus = risk_closed_weighted(atoms, weights, vel);
    weights[n] = -1.0;
    const double minus = risk_closed_weighted(atoms, weights, vel);
    return 0.5 * (plus - minus);
  };

  Vec g(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Vec xp = theta, xm = theta;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (first_variation(xp) - first_variation(xm)) / (2.0 * h);
  }
  return g;
}

double observable_distance(const FlowTrajectory& a, const FlowTrajectory& b) {
  if (a.observable_ids != b.observable_ids)
    throw InvalidArgument("observable_distance: trajectories use different batteries");
  if (a.times.empty() || b.times.empty())
    throw InvalidArgument("observable_distance: empty trajectory");
  const double horizon = std::min(a.end_time(), b.end_time());
  std::vector<double> grid;
  for (double t : a.times)
    if (t <= horizon) grid.push_back(t);
  for (double t : b.times)
    if (t <= horizon) grid.push_back(t);
  std::sort(grid.begin(), grid.end());
  double dist = 0.0;
  for (double t : grid) {
    const double gap = (a.observables_at(t) - b.observables_at(t)).cwiseAbs().maxCoeff();
    dist = std::max(dist, gap);
  }
  return dist;
}

double sparsity_fraction(const ParticleEnsemble& ens, double threshold) {
  if (ens.empty()) throw InvalidArgument("sparsity_fraction: empty ensemble");
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < ens.size(); ++i)
    if (ens.particle(i).cwiseAbs().minCoeff() < threshold) ++count;
  return static_cast<double>(count) / static_cast<double>(ens.size());
}

Mat decision_grid(const ParticleEnsemble& ens, const Activation& act,
                  const GridSpec& grid) {
  if (ens.dim() != 2) throw InvalidArgument("decision_grid: needs 2-d inputs");
  if (grid.nx < 2 || grid.ny < 2)
    throw InvalidArgument("decision_grid: need at least 2 points per axis");
  Mat out(grid.ny, grid.nx);
  parallel_for(static_cast<std::size_t>(grid.ny),
               [&](std::size_t begin, std::size_t end) {
                 Vec x(2);
                 for (std::size_t jj = begin; jj < end; ++jj) {
                   const auto j = static_cast<Eigen::Index>(jj);
                   x[1] = grid.x2_min + (grid.x2_max - grid.x2_min) *
                                            static_cast<double>(j) /
                                            static_cast<double>(grid.ny - 1);
                   for (Eigen::Index i = 0; i < grid.nx; ++i) {
                     x[0] = grid.x1_min + (grid.x1_max - grid.x1_min) *
                                              static_cast<double>(i) /
                                              static_cast<double>(grid.nx - 1);
                     out(j, i) = predict(ens, act, x);
                   }
                 }
               });
  return out;
}

int angular_sign_sectors(const ParticleEnsemble& ens, const Activation& act,
                         double radius, int samples) {
  if (ens.dim() != 2) throw InvalidArgument("angular_sign_sectors: needs d = 2");
  std::vector<int> signs;
  Vec x(2);
  for (int k = 0; k < samples; ++k) {
    const double a = 2.0 * std::numbers::pi * k / samples;
    x << radius * std::cos(a), radius * std::sin(a);
    const double h = predict(ens, act, x);
    if (h != 0.0) signs.push_back(h > 0.0 ? 1 : -1);
  }
  if (signs.empty()) return 0;
  int changes = 0;
  for (std::size_t k = 0; k < signs.size(); ++k)
    if (signs[k] != signs[(k + 1) % signs.size()]) ++changes;
  return changes == 0 ? 1 : changes;
}

}  // namespace mfsmd
