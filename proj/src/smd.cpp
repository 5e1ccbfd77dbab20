#include "mfsmd/smd.hpp"

#include <cmath>

#include "mfsmd/errors.hpp"
#include "mfsmd/parallel.hpp"

namespace mfsmd {

InitialDistribution InitialDistribution::gaussian(Eigen::Index dim,
                                                  double std) {
  if (!(std >= 0.0)) throw InvalidArgument("initial distribution: std < 0");
  return {Vec::Zero(dim), std};
}

InitialDistribution InitialDistribution::point_mass(Vec theta) {
  return {std::move(theta), 0.0};
}

ParticleEnsemble InitialDistribution::sample(std::size_t n, Rng& rng) const {
  if (n == 0) throw InvalidArgument("initial distribution: n must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat thetas(mean.size(), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < thetas.cols(); ++i)
    for (Eigen::Index r = 0; r < thetas.rows(); ++r)
      thetas(r, i) = std > 0.0 ? mean[r] + std * normal(rng) : mean[r];
  return ParticleEnsemble(std::move(thetas));
}

void TrainConfig::validate() const {
  if (n < 1) throw InvalidArgument("train: n must be >= 1");
  if (!(tau > 0.0)) throw InvalidArgument("train: tau must be > 0");
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw InvalidArgument("train: delta must be >= 0");
  if (stride < 1) throw InvalidArgument("train: stride must be >= 1");
}

std::size_t TrainConfig::steps() const {
  return static_cast<std::size_t>(std::llround(delta * static_cast<double>(n)));
}

SmdState init(const ParticleEnsemble& theta0, const MirrorPotential& pot,
              double tau) {
  if (theta0.empty()) throw InvalidArgument("init: empty ensemble");
  if (!(tau > 0.0)) throw InvalidArgument("init: tau must be > 0");
  SmdState s;
  s.thetas = theta0.thetas();
  s.omegas.resize(s.thetas.rows(), s.thetas.cols());
  for (Eigen::Index i = 0; i < s.thetas.cols(); ++i)
    s.omegas.col(i) = pot.grad(s.thetas.col(i));
  s.tau = tau;
  return s;
}

SmdState init(const InitialDistribution& rho0, std::size_t n,
              const MirrorPotential& pot, double tau, Rng& rng) {
  return init(rho0.sample(n, rng), pot, tau);
}

SmdState step(const SmdState& state, const MirrorPotential& pot,
              const Activation& act, const Loss& loss, const Sample& z) {
  const ParticleEnsemble ens(state.thetas);
  const double yhat = predict(ens, act, z.x);
  const double scale = state.tau / static_cast<double>(state.n());

  SmdState next = state;
  parallel_for(state.n(), [&](std::size_t begin, std::size_t end) {
    Vec theta(state.thetas.rows());
    for (std::size_t i = begin; i < end; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      theta = state.thetas.col(ii);
      next.omegas.col(ii) += scale * grad_F(act, loss, theta, yhat, z);
      next.thetas.col(ii) = pot.grad_inv(next.omegas.col(ii));
    }
  });
  ++next.k;
  return next;
}

FlowTrajectory run(SmdState state, const TrainConfig& config,
                   const LabeledGaussianMixture& data,
                   const MirrorPotential& pot, const Activation& act,
                   const Loss& loss, const ObservableBattery& battery) {
  config.validate();
  if (state.n() != config.n)
    throw InvalidArgument("run: state size does not match train.n");
  Rng stream(derive_seed(config.seed, 1));
  const std::size_t steps = config.steps();
  const double dt = config.time_step();

  FlowTrajectory traj;
  traj.observable_ids = battery.ids();
  ParticleEnsemble ens = state.ensemble();
  traj.record_observables(0.0, battery.evaluate(ens));
  traj.record_snapshot(0.0, ens);
  for (std::size_t k = 1; k <= steps; ++k) {
    const Sample z = data.sample_one(stream);
    state = step(state, pot, act, loss, z);
    ens = state.ensemble();
    const double t = static_cast<double>(k) * dt;
    traj.record_observables(t, battery.evaluate(ens));
    if (k % config.stride == 0) traj.record_snapshot(t, ens);
  }
  return traj;
}

double expected_drift(const SmdState& state, const Activation& act,
                      const Loss& loss, const LabeledGaussianMixture& data,
                      const TestFunction& f, std::size_t mc_batch, Rng& rng) {
  if (mc_batch == 0) throw InvalidArgument("expected_drift: mc_batch >= 1");
  const ParticleEnsemble ens(state.thetas);
  const auto n = static_cast<Eigen::Index>(state.n());
  Mat grads(state.omegas.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) grads.col(i) = f.grad(state.omegas.col(i));

  double acc = 0.0;
  Vec theta(state.thetas.rows());
  for (std::size_t b = 0; b < mc_batch; ++b) {
    const Sample z = data.sample_one(rng);
    const double coef = -loss.d2(z.y, predict(ens, act, z.x));
    double inner = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      theta = state.thetas.col(i);
      inner += act.dphi(theta.dot(z.x)) * grads.col(i).dot(z.x);
    }
    acc += coef * inner;
  }
  const double nn = static_cast<double>(n);
  return state.tau / (nn * nn) * acc / static_cast<double>(mc_batch);
}

IncrementDecomposition increment_decomposition(
    const SmdState& state, const MirrorPotential& pot, const Activation& act,
    const Loss& loss, const TestFunction& f, double drift, const Sample& z) {
  const ParticleEnsemble ens(state.thetas);
  const double yhat = predict(ens, act, z.x);
  const auto n = static_cast<Eigen::Index>(state.n());
  const double nn = static_cast<double>(n);

  double first = 0.0;
  Vec theta(state.thetas.rows());
  Vec omega(state.omegas.rows());
  for (Eigen::Index i = 0; i < n; ++i) {
    theta = state.thetas.col(i);
    omega = state.omegas.col(i);
    first += f.grad(omega).dot(grad_F(act, loss, theta, yhat, z));
  }
  first *= state.tau / (nn * nn);

  const SmdState next = step(state, pot, act, loss, z);
  double realized = 0.0;
  Vec omega_next(state.omegas.rows());
  for (Eigen::Index i = 0; i < n; ++i) {
    omega = state.omegas.col(i);
    omega_next = next.omegas.col(i);
    realized += f.value(omega_next) - f.value(omega);
  }
  realized /= nn;

  IncrementDecomposition out;
  out.drift = drift;
  out.martingale = first - drift;
  out.remainder = realized - first;
  out.realized = realized;
  return out;
}

IncrementDecomposition increment_decomposition(
    const SmdState& state, const MirrorPotential& pot, const Activation& act,
    const Loss& loss, const LabeledGaussianMixture& data,
    const TestFunction& f, std::size_t mc_batch, Rng& rng) {
  const Sample z = data.sample_one(rng);
  const double drift = expected_drift(state, act, loss, data, f, mc_batch, rng);
  return increment_decomposition(state, pot, act, loss, f, drift, z);
}

}  // namespace mfsmd
