#pragma once

#include <cstdint>

#include "mfsmd/data.hpp"
#include "mfsmd/model.hpp"
#include "mfsmd/observables.hpp"
#include "mfsmd/potentials.hpp"
#include "mfsmd/types.hpp"

namespace mfsmd {

/// rho^0: isotropic Gaussian N(mean, std^2 I); std = 0 is a point mass.
struct InitialDistribution {
  Vec mean;
  double std = 0.0;

  static InitialDistribution gaussian(Eigen::Index dim, double std);
  static InitialDistribution point_mass(Vec theta);

  ParticleEnsemble sample(std::size_t n, Rng& rng) const;
};

struct TrainConfig {
  std::size_t n = 200;
  double tau = 0.5;
  double delta = 2.0;  // K / n
  std::size_t stride = 1;
  std::uint64_t seed = 1;

  void validate() const;
  /// K = round(delta * n).
  std::size_t steps() const;
  /// T = delta * tau.
  double horizon() const { return delta * tau; }
  double time_step() const { return tau / static_cast<double>(n); }
};

/// Dual iterates omega_i = grad psi(theta_i) with their cached primal images.
struct SmdState {
  Mat omegas;  // d x n
  Mat thetas;  // d x n, grad_inv(omegas)
  std::size_t k = 0;
  double tau = 0.5;

  std::size_t n() const { return static_cast<std::size_t>(thetas.cols()); }
  ParticleEnsemble ensemble() const { return ParticleEnsemble(thetas); }
};

SmdState init(const ParticleEnsemble& theta0, const MirrorPotential& pot,
              double tau);
SmdState init(const InitialDistribution& rho0, std::size_t n,
              const MirrorPotential& pot, double tau, Rng& rng);

/// One mirror step on sample z: omega_i += (tau / n) F(theta_i, rho^k, z) for
/// all i simultaneously, with the prediction taken on the pre-update ensemble.
SmdState step(const SmdState& state, const MirrorPotential& pot,
              const Activation& act, const Loss& loss, const Sample& z);

/// Runs K = round(delta n) steps on a fresh i.i.d. stream seeded from
/// config.seed. Observables are recorded at every step (t = k tau / n) and
/// ensembles every config.stride steps.
FlowTrajectory run(SmdState state, const TrainConfig& config,
                   const LabeledGaussianMixture& data,
                   const MirrorPotential& pot, const Activation& act,
                   const Loss& loss, const ObservableBattery& battery);

/// One-step split of <pi_hat^{k+1}, f> - <pi_hat^k, f> in the dual domain:
/// drift (expected first-order term), martingale (realized minus expected
/// first-order term) and remainder (everything beyond first order).
struct IncrementDecomposition {
  double drift = 0.0;
  double martingale = 0.0;
  double remainder = 0.0;
  double realized = 0.0;
};

/// (tau / n^2) sum_i grad f(omega_i)^T E_z[G(omega_i, pi_hat, z)] estimated
/// over mc_batch fresh draws.
double expected_drift(const SmdState& state, const Activation& act,
                      const Loss& loss, const LabeledGaussianMixture& data,
                      const TestFunction& f, std::size_t mc_batch, Rng& rng);

IncrementDecomposition increment_decomposition(
    const SmdState& state, const MirrorPotential& pot, const Activation& act,
    const Loss& loss, const TestFunction& f, double drift, const Sample& z);

/// Draws the realized sample and the drift batch from rng.
IncrementDecomposition increment_decomposition(
    const SmdState& state, const MirrorPotential& pot, const Activation& act,
    const Loss& loss, const LabeledGaussianMixture& data,
    const TestFunction& f, std::size_t mc_batch, Rng& rng);

}  // namespace mfsmd
