#pragma once

#include <cstdint>
#include <vector>

#include "mfsmd/observables.hpp"
#include "mfsmd/potentials.hpp"
#include "mfsmd/smd.hpp"
#include "mfsmd/velocity.hpp"

namespace mfsmd {

enum class FlowDomain { Dual, Primal };

struct FlowConfig {
  std::size_t m = 1000;  // particles
  double dt = 0.01;
  double t_end = 4.0;
  FlowDomain domain = FlowDomain::Dual;
  std::size_t stride = 1;  // ensemble snapshot every stride steps
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t steps() const;
};

/// Forward-Euler step of the characteristics of
///   d/dt rho = -div(rho H^{-1} v(theta, rho)).
/// Dual: omega += dt v, theta = grad_inv(omega). Primal: theta += dt H^{-1} v.
/// Every particle sees the velocity of the pre-step ensemble.
ParticleEnsemble flow_step(const ParticleEnsemble& ens,
                           const MirrorPotential& pot, VelocityEvaluator& vel,
                           double dt, FlowDomain domain);

/// Integrates from the given initial particles to config.t_end, recording the
/// battery at every step.
FlowTrajectory solve(const ParticleEnsemble& initial, const FlowConfig& config,
                     const MirrorPotential& pot, VelocityEvaluator& vel,
                     const ObservableBattery& battery);
/// Draws config.m initial particles i.i.d. from rho0.
FlowTrajectory solve(const InitialDistribution& rho0, const FlowConfig& config,
                     const MirrorPotential& pot, VelocityEvaluator& vel,
                     const ObservableBattery& battery);

/// Weak-form defect at each interior snapshot:
///   (<rho_{k+1}, f> - <rho_{k-1}, f>) / (t_{k+1} - t_{k-1})
///     - <rho_k, grad f^T H^{-1} v(., rho_k)>.
std::vector<double> weak_residual(const FlowTrajectory& traj,
                                  const MirrorPotential& pot,
                                  VelocityEvaluator& vel,
                                  const TestFunction& f);

/// Same residual for every member of the battery; row k of the result holds
/// interior snapshot k + 1, one column per function.
Mat weak_residual(const FlowTrajectory& traj, const MirrorPotential& pot,
                  VelocityEvaluator& vel, const ObservableBattery& battery);

}  // namespace mfsmd
