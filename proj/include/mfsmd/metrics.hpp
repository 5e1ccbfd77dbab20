#pragma once

#include <cstdint>
#include <vector>

#include "mfsmd/data.hpp"
#include "mfsmd/model.hpp"
#include "mfsmd/observables.hpp"
#include "mfsmd/velocity.hpp"

namespace mfsmd {

struct RiskEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo expected risk E[l(y, h(x; rho_hat))] over B fresh samples.
RiskEstimate risk_mc(const ParticleEnsemble& ens, const Activation& act,
                     const Loss& loss, const LabeledGaussianMixture& data,
                     std::size_t batch, std::uint64_t seed);

/// Squared-loss risk 1/2 E[y^2] + <rho, V> + 1/2 <rho x rho, U>.
double risk_closed(const ParticleEnsemble& ens, const VelocityEvaluator& vel);

/// risk_closed at every ensemble snapshot of traj.
std::vector<double> risk_curve(const FlowTrajectory& traj,
                               const VelocityEvaluator& vel);
/// Same expansion for atoms with arbitrary (possibly negative) weights.
double risk_closed_weighted(const Mat& thetas, const Vec& weights,
                            const VelocityEvaluator& vel);

/// Gradient in theta of the first variation dR/drho(theta, rho_hat), computed
/// from risk_closed alone: a symmetric mass perturbation at theta (exact for a
/// quadratic functional) followed by central differences with step h.
Vec first_variation_grad_fd(const ParticleEnsemble& ens, const Vec& theta,
                            const VelocityEvaluator& vel, double h = 1e-4);

/// max over battery members and the merged time grid of
/// |<rho_a(t), f> - <rho_b(t), f>|, both paths read as right-continuous steps.
double observable_distance(const FlowTrajectory& a, const FlowTrajectory& b);

/// Fraction of particles whose smallest |coordinate| is below threshold.
double sparsity_fraction(const ParticleEnsemble& ens, double threshold);

struct GridSpec {
  double x1_min = -2.0, x1_max = 2.0;
  double x2_min = -2.0, x2_max = 2.0;
  Eigen::Index nx = 101, ny = 101;
};

/// predict() on a rectangular grid of 2-d inputs; entry (row j, col i) is at
/// (x1_i, x2_j).
Mat decision_grid(const ParticleEnsemble& ens, const Activation& act,
                  const GridSpec& grid);

/// Number of maximal arcs of constant sign of predict() on the circle of the
/// given radius, sampled at `samples` angles. Three separating lines through
/// the origin give 6.
int angular_sign_sectors(const ParticleEnsemble& ens, const Activation& act,
                         double radius, int samples = 720);

}  // namespace mfsmd
