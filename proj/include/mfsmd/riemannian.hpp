#pragma once

#include <functional>

#include "mfsmd/model.hpp"
#include "mfsmd/potentials.hpp"
#include "mfsmd/types.hpp"
#include "mfsmd/velocity.hpp"

namespace mfsmd {

using ScalarField = std::function<double(const Vec&)>;
using VectorField = std::function<Vec(const Vec&)>;

/// Hessian metric g(theta) = H(theta) of a mirror potential.
class MetricField {
 public:
  explicit MetricField(MirrorPotential pot) : pot_(std::move(pot)) {}

  const MirrorPotential& potential() const { return pot_; }
  Mat tensor(const Vec& theta) const { return pot_.hessian(theta); }

 private:
  MirrorPotential pot_;
};

/// grad_g f = H^{-1} grad f.
Vec grad_g(const MetricField& metric, const VectorField& f_grad,
           const Vec& theta);

/// div_g J = (1 / sqrt det H) div(sqrt det H J), outer divergence by central
/// differences with step h.
double div_g(const MetricField& metric, const VectorField& field,
             const Vec& theta, double h = 1e-5);

/// sqrt(det H(theta)).
double volume_element(const MetricField& metric, const Vec& theta);

/// Difference between the right-hand side of the Riemannian form
///   dp/dt = div_g(p grad_g Phi)
/// and the primal continuity equation divided by the volume element,
///   -div(rho H^{-1} v) / sqrt det H,  rho = p sqrt det H,
/// at theta. Phi is the first variation whose negative gradient is v; the
/// Riemannian side differentiates Phi numerically and never sees v.
double riemannian_form_residual(const MetricField& metric,
                                const ScalarField& density,
                                const ScalarField& first_variation,
                                const VectorField& velocity, const Vec& theta,
                                double h = 1e-5);

/// Same check with Phi(x) = V(x) + <rho_hat, U(x, .)> and v = v_closed.
double riemannian_form_residual(const MetricField& metric,
                                const ScalarField& density,
                                const ParticleEnsemble& ens,
                                const VelocityEvaluator& vel, const Vec& theta,
                                double h = 1e-5);

}  // namespace mfsmd
