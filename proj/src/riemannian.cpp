#include "mfsmd/riemannian.hpp"

#include "mfsmd/errors.hpp"

namespace mfsmd {

namespace {

Vec central_gradient(const ScalarField& f, const Vec& theta, double h) {
  Vec g(theta.size());
  Vec x = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    x[i] = theta[i] + h;
    const double fp = f(x);
    x[i] = theta[i] - h;
    const double fm = f(x);
    x[i] = theta[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// div(field) by central differences.
double flat_divergence(const VectorField& field, const Vec& theta, double h) {
  double div = 0.0;
  Vec x = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    x[i] = theta[i] + h;
    const double jp = field(x)[i];
    x[i] = theta[i] - h;
    const double jm = field(x)[i];
    x[i] = theta[i];
    div += (jp - jm) / (2.0 * h);
  }
  return div;
}

}  // namespace

Vec grad_g(const MetricField& metric, const VectorField& f_grad,
           const Vec& theta) {
  return metric.potential().hessian_inv_apply(theta, f_grad(theta));
}

double volume_element(const MetricField& metric, const Vec& theta) {
  return metric.potential().sqrt_det_hessian(theta);
}

double div_g(const MetricField& metric, const VectorField& field,
             const Vec& theta, double h) {
  const VectorField weighted = [&](const Vec& x) -> Vec {
    return volume_element(metric, x) * field(x);
  };
  return flat_divergence(weighted, theta, h) / volume_element(metric, theta);
}

double riemannian_form_residual(const MetricField& metric,
                                const ScalarField& density,
                                const ScalarField& first_variation,
                                const VectorField& velocity, const Vec& theta,
                                double h) {
  if (!(density(theta) > 0.0))
    throw InvalidArgument("riemannian_form_residual: density must be positive");
  const MirrorPotential& pot = metric.potential();

  const VectorField flux_riem = [&](const Vec& x) -> Vec {
    const VectorField dphi = [&](const Vec& y) -> Vec {
      return central_gradient(first_variation, y, h);
    };
    return density(x) * grad_g(metric, dphi, x);
  };
  const double riemannian = div_g(metric, flux_riem, theta, h);

  const VectorField flux_primal = [&](const Vec& x) -> Vec {
    const double rho = density(x) * pot.sqrt_det_hessian(x);
    return rho * pot.hessian_inv_apply(x, velocity(x));
  };
  const double primal =
      -flat_divergence(flux_primal, theta, h) / pot.sqrt_det_hessian(theta);

  return riemannian - primal;
}

double riemannian_form_residual(const MetricField& metric,
                                const ScalarField& density,
                                const ParticleEnsemble& ens,
                                const VelocityEvaluator& vel, const Vec& theta,
                                double h) {
  const double inv_n = 1.0 / static_cast<double>(ens.size());
  const ScalarField phi = [&](const Vec& x) {
    double u = 0.0;
    for (Eigen::Index j = 0; j < ens.size(); ++j) u += vel.big_u(x, ens.particle(j));
    return vel.big_v(x) + inv_n * u;
  };
  const VectorField v = [&](const Vec& x) -> Vec { return vel.v_closed(x, ens); };
  return riemannian_form_residual(metric, density, phi, v, theta, h);
}

}  // namespace mfsmd
