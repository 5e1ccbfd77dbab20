#pragma once

#include "mfsmd/types.hpp"

namespace mfsmd {

enum class ActivationKind { Erf, Tanh };
enum class LossKind { Squared, Logistic };

/// Inner-product unit sigma(x, theta) = phi(theta^T x) with bounded phi.
struct Activation {
  ActivationKind kind = ActivationKind::Erf;

  double phi(double u) const;
  double dphi(double u) const;
};

/// Convex loss l(y, yhat); only the second-argument derivative drives training.
struct Loss {
  LossKind kind = LossKind::Squared;

  double value(double y, double yhat) const;
  /// d l / d yhat.
  double d2(double y, double yhat) const;
};

struct Sample {
  Vec x;
  double y = 0.0;
};

/// n parameter vectors with uniform weights, stored column-wise (d x n).
class ParticleEnsemble {
 public:
  ParticleEnsemble() = default;
  explicit ParticleEnsemble(Mat thetas);

  Eigen::Index size() const { return thetas_.cols(); }
  Eigen::Index dim() const { return thetas_.rows(); }
  bool empty() const { return thetas_.cols() == 0; }

  auto particle(Eigen::Index i) const { return thetas_.col(i); }
  const Mat& thetas() const { return thetas_; }

 private:
  Mat thetas_;
};

double sigma(const Activation& act, const Vec& x, const Vec& theta);
Vec grad_sigma(const Activation& act, const Vec& x, const Vec& theta);

/// Ensemble average h_n(x) = (1/n) sum_i sigma(x, theta_i).
double predict(const ParticleEnsemble& ens, const Activation& act,
               const Vec& x);

double loss_d2(const Loss& loss, double y, double yhat);

/// F(theta, rho, z) = -d2 l(y, yhat) grad_theta sigma(x, theta). This is the
/// negative loss gradient, so mirror updates add (tau / n) F.
Vec grad_F(const Activation& act, const Loss& loss, const Vec& theta,
           double yhat, const Sample& z);
Vec grad_F(const Activation& act, const Loss& loss, const Vec& theta,
           const ParticleEnsemble& ens, const Sample& z);

}  // namespace mfsmd
