#include "mfsmd/model.hpp"

#include <cmath>
#include <numbers>

#include "mfsmd/errors.hpp"

namespace mfsmd {

namespace {

constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;

void check_dims(const Vec& x, const Vec& theta) {
  if (x.size() != theta.size())
    throw InvalidArgument("sigma: dim(x) != dim(theta)");
}

}  // namespace

double Activation::phi(double u) const {
  return kind == ActivationKind::Erf ? std::erf(u) : std::tanh(u);
}

double Activation::dphi(double u) const {
  if (kind == ActivationKind::Erf) return kTwoOverSqrtPi * std::exp(-u * u);
  const double t = std::tanh(u);
  return 1.0 - t * t;
}

double Loss::value(double y, double yhat) const {
  if (kind == LossKind::Squared) return 0.5 * (y - yhat) * (y - yhat);
  // log(1 + exp(-y yhat)), stable for large margins
  const double m = -y * yhat;
  return m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
}

double Loss::d2(double y, double yhat) const {
  if (!std::isfinite(y) || !std::isfinite(yhat))
    throw InvalidArgument("loss_d2: non-finite input");
  if (kind == LossKind::Squared) return yhat - y;
  return -y / (1.0 + std::exp(y * yhat));
}

ParticleEnsemble::ParticleEnsemble(Mat thetas) : thetas_(std::move(thetas)) {
  if (thetas_.cols() == 0 || thetas_.rows() == 0)
    throw InvalidArgument("ParticleEnsemble: need n >= 1 particles of d >= 1");
  if (!thetas_.allFinite())
    throw InvalidArgument("ParticleEnsemble: non-finite particle");
}

double sigma(const Activation& act, const Vec& x, const Vec& theta) {
  check_dims(x, theta);
  return act.phi(theta.dot(x));
}

Vec grad_sigma(const Activation& act, const Vec& x, const Vec& theta) {
  check_dims(x, theta);
  return act.dphi(theta.dot(x)) * x;
}

double predict(const ParticleEnsemble& ens, const Activation& act,
               const Vec& x) {
  if (ens.empty()) throw InvalidArgument("predict: empty ensemble");
  if (ens.dim() != x.size())
    throw InvalidArgument("predict: dim(x) != particle dimension");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < ens.size(); ++i)
    sum += act.phi(ens.particle(i).dot(x));
  return sum / static_cast<double>(ens.size());
}

double loss_d2(const Loss& loss, double y, double yhat) {
  return loss.d2(y, yhat);
}

Vec grad_F(const Activation& act, const Loss& loss, const Vec& theta,
           double yhat, const Sample& z) {
  check_dims(z.x, theta);
  return -loss.d2(z.y, yhat) * act.dphi(theta.dot(z.x)) * z.x;
}

Vec grad_F(const Activation& act, const Loss& loss, const Vec& theta,
           const ParticleEnsemble& ens, const Sample& z) {
  return grad_F(act, loss, theta, predict(ens, act, z.x), z);
}

}  // namespace mfsmd
