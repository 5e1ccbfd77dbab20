#include "mfsmd/velocity.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "mfsmd/errors.hpp"
#include "mfsmd/parallel.hpp"

namespace mfsmd {

namespace {

constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;

// Tilt of N(m, s^2 I) by exp(-(theta^T x)^2); see the class comment.
struct Tilt {
  double b;
  double amplitude;  // E[erf'(theta^T x)] = (2/sqrt(pi)) e^{-mu^2/b} / sqrt(b)
  Vec m_hat;
};

Tilt tilt(const MixtureComponent& c, const Vec& theta) {
  const double s2 = c.std * c.std;
  const double b = 1.0 + 2.0 * s2 * theta.squaredNorm();
  const double mu = theta.dot(c.center);
  return {b, kTwoOverSqrtPi * std::exp(-mu * mu / b) / std::sqrt(b),
          c.center - (2.0 * s2 * mu / b) * theta};
}

}  // namespace

VelocityEvaluator::VelocityEvaluator(VelocityMode mode, Activation act,
                                     Loss loss, LabeledGaussianMixture data,
                                     std::size_t batch, std::uint64_t seed,
                                     int gh_order)
    : mode_(mode),
      act_(act),
      loss_(loss),
      data_(std::move(data)),
      batch_(batch),
      rng_(seed),
      gh_order_(gh_order) {
  if (mode_ == VelocityMode::ClosedFormErfGMM) rule_ = gauss_hermite(gh_order_);
}

VelocityEvaluator VelocityEvaluator::monte_carlo(Activation act, Loss loss,
                                                 LabeledGaussianMixture data,
                                                 std::size_t batch_size,
                                                 std::uint64_t seed) {
  if (batch_size == 0)
    throw InvalidArgument("velocity: Monte Carlo batch size must be >= 1");
  return VelocityEvaluator(VelocityMode::MonteCarlo, act, loss, std::move(data),
                           batch_size, seed, kDefaultGhOrder);
}

VelocityEvaluator VelocityEvaluator::closed_form(LabeledGaussianMixture data,
                                                 int gh_order) {
  if (gh_order < kMinGhOrder)
    throw InvalidArgument("velocity: Gauss-Hermite order must be >= 8");
  return VelocityEvaluator(VelocityMode::ClosedFormErfGMM,
                           Activation{ActivationKind::Erf},
                           Loss{LossKind::Squared}, std::move(data), 0, 0,
                           gh_order);
}

void VelocityEvaluator::require(VelocityMode m, const char* op) const {
  if (mode_ != m)
    throw InvalidState(std::string(op) +
                       (m == VelocityMode::MonteCarlo
                            ? ": requires Monte Carlo mode"
                            : ": requires closed-form erf/GMM mode"));
}

void VelocityEvaluator::check_theta(const Vec& theta) const {
  if (theta.size() != data_.dim())
    throw InvalidArgument("velocity: theta dimension does not match data");
}

McEstimate VelocityEvaluator::v_mc_estimate(const Vec& theta,
                                            const ParticleEnsemble& ens) {
  require(VelocityMode::MonteCarlo, "v_mc");
  check_theta(theta);
  const Eigen::Index d = theta.size();
  Vec sum = Vec::Zero(d);
  Vec sum_sq = Vec::Zero(d);
  for (std::size_t b = 0; b < batch_; ++b) {
    const Sample z = data_.sample_one(rng_);
    const Vec f = grad_F(act_, loss_, theta, ens, z);
    sum += f;
    sum_sq += f.cwiseProduct(f);
  }
  const double nb = static_cast<double>(batch_);
  McEstimate est;
  est.mean = sum / nb;
  const Vec var =
      ((sum_sq / nb - est.mean.cwiseProduct(est.mean)) * nb / std::max(1.0, nb - 1.0))
          .cwiseMax(0.0);
  est.std_error = (var / nb).cwiseSqrt();
  return est;
}

Vec VelocityEvaluator::v_mc(const Vec& theta, const ParticleEnsemble& ens) {
  return v_mc_estimate(theta, ens).mean;
}

double VelocityEvaluator::big_v(const Vec& theta) const {
  require(VelocityMode::ClosedFormErfGMM, "big_v");
  check_theta(theta);
  double v = 0.0;
  const double tt = theta.squaredNorm();
  for (const auto& c : data_.components()) {
    const double b = 1.0 + 2.0 * c.std * c.std * tt;
    v -= c.weight * c.label * std::erf(theta.dot(c.center) / std::sqrt(b));
  }
  return v;
}

Vec VelocityEvaluator::big_v_grad(const Vec& theta) const {
  require(VelocityMode::ClosedFormErfGMM, "big_v_grad");
  check_theta(theta);
  Vec g = Vec::Zero(theta.size());
  for (const auto& c : data_.components()) {
    const Tilt tl = tilt(c, theta);
    g -= c.weight * c.label * tl.amplitude * tl.m_hat;
  }
  return g;
}

// E[erf(u) erf(v)] for (u, v) = (theta^T x, theta'^T x), x ~ N(m, s^2 I).
// The variable with the smaller variance is integrated by Gauss-Hermite; the
// other one, conditionally Gaussian, is integrated exactly through
// E[erf(a + sigma Z)] = erf(a / sqrt(1 + 2 sigma^2)).
double VelocityEvaluator::component_u(const MixtureComponent& c,
                                      const Vec& theta,
                                      const Vec& theta_prime) const {
  const double s2 = c.std * c.std;
  double mu_u = theta.dot(c.center);
  double mu_v = theta_prime.dot(c.center);
  double suu = s2 * theta.squaredNorm();
  double svv = s2 * theta_prime.squaredNorm();
  const double suv = s2 * theta.dot(theta_prime);
  if (suu > svv) {
    std::swap(mu_u, mu_v);
    std::swap(suu, svv);
  }
  if (suu == 0.0)
    return std::erf(mu_u) * std::erf(mu_v / std::sqrt(1.0 + 2.0 * svv));
  const double su = std::sqrt(suu);
  const double slope = suv / su;
  const double cond_var = std::max(0.0, svv - slope * slope);
  const double rc = 1.0 / std::sqrt(1.0 + 2.0 * cond_var);
  double e = 0.0;
  for (std::size_t k = 0; k < rule_.nodes.size(); ++k) {
    const double z = rule_.nodes[k];
    e += rule_.weights[k] * std::erf(mu_u + su * z) *
         std::erf((mu_v + slope * z) * rc);
  }
  return e;
}

double VelocityEvaluator::big_u(const Vec& theta,
                                const Vec& theta_prime) const {
  require(VelocityMode::ClosedFormErfGMM, "big_u");
  check_theta(theta);
  check_theta(theta_prime);
  double u = 0.0;
  for (const auto& c : data_.components())
    u += c.weight * component_u(c, theta, theta_prime);
  return u;
}

Vec VelocityEvaluator::big_u_grad1(const Vec& theta,
                                   const Vec& theta_prime) const {
  require(VelocityMode::ClosedFormErfGMM, "big_u_grad1");
  check_theta(theta);
  check_theta(theta_prime);
  Vec g = Vec::Zero(theta.size());
  for (const auto& c : data_.components()) {
    const double s2 = c.std * c.std;
    const Tilt tl = tilt(c, theta);
    const double coef = 2.0 * s2 / tl.b;
    // Sigma_hat theta'
    const Vec sig = s2 * (theta_prime - coef * theta.dot(theta_prime) * theta);
    const double var = std::max(0.0, theta_prime.dot(sig));
    const double rc = 1.0 / std::sqrt(1.0 + 2.0 * var);
    const double z = theta_prime.dot(tl.m_hat) * rc;
    // E_tilt[x erf(theta'^T x)] = m_hat E[erf] + Sigma_hat theta' E[erf']
    g += c.weight * tl.amplitude *
         (std::erf(z) * tl.m_hat + kTwoOverSqrtPi * std::exp(-z * z) * rc * sig);
  }
  return g;
}

Vec VelocityEvaluator::v_closed(const Vec& theta,
                                const ParticleEnsemble& ens) const {
  require(VelocityMode::ClosedFormErfGMM, "v_closed");
  check_theta(theta);
  if (ens.empty()) throw InvalidArgument("v_closed: empty ensemble");
  Vec v = -big_v_grad(theta);
  Vec inter = Vec::Zero(theta.size());
  for (Eigen::Index j = 0; j < ens.size(); ++j)
    inter += big_u_grad1(theta, ens.particle(j));
  return v - inter / static_cast<double>(ens.size());
}

Vec VelocityEvaluator::evaluate(const Vec& theta, const ParticleEnsemble& ens) {
  return mode_ == VelocityMode::MonteCarlo ? v_mc(theta, ens)
                                           : v_closed(theta, ens);
}

Mat VelocityEvaluator::field_closed(const Mat& targets,
                                    const ParticleEnsemble& ens) const {
  require(VelocityMode::ClosedFormErfGMM, "field");
  if (ens.empty()) throw InvalidArgument("field: empty ensemble");
  if (targets.rows() != data_.dim() || ens.dim() != data_.dim())
    throw InvalidArgument("field: dimension does not match data");
  const Mat rows = ens.thetas().transpose();  // n x d, column r is row r
  std::vector<detail::KernelComponent> comps;
  comps.reserve(data_.components().size());
  for (const auto& c : data_.components())
    comps.push_back({c.label, c.weight, c.std * c.std, c.center.data()});
  Mat out(targets.rows(), targets.cols());
  detail::interaction_field(static_cast<int>(targets.rows()),
                            static_cast<std::size_t>(targets.cols()),
                            targets.data(), static_cast<std::size_t>(ens.size()),
                            rows.data(), comps.data(), comps.size(), out.data());
  return out;
}

Mat VelocityEvaluator::field(const ParticleEnsemble& ens) {
  if (mode_ == VelocityMode::ClosedFormErfGMM)
    return field_closed(ens.thetas(), ens);
  if (ens.empty()) throw InvalidArgument("field: empty ensemble");
  if (ens.dim() != data_.dim())
    throw InvalidArgument("field: dimension does not match data");

  const std::vector<Sample> batch = data_.sample(rng_, batch_);
  std::vector<double> coef(batch_);
  for (std::size_t b = 0; b < batch_; ++b)
    coef[b] = -loss_.d2(batch[b].y, predict(ens, act_, batch[b].x));

  const auto n = static_cast<std::size_t>(ens.size());
  Mat out = Mat::Zero(ens.dim(), ens.size());
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const Vec theta = ens.particle(static_cast<Eigen::Index>(j));
      Vec acc = Vec::Zero(theta.size());
      for (std::size_t b = 0; b < batch_; ++b)
        acc += coef[b] * act_.dphi(theta.dot(batch[b].x)) * batch[b].x;
      out.col(static_cast<Eigen::Index>(j)) = acc / static_cast<double>(batch_);
    }
  });
  return out;
}

double VelocityEvaluator::u_double_sum(const Mat& thetas,
                                       const Vec& weights) const {
  require(VelocityMode::ClosedFormErfGMM, "u_double_sum");
  const auto n = static_cast<std::size_t>(thetas.cols());
  std::vector<double> rows(n, 0.0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const Vec ti = thetas.col(ii);
      double acc = 0.5 * weights[ii] * big_u(ti, ti);
      for (Eigen::Index j = ii + 1; j < thetas.cols(); ++j)
        acc += weights[j] * big_u(ti, thetas.col(j));
      rows[i] = 2.0 * weights[ii] * acc;
    }
  });
  double total = 0.0;
  for (double r : rows) total += r;
  return total;
}

}  // namespace mfsmd
