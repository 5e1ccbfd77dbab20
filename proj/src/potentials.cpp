#include "mfsmd/potentials.hpp"

#include <cmath>
#include <sstream>

#include "mfsmd/errors.hpp"

namespace mfsmd {

namespace {

double signum(double x) { return (x > 0.0) - (x < 0.0); }

// Gradient of 1/2 ||v||_r^2 without smoothing; v != 0.
Vec plain_norm_grad(const Vec& v, double r) {
  double n = 0.0;
  for (double vi : v) n += std::pow(std::abs(vi), r);
  const double s = std::pow(n, (2.0 - r) / r);
  Vec g(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    g[i] = s * signum(v[i]) * std::pow(std::abs(v[i]), r - 1.0);
  return g;
}

}  // namespace

bool all_finite(const Eigen::Ref<const Mat>& m) { return m.allFinite(); }

MirrorPotential::MirrorPotential(PotentialKind kind, double p, double eps)
    : kind_(kind), p_(p), eps_(eps) {}

MirrorPotential MirrorPotential::euclidean() {
  return MirrorPotential(PotentialKind::Euclidean, 2.0, 0.0);
}

MirrorPotential MirrorPotential::pnorm(double p, double eps) {
  if (!(p > 1.0 && p <= 2.0))
    throw InvalidArgument("pnorm potential requires p in (1, 2]");
  if (!(eps >= 0.0) || !std::isfinite(eps))
    throw InvalidArgument("pnorm potential requires eps >= 0");
  return MirrorPotential(PotentialKind::PNormSquared, p, eps);
}

void MirrorPotential::check_finite(const Vec& v, const char* op) const {
  if (v.size() == 0)
    throw InvalidArgument(std::string(op) + ": empty vector");
  if (!v.allFinite())
    throw InvalidArgument(std::string(op) + ": non-finite input");
}

double MirrorPotential::psi(const Vec& theta) const {
  check_finite(theta, "psi");
  double n = 0.0;
  for (double t : theta) {
    const double a = eps_ > 0.0 ? std::hypot(t, eps_) : std::abs(t);
    n += p_ == 2.0 ? a * a : std::pow(a, p_);
  }
  return 0.5 * (p_ == 2.0 ? n : std::pow(n, 2.0 / p_));
}

Vec MirrorPotential::grad(const Vec& theta) const {
  check_finite(theta, "grad_psi");
  if (is_identity()) return theta;
  if (eps_ == 0.0) {
    if (theta.isZero(0.0))
      throw SingularPoint("grad_psi: theta = 0 is singular for p < 2, eps = 0");
    return plain_norm_grad(theta, p_);
  }
  const Structure st = structure(theta);
  return st.scale * st.r;
}

MirrorPotential::Structure MirrorPotential::structure(const Vec& theta) const {
  const Eigen::Index d = theta.size();
  Structure st{Vec(d), Vec(d), 0.0, 0.0};
  double n = 0.0;
  Vec a(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    a[i] = eps_ > 0.0 ? std::hypot(theta[i], eps_) : std::abs(theta[i]);
    n += std::pow(a[i], p_);
  }
  st.scale = std::pow(n, (2.0 - p_) / p_);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double t2 = theta[i] * theta[i];
    st.r[i] = std::pow(a[i], p_ - 2.0) * theta[i];
    st.diag[i] =
        st.scale * std::pow(a[i], p_ - 4.0) * ((p_ - 1.0) * t2 + eps_ * eps_);
  }
  st.beta = st.scale * (2.0 - p_) / n;
  return st;
}

Mat MirrorPotential::hessian(const Vec& theta) const {
  check_finite(theta, "hessian");
  const Eigen::Index d = theta.size();
  if (is_identity()) return Mat::Identity(d, d);
  if (eps_ == 0.0 && (theta.array() == 0.0).any())
    throw SingularPoint("hessian: coordinate at zero with p < 2, eps = 0");
  const Structure st = structure(theta);
  Mat h = st.beta * st.r * st.r.transpose();
  h.diagonal() += st.diag;
  return h;
}

Vec MirrorPotential::hessian_inv_apply(const Vec& theta, const Vec& w) const {
  if (theta.size() != w.size())
    throw InvalidArgument("hessian_inv_apply: dimension mismatch");
  if (is_identity()) {
    check_finite(theta, "hessian_inv_apply");
    return w;
  }
  const Mat h = hessian(theta);
  const Eigen::LLT<Mat> llt(h);
  const double cond = h.diagonal().maxCoeff() / h.diagonal().minCoeff();
  if (llt.info() != Eigen::Success)
    throw NumericalFailure("hessian_inv_apply: Cholesky failed", cond);
  Vec x = llt.solve(w);
  const double target = 1e-10 * w.norm();
  Vec res = w - h * x;
  if (res.norm() > target) {
    x += llt.solve(res);
    res = w - h * x;
    if (res.norm() > target) {
      std::ostringstream msg;
      msg << "hessian_inv_apply: residual " << res.norm()
          << " above tolerance, condition estimate " << cond;
      throw NumericalFailure(msg.str(), cond);
    }
  }
  return x;
}

double MirrorPotential::sqrt_det_hessian(const Vec& theta) const {
  check_finite(theta, "volume_element");
  if (is_identity()) return 1.0;
  if (eps_ == 0.0 && (theta.array() == 0.0).any())
    throw SingularPoint("volume_element: coordinate at zero with p < 2, eps = 0");
  const Structure st = structure(theta);
  // det(D + beta r r^T) = det(D) (1 + beta r^T D^{-1} r)
  double log_det = 0.0;
  double quad = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    log_det += std::log(st.diag[i]);
    quad += st.r[i] * st.r[i] / st.diag[i];
  }
  log_det += std::log1p(st.beta * quad);
  return std::exp(0.5 * log_det);
}

Vec MirrorPotential::grad_inv(const Vec& omega) const {
  check_finite(omega, "grad_psi_inv");
  if (is_identity()) return omega;
  if (omega.isZero(0.0)) return Vec::Zero(omega.size());
  if (eps_ == 0.0) return plain_norm_grad(omega, q());
  return grad_inv_newton(omega);
}

// Damped Newton on grad(theta) = omega. The Jacobian is H, which is SPD, and
// the eps = 0 conjugate map is an accurate start away from the eps scale.
Vec MirrorPotential::grad_inv_newton(const Vec& omega) const {
  constexpr int kMaxIter = 100;
  constexpr int kMaxHalvings = 60;
  const double stall_tol =
      kInverseTolerance * (1.0 + omega.norm());

  Vec theta = plain_norm_grad(omega, q());
  Vec res = grad(theta) - omega;
  double rn = res.norm();
  for (int it = 0; it < kMaxIter; ++it) {
    if (rn <= kInverseTolerance) return theta;
    const Mat h = hessian(theta);
    const Eigen::LLT<Mat> llt(h);
    if (llt.info() != Eigen::Success)
      throw NumericalFailure("grad_psi_inv: Hessian not SPD", rn);
    const Vec step = -llt.solve(res);

    double alpha = 1.0;
    bool improved = false;
    for (int k = 0; k < kMaxHalvings; ++k, alpha *= 0.5) {
      const Vec trial = theta + alpha * step;
      const Vec trial_res = grad(trial) - omega;
      const double trial_rn = trial_res.norm();
      if (trial_rn < rn) {
        theta = trial;
        res = trial_res;
        rn = trial_rn;
        improved = true;
        break;
      }
    }
    if (!improved) {
      if (rn <= stall_tol) return theta;
      break;
    }
  }
  if (rn <= stall_tol) return theta;
  std::ostringstream msg;
  msg << "grad_psi_inv: no convergence, residual " << rn;
  throw NumericalFailure(msg.str(), rn);
}

}  // namespace mfsmd
