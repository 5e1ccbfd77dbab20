#pragma once

#include "mfsmd/types.hpp"

namespace mfsmd {

enum class PotentialKind { Euclidean, PNormSquared };

/// Mirror potential psi(theta) = 1/2 ||theta||_p^2.
///
/// With eps > 0 every coordinate magnitude is smoothed as
/// |theta_i|_eps = sqrt(theta_i^2 + eps^2), which keeps the Hessian finite on
/// the coordinate axes when p < 2. Euclidean is the p = 2, eps = 0 member.
///
/// Value object; every member is a pure function of its arguments.
class MirrorPotential {
 public:
  static constexpr double kDefaultEps = 1e-6;
  static constexpr double kInverseTolerance = 1e-12;

  static MirrorPotential euclidean();
  static MirrorPotential pnorm(double p, double eps = kDefaultEps);

  PotentialKind kind() const { return kind_; }
  double p() const { return p_; }
  double eps() const { return eps_; }
  /// Conjugate exponent q = p / (p - 1).
  double q() const { return p_ / (p_ - 1.0); }
  /// True when grad, its inverse and the Hessian are all the identity.
  bool is_identity() const { return p_ == 2.0; }

  double psi(const Vec& theta) const;
  Vec grad(const Vec& theta) const;
  /// Dual-to-primal map: returns theta with grad(theta) = omega.
  Vec grad_inv(const Vec& omega) const;
  Mat hessian(const Vec& theta) const;
  /// H(theta)^{-1} w by a Cholesky solve.
  Vec hessian_inv_apply(const Vec& theta, const Vec& w) const;
  /// sqrt(det H(theta)) from the diagonal-plus-rank-one structure.
  double sqrt_det_hessian(const Vec& theta) const;

 private:
  MirrorPotential(PotentialKind kind, double p, double eps);

  struct Structure {
    Vec diag;      // S * a_i^{p-4} ((p-1) theta_i^2 + eps^2)
    Vec r;         // a_i^{p-2} theta_i
    double scale;  // S = ||a||_p^{2-p}
    double beta;   // S (2-p) / N, the rank-one coefficient
  };
  Structure structure(const Vec& theta) const;
  void check_finite(const Vec& v, const char* op) const;
  Vec grad_inv_newton(const Vec& omega) const;

  PotentialKind kind_;
  double p_;
  double eps_;
};

}  // namespace mfsmd
