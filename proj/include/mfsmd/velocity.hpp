#pragma once

#include <cstdint>

#include "mfsmd/data.hpp"
#include "mfsmd/model.hpp"
#include "mfsmd/quadrature.hpp"
#include "mfsmd/types.hpp"

namespace mfsmd {

enum class VelocityMode { MonteCarlo, ClosedFormErfGMM };

struct McEstimate {
  Vec mean;
  Vec std_error;  // per coordinate
};

/// Mean-field velocity v(theta, rho) = E_z[F(theta, rho, z)].
///
/// MonteCarlo averages F over fresh data batches and works for any
/// activation/loss. ClosedFormErfGMM uses the squared-loss decomposition
///   v(theta, rho) = -grad V(theta) - <rho, grad_1 U(theta, .)>
/// with V(theta) = -E[y erf(theta^T x)] and U(theta, theta') =
/// E[erf(theta^T x) erf(theta'^T x)] evaluated in closed form per mixture
/// component. The Gaussian weight exp(-(theta^T x)^2) coming from erf' tilts
/// N(m, s^2 I) into N(m_hat, Sigma_hat) with
///   b = 1 + 2 s^2 |theta|^2,  m_hat = m - (2 s^2 theta^T m / b) theta,
///   Sigma_hat = s^2 (I - 2 s^2 theta theta^T / b),
/// which gives grad V and grad_1 U without quadrature.
class VelocityEvaluator {
 public:
  static constexpr int kDefaultGhOrder = 32;
  static constexpr int kMinGhOrder = 8;

  static VelocityEvaluator monte_carlo(Activation act, Loss loss,
                                       LabeledGaussianMixture data,
                                       std::size_t batch_size,
                                       std::uint64_t seed);
  static VelocityEvaluator closed_form(LabeledGaussianMixture data,
                                       int gh_order = kDefaultGhOrder);

  VelocityMode mode() const { return mode_; }
  const Activation& activation() const { return act_; }
  const Loss& loss() const { return loss_; }
  const LabeledGaussianMixture& data() const { return data_; }
  std::size_t batch_size() const { return batch_; }
  int gh_order() const { return gh_order_; }

  /// Monte Carlo estimate over one fresh batch.
  Vec v_mc(const Vec& theta, const ParticleEnsemble& ens);
  McEstimate v_mc_estimate(const Vec& theta, const ParticleEnsemble& ens);

  double big_v(const Vec& theta) const;
  Vec big_v_grad(const Vec& theta) const;
  double big_u(const Vec& theta, const Vec& theta_prime) const;
  Vec big_u_grad1(const Vec& theta, const Vec& theta_prime) const;
  Vec v_closed(const Vec& theta, const ParticleEnsemble& ens) const;

  /// v at one point, by whichever route the mode selects.
  Vec evaluate(const Vec& theta, const ParticleEnsemble& ens);

  /// v(theta_j, rho_hat) for every particle of ens (d x n). Monte Carlo mode
  /// draws one batch shared by all particles.
  Mat field(const ParticleEnsemble& ens);
  /// Closed-form field at arbitrary targets against the measure of ens.
  Mat field_closed(const Mat& targets, const ParticleEnsemble& ens) const;

  /// (1/n^2) sum_{i,j} U(theta_i, theta_j) for weighted atoms.
  double u_double_sum(const Mat& thetas, const Vec& weights) const;

 private:
  VelocityEvaluator(VelocityMode mode, Activation act, Loss loss,
                    LabeledGaussianMixture data, std::size_t batch,
                    std::uint64_t seed, int gh_order);
  void require(VelocityMode m, const char* op) const;
  void check_theta(const Vec& theta) const;
  double component_u(const MixtureComponent& c, const Vec& theta,
                     const Vec& theta_prime) const;

  VelocityMode mode_;
  Activation act_;
  Loss loss_;
  LabeledGaussianMixture data_;
  std::size_t batch_ = 0;
  Rng rng_;
  int gh_order_ = kDefaultGhOrder;
  GaussHermiteRule rule_;
};

namespace detail {

struct KernelComponent {
  double label;
  double weight;
  double s2;
  const double* center;  // d entries
};

/// out(:, i) = -grad V(t_i) - (1/ns) sum_j grad_1 U(t_i, s_j) for column-major
/// targets (d x nt); sources are given row-wise (d rows of ns entries).
void interaction_field(int d, std::size_t nt, const double* targets,
                       std::size_t ns, const double* sources_rowwise,
                       const KernelComponent* comps, std::size_t ncomp,
                       double* out);

}  // namespace detail

}  // namespace mfsmd
