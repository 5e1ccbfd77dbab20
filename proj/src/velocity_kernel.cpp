// Pairwise closed-form interaction field. This translation unit is compiled
// with -ffast-math so the source loop vectorizes through the vector math
// library (erf, exp); it performs no finiteness checks of its own.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mfsmd/parallel.hpp"
#include "mfsmd/velocity.hpp"

namespace mfsmd::detail {

void interaction_field(int d, std::size_t nt, const double* targets,
                       std::size_t ns, const double* src,
                       const KernelComponent* comps, std::size_t ncomp,
                       double* out) {
  constexpr double kTwoOverSqrtPi = 2.0 * std::numbers::inv_sqrtpi;
  const std::size_t dd = static_cast<std::size_t>(d);
  const double inv_ns = 1.0 / static_cast<double>(ns);

  std::vector<double> sq(ns, 0.0);
  for (std::size_t r = 0; r < dd; ++r) {
    const double* row = src + r * ns;
    for (std::size_t j = 0; j < ns; ++j) sq[j] += row[j] * row[j];
  }

  parallel_for(nt, [&](std::size_t begin, std::size_t end) {
    std::vector<double> tdot(ns), mu(ns), g(ns);
    std::vector<double> m_hat(dd), acc(dd);
    for (std::size_t i = begin; i < end; ++i) {
      const double* t = targets + i * dd;
      double* o = out + i * dd;
      double tt = 0.0;
      for (std::size_t r = 0; r < dd; ++r) tt += t[r] * t[r];

      std::fill(tdot.begin(), tdot.end(), 0.0);
      for (std::size_t r = 0; r < dd; ++r) {
        const double* row = src + r * ns;
        const double tr = t[r];
        for (std::size_t j = 0; j < ns; ++j) tdot[j] += tr * row[j];
      }
      for (std::size_t r = 0; r < dd; ++r) o[r] = 0.0;

      for (std::size_t k = 0; k < ncomp; ++k) {
        const KernelComponent& c = comps[k];
        const double s2 = c.s2;
        const double b = 1.0 + 2.0 * s2 * tt;
        double mu1 = 0.0;
        for (std::size_t r = 0; r < dd; ++r) mu1 += t[r] * c.center[r];
        const double amp = c.weight * kTwoOverSqrtPi *
                           std::exp(-mu1 * mu1 / b) / std::sqrt(b);
        const double shrink = 2.0 * s2 * mu1 / b;
        for (std::size_t r = 0; r < dd; ++r)
          m_hat[r] = c.center[r] - shrink * t[r];

        std::fill(mu.begin(), mu.end(), 0.0);
        for (std::size_t r = 0; r < dd; ++r) {
          const double* row = src + r * ns;
          const double mr = m_hat[r];
          for (std::size_t j = 0; j < ns; ++j) mu[j] += mr * row[j];
        }

        // Var(theta_j^T x) under the tilted law, and the smoothed erf and erf'
        const double coef = 2.0 * s2 / b;
        double sum_e = 0.0;
        for (std::size_t j = 0; j < ns; ++j) {
          double var = s2 * (sq[j] - coef * tdot[j] * tdot[j]);
          var = var > 0.0 ? var : 0.0;
          const double rc = 1.0 / std::sqrt(1.0 + 2.0 * var);
          const double z = mu[j] * rc;
          sum_e += std::erf(z);
          g[j] = kTwoOverSqrtPi * std::exp(-z * z) * rc;
        }
        for (std::size_t r = 0; r < dd; ++r) {
          const double* row = src + r * ns;
          double a = 0.0;
          for (std::size_t j = 0; j < ns; ++j) a += g[j] * row[j];
          acc[r] = a;
        }
        double ta = 0.0;
        for (std::size_t r = 0; r < dd; ++r) ta += t[r] * acc[r];
        for (std::size_t r = 0; r < dd; ++r) {
          const double sig = s2 * (acc[r] - coef * ta * t[r]);
          o[r] += amp * (c.label * m_hat[r] - (m_hat[r] * sum_e + sig) * inv_ns);
        }
      }
    }
  });
}

}  // namespace mfsmd::detail
