#pragma once

#include <vector>

namespace mfsmd {

/// Gauss-Hermite rule normalized for a standard normal variable:
/// E[g(Z)] ~= sum_k weights[k] * g(nodes[k]), Z ~ N(0, 1).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Golub-Welsch construction; exact for polynomials of degree < 2 * order.
GaussHermiteRule gauss_hermite(int order);

}  // namespace mfsmd
