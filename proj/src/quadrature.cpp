#include "mfsmd/quadrature.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "mfsmd/errors.hpp"

namespace mfsmd {

GaussHermiteRule gauss_hermite(int order) {
  if (order < 1) throw InvalidArgument("gauss_hermite: order must be >= 1");
  // Jacobi matrix of the probabilists' Hermite polynomials.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = jacobi(k, k - 1);
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  if (eig.info() != Eigen::Success)
    throw NumericalFailure("gauss_hermite: eigen decomposition failed");

  GaussHermiteRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  double total = 0.0;
  for (int k = 0; k < order; ++k) {
    rule.nodes[k] = eig.eigenvalues()[k];
    const double v0 = eig.eigenvectors()(0, k);
    rule.weights[k] = v0 * v0;
    total += rule.weights[k];
  }
  for (double& w : rule.weights) w /= total;
  return rule;
}

}  // namespace mfsmd
