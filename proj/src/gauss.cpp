#include "sparsecoll/gauss.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace sparsecoll::detail {

// Monic Jacobi recurrence for the weight (1 - t)^A (1 + t)^B on [-1, 1]. The
// beta density with shape alpha at the lower end has B = alpha - 1, A = beta - 1.
GaussRule canonical_gauss_rule(const BoundedDistribution& dist, std::size_t count) {
  if (count == 0) throw InvalidArgument("gauss rule needs at least one node");
  const double A = dist.beta_shape() - 1.0;
  const double B = dist.alpha() - 1.0;
  const double s = A + B;

  Eigen::VectorXd diag(static_cast<Eigen::Index>(count));
  Eigen::VectorXd sub(static_cast<Eigen::Index>(count > 1 ? count - 1 : 1));
  diag[0] = (B - A) / (s + 2.0);
  for (std::size_t n = 1; n < count; ++n) {
    const double k = static_cast<double>(n);
    const double t = 2.0 * k + s;
    diag[static_cast<Eigen::Index>(n)] = (B * B - A * A) / (t * (t + 2.0));
    double b_n;
    if (n == 1) {
      b_n = 4.0 * (1.0 + A) * (1.0 + B) / ((2.0 + s) * (2.0 + s) * (3.0 + s));
    } else {
      b_n = 4.0 * k * (k + A) * (k + B) * (k + s) / (t * t * (t + 1.0) * (t - 1.0));
    }
    sub[static_cast<Eigen::Index>(n - 1)] = std::sqrt(b_n);
  }

  GaussRule rule;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  if (count == 1) {
    rule.nodes[0] = diag[0];
    rule.weights[0] = 1.0;
    return rule;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub.head(static_cast<Eigen::Index>(count - 1)),
                                Eigen::ComputeEigenvectors);
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    rule.nodes[i] = values[col];
    rule.weights[i] = vectors(0, col) * vectors(0, col);
    total += rule.weights[i];
  }
  for (double& w : rule.weights) w /= total;
  return rule;
}

GaussRule gauss_rule(const BoundedDistribution& dist, std::size_t count) {
  GaussRule rule = canonical_gauss_rule(dist, count);
  for (double& t : rule.nodes) t = dist.from_canonical(t);
  return rule;
}

}  // namespace sparsecoll::detail
