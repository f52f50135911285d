#include "rfon/gauss_hermite.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rfon {

GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Hermite rule needs at least one node");
  // Probabilists' Hermite: x He_k = He_{k+1} + k He_{k-1}; off-diagonal sqrt(k).
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw std::runtime_error("Gauss-Hermite eigensolve failed");

  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return solver.eigenvalues()[a] < solver.eigenvalues()[b];
  });
  for (int i = 0; i < n; ++i) {
    const int j = order[i];
    rule.nodes[i] = solver.eigenvalues()[j];
    const double v0 = solver.eigenvectors()(0, j);
    rule.weights[i] = v0 * v0;
  }
  // Symmetrize to remove eigensolver asymmetry at the 1e-16 level.
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

std::size_t tensor_size(int nodes, std::size_t dims) {
  std::size_t total = 1;
  for (std::size_t d = 0; d < dims; ++d) total *= static_cast<std::size_t>(nodes);
  return total;
}

double tensor_point(const GaussHermiteRule& rule, std::size_t dims, std::size_t i, double* point) {
  const std::size_t n = rule.nodes.size();
  double w = 1.0;
  for (std::size_t d = 0; d < dims; ++d) {
    const std::size_t j = i % n;
    i /= n;
    point[d] = rule.nodes[j];
    w *= rule.weights[j];
  }
  return w;
}

}  // namespace rfon
