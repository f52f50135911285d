#pragma once

#include <cstddef>
#include <vector>

namespace rfon {

/// Gauss-Hermite rule for the standard normal weight e^{-x^2/2}/sqrt(2 pi):
/// sum_i w_i f(x_i) approximates E f(g), exact for polynomials of degree < 2n.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Golub-Welsch construction from the probabilists' Hermite Jacobi matrix.
GaussHermiteRule gauss_hermite(int nodes);

/// Tensor-product rule over `dims` standard normals, enumerated with the first
/// coordinate fastest. Returns the node count nodes^dims.
std::size_t tensor_size(int nodes, std::size_t dims);
/// Fills point (dims values) and returns the weight for flat index `i`.
double tensor_point(const GaussHermiteRule& rule, std::size_t dims, std::size_t i, double* point);

}  // namespace rfon
