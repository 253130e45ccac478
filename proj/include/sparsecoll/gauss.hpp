#pragma once

#include <cstddef>
#include <vector>

#include "sparsecoll/random_inputs.hpp"

namespace sparsecoll::detail {

struct GaussRule {
  std::vector<double> nodes;    // ascending
  std::vector<double> weights;  // sum to one
};

/// Gauss rule for the density of `dist` (Gauss-Legendre for uniform,
/// Gauss-Jacobi for beta), built with the Golub-Welsch eigenvalue method.
/// Exact for polynomials of degree <= 2 * count - 1 against the density.
GaussRule gauss_rule(const BoundedDistribution& dist, std::size_t count);

/// Same rule on the canonical interval [-1, 1].
GaussRule canonical_gauss_rule(const BoundedDistribution& dist, std::size_t count);

}  // namespace sparsecoll::detail
