#pragma once

#include <vector>

namespace spce {

/// Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Nodes and weights of the n-point Gauss-Legendre rule, computed by
/// Newton iteration on the Legendre polynomial; exact for polynomials of
/// degree 2n-1.
QuadratureRule gauss_legendre(int n);

}  // namespace spce
