#pragma once

// Gauss-Legendre and Gauss-Hermite rules (Golub-Welsch on the Jacobi matrix)
// plus a small tensor-grid iterator used for the whitened Gaussian integrals.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace schauder {

struct QuadratureRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

// Nodes/weights for \int_{-1}^{1} f(x) dx.
QuadratureRule gauss_legendre(int n);

// Nodes/weights for \int_a^b f(x) dx.
QuadratureRule gauss_legendre(int n, double a, double b);

// Nodes/weights for the physicists' rule \int f(x) e^{-x^2} dx.
QuadratureRule gauss_hermite(int n);

// Row-major multi-index walker over a tensor grid with `dims` axes of size
// `points_per_axis`. Calls fn(idx) with idx an int vector of length dims.
template <class Fn>
void for_each_tensor_index(int dims, int points_per_axis, Fn&& fn) {
    std::vector<int> idx(static_cast<size_t>(dims), 0);
    while (true) {
        fn(idx);
        int axis = dims - 1;
        while (axis >= 0) {
            if (++idx[static_cast<size_t>(axis)] < points_per_axis) break;
            idx[static_cast<size_t>(axis)] = 0;
            --axis;
        }
        if (axis < 0) return;
    }
}

// E[f(Z)] for Z ~ N(0, I_dim) by tensor Gauss-Hermite. fn takes an
// Eigen::VectorXd of standard-normal coordinates.
template <class Fn>
double gauss_hermite_expectation(const QuadratureRule& rule_1d, int dim, Fn&& fn) {
    const int n = static_cast<int>(rule_1d.nodes.size());
    const double norm = std::pow(M_PI, -0.5 * dim);
    double acc = 0.0;
    Eigen::VectorXd z(dim);
    for_each_tensor_index(dim, n, [&](const std::vector<int>& idx) {
        double w = 1.0;
        for (int k = 0; k < dim; ++k) {
            w *= rule_1d.weights[idx[static_cast<size_t>(k)]];
            z[k] = M_SQRT2 * rule_1d.nodes[idx[static_cast<size_t>(k)]];
        }
        acc += w * fn(z);
    });
    return norm * acc;
}

}  // namespace schauder
