#pragma once

// Box-restricted estimation of the anisotropic Holder norms: per block i the
// one-directional C^{(k+gamma)/(2i-1)} norm of x -> field(z with block i
// shifted by x), sup over sampled anchors z. Suprema use deterministic
// low-discrepancy samples so results are reproducible and monotone under
// restriction of the sample set.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "schauder/anisotropy.hpp"

namespace schauder {

using ScalarField = std::function<double(const Eigen::VectorXd&)>;
using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// A pair of full points differing only in block `direction`; the fractional
// ratio |D^k f(p) - D^k f(q)| / |p_i - q_i|^beta is one seminorm candidate.
struct DirectionEvent {
    Eigen::VectorXd p;
    Eigen::VectorXd q;
};

std::vector<DirectionEvent> make_direction_events(const ChainDims& dims, int direction,
                                                  const Box& box, int samples,
                                                  std::uint64_t seed);

struct DirectionEstimate {
    int direction = 1;   // 1-based block index
    double alpha = 0.0;  // Holder index along this block
    double sup_value = 0.0;
    std::vector<double> derivative_sups;  // orders 1..floor(alpha)
    double seminorm = 0.0;                // fractional part of order floor(alpha)

    double c_norm() const {
        double s = seminorm;
        for (double v : derivative_sups) s += v;
        return s;
    }
    double cb_norm() const { return sup_value + c_norm(); }
};

// alpha must be non-integer, 0 < alpha < 3. fd_step is the centered-difference
// step used for whole derivatives along block `direction`.
DirectionEstimate holder_directional_from_events(const VectorField& field, const ChainDims& dims,
                                                 int direction, double alpha,
                                                 const std::vector<DirectionEvent>& events,
                                                 double fd_step);

struct AnisotropicHolderReport {
    std::vector<DirectionEstimate> directions;
    double sup_norm = 0.0;        // sup |field| over all sampled evaluations
    double homogeneous_sum = 0.0; // sum_i of per-direction C^{alpha_i} norms
    double cb_total = 0.0;        // sum_i of per-direction C_b^{alpha_i} norms
    int order_k = 0;
    int samples = 0;
    std::uint64_t seed = 0;
    Box box;
};

// order_k in {0, 2}; per-direction exponents (order_k + gamma) / (2i - 1).
AnisotropicHolderReport holder_norm_anisotropic(const ScalarField& field, const ChainDims& dims,
                                                int order_k, const Box& box, int samples,
                                                std::uint64_t seed);

inline VectorField as_vector_field(const ScalarField& f) {
    return [f](const Eigen::VectorXd& x) {
        Eigen::VectorXd v(1);
        v[0] = f(x);
        return v;
    };
}

}  // namespace schauder
