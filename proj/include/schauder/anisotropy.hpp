#pragma once

// Intrinsic scales of the degenerate chain: the scale matrix T_u (block i is
// u^i I_d), the parabolic dilation (t,x) -> (l^2 t, l x_1, l^3 x_2, ...), and
// the spatial quasi-distance d(x,y) = sum_i |y_i - x_i|^{1/(2i-1)}.

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace schauder {

struct ChainDims {
    int n = 1;          // chain levels
    int d = 1;          // block size
    double gamma = 0.5; // Holder exponent in (0,1)
    double horizon_T = 1.0;

    int nd() const { return n * d; }
    void validate(int quad_limit = 6) const;
};

struct SpaceTimePoint {
    double t = 0.0;
    Eigen::VectorXd x;
};

// Multiplies block i of v by u^i (u^{-i} when inverse). Encodes T_u without
// forming the matrix.
Eigen::VectorXd scale_matrix_apply(double u, const Eigen::VectorXd& v, const ChainDims& dims,
                                   bool inverse = false);

// Diagonal of T_u as a vector, for callers that want the matrix action cheaply.
Eigen::VectorXd scale_matrix_diagonal(double u, const ChainDims& dims, bool inverse = false);

// d(x,y) = sum_{i=1..n} |y_i - x_i|^{1/(2i-1)}, Euclidean block norms.
double quasi_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const ChainDims& dims);

// d_P(p,q) = (q.t - p.t)^{1/2} + d(p.x, q.x); requires p.t <= q.t.
double parabolic_distance(const SpaceTimePoint& p, const SpaceTimePoint& q,
                          const ChainDims& dims);

// (t,x) -> (l^2 t, l x_1, l^3 x_2, ..., l^{2n-1} x_n).
SpaceTimePoint dilate(double lambda, const SpaceTimePoint& p, const ChainDims& dims);

inline Eigen::VectorXd block_of(const Eigen::VectorXd& x, int i, const ChainDims& dims) {
    return x.segment(static_cast<Eigen::Index>(i) * dims.d, dims.d);
}

// Deterministic low-discrepancy points in [0,1)^dim (additive Weyl/Kronecker
// recurrence); `seed` shifts the whole sequence.
class WeylSampler {
public:
    WeylSampler(int dim, std::uint64_t seed);
    // k-th point of the sequence (k >= 0), independent of previous calls.
    Eigen::VectorXd point(std::uint64_t k) const;

private:
    std::vector<double> alphas_;
    std::vector<double> offsets_;
};

struct Box {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
    bool contains(const Eigen::VectorXd& x) const {
        return ((x.array() >= lo.array()) && (x.array() <= hi.array())).all();
    }
    Eigen::VectorXd width() const { return hi - lo; }
    Eigen::VectorXd map_unit(const Eigen::VectorXd& u) const {
        return lo + (hi - lo).cwiseProduct(u);
    }
};

// Empirical quasi-triangle constant of d: max over sampled triples of
// d(x,z) / (d(x,y) + d(y,z)). The paper fixes no value; reported only.
double quasi_triangle_constant(const ChainDims& dims, const Box& box, int samples,
                               std::uint64_t seed);

}  // namespace schauder
