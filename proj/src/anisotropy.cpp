#include "schauder/anisotropy.hpp"

#include <cmath>

#include "schauder/util.hpp"

namespace schauder {

void ChainDims::validate(int quad_limit) const {
    if (n < 1) throw std::invalid_argument("ChainDims: n must be >= 1");
    if (d < 1) throw std::invalid_argument("ChainDims: d must be >= 1");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("ChainDims: gamma must lie in (0,1)");
    if (!(horizon_T > 0.0)) throw std::invalid_argument("ChainDims: horizon_T must be > 0");
    if (n * d > quad_limit)
        throw std::invalid_argument("ChainDims: n*d exceeds the quadrature limit");
}

Eigen::VectorXd scale_matrix_diagonal(double u, const ChainDims& dims, bool inverse) {
    if (!(u > 0.0)) throw std::domain_error("scale_matrix: u must be > 0");
    Eigen::VectorXd diag(dims.nd());
    double p = 1.0;
    for (int i = 0; i < dims.n; ++i) {
        p *= u;
        const double val = inverse ? 1.0 / p : p;
        diag.segment(static_cast<Eigen::Index>(i) * dims.d, dims.d).setConstant(val);
    }
    return diag;
}

Eigen::VectorXd scale_matrix_apply(double u, const Eigen::VectorXd& v, const ChainDims& dims,
                                   bool inverse) {
    if (v.size() != dims.nd())
        throw std::invalid_argument("scale_matrix_apply: vector length != n*d");
    return scale_matrix_diagonal(u, dims, inverse).cwiseProduct(v);
}

double quasi_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      const ChainDims& dims) {
    if (x.size() != dims.nd() || y.size() != dims.nd())
        throw std::invalid_argument("quasi_distance: vector length != n*d");
    double acc = 0.0;
    for (int i = 0; i < dims.n; ++i) {
        const double blk =
            (y.segment(static_cast<Eigen::Index>(i) * dims.d, dims.d) -
             x.segment(static_cast<Eigen::Index>(i) * dims.d, dims.d))
                .norm();
        acc += std::pow(blk, 1.0 / (2.0 * i + 1.0));
    }
    return acc;
}

double parabolic_distance(const SpaceTimePoint& p, const SpaceTimePoint& q,
                          const ChainDims& dims) {
    if (q.t < p.t) throw std::invalid_argument("parabolic_distance: requires p.t <= q.t");
    return std::sqrt(q.t - p.t) + quasi_distance(p.x, q.x, dims);
}

SpaceTimePoint dilate(double lambda, const SpaceTimePoint& p, const ChainDims& dims) {
    if (!(lambda > 0.0)) throw std::domain_error("dilate: lambda must be > 0");
    SpaceTimePoint out;
    out.t = lambda * lambda * p.t;
    out.x.resize(p.x.size());
    for (int i = 0; i < dims.n; ++i) {
        const double factor = std::pow(lambda, 2.0 * i + 1.0);
        out.x.segment(static_cast<Eigen::Index>(i) * dims.d, dims.d) =
            factor * p.x.segment(static_cast<Eigen::Index>(i) * dims.d, dims.d);
    }
    return out;
}

WeylSampler::WeylSampler(int dim, std::uint64_t seed) {
    alphas_.resize(static_cast<size_t>(dim));
    offsets_.resize(static_cast<size_t>(dim));
    // Generalized golden ratios (Kronecker sequence); offsets decorrelate seeds.
    double phi = 2.0;
    for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / (dim + 1.0));
    double a = 1.0;
    for (int j = 0; j < dim; ++j) {
        a /= phi;
        alphas_[static_cast<size_t>(j)] = a;
        offsets_[static_cast<size_t>(j)] =
            counter_to_unit(seed * 0x100000001b3ULL + static_cast<std::uint64_t>(j));
    }
}

Eigen::VectorXd WeylSampler::point(std::uint64_t k) const {
    Eigen::VectorXd u(static_cast<Eigen::Index>(alphas_.size()));
    for (size_t j = 0; j < alphas_.size(); ++j) {
        double v = offsets_[j] + alphas_[j] * static_cast<double>(k + 1);
        u[static_cast<Eigen::Index>(j)] = v - std::floor(v);
    }
    return u;
}

double quasi_triangle_constant(const ChainDims& dims, const Box& box, int samples,
                               std::uint64_t seed) {
    WeylSampler sampler(3 * dims.nd(), seed);
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const Eigen::VectorXd u = sampler.point(static_cast<std::uint64_t>(k));
        const Eigen::VectorXd x = box.map_unit(u.segment(0, dims.nd()));
        const Eigen::VectorXd y = box.map_unit(u.segment(dims.nd(), dims.nd()));
        const Eigen::VectorXd z = box.map_unit(u.segment(2 * dims.nd(), dims.nd()));
        const double denom = quasi_distance(x, y, dims) + quasi_distance(y, z, dims);
        if (denom < 1e-14) continue;
        worst = std::max(worst, quasi_distance(x, z, dims) / denom);
    }
    return worst;
}

}  // namespace schauder
