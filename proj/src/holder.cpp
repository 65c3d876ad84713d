#include "schauder/holder.hpp"

#include <cmath>
#include <stdexcept>

namespace schauder {

namespace {

Eigen::VectorXd embed_block(const Eigen::VectorXd& base, int direction, const ChainDims& dims,
                            const Eigen::VectorXd& coord) {
    Eigen::VectorXd out = base;
    out.segment(static_cast<Eigen::Index>(direction - 1) * dims.d, dims.d) = coord;
    return out;
}

// Gradient of f along block `direction` at x, centered differences.
Eigen::VectorXd block_gradient(const VectorField& f, const ChainDims& dims, int direction,
                               const Eigen::VectorXd& x, double h) {
    const int base = (direction - 1) * dims.d;
    Eigen::VectorXd first = f(x);
    Eigen::VectorXd out(first.size() * dims.d);
    for (int c = 0; c < dims.d; ++c) {
        Eigen::VectorXd xp = x, xm = x;
        xp[base + c] += h;
        xm[base + c] -= h;
        out.segment(static_cast<Eigen::Index>(c) * first.size(), first.size()) =
            (f(xp) - f(xm)) / (2.0 * h);
    }
    return out;
}

// Hessian of f along block `direction` at x, flattened row-major.
Eigen::VectorXd block_hessian(const VectorField& f, const ChainDims& dims, int direction,
                              const Eigen::VectorXd& x, double h) {
    const int base = (direction - 1) * dims.d;
    const Eigen::VectorXd f0 = f(x);
    const Eigen::Index m = f0.size();
    Eigen::VectorXd out(m * dims.d * dims.d);
    for (int a = 0; a < dims.d; ++a) {
        for (int b = 0; b < dims.d; ++b) {
            Eigen::VectorXd val(m);
            if (a == b) {
                Eigen::VectorXd xp = x, xm = x;
                xp[base + a] += h;
                xm[base + a] -= h;
                val = (f(xp) - 2.0 * f0 + f(xm)) / (h * h);
            } else {
                Eigen::VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
                xpp[base + a] += h; xpp[base + b] += h;
                xpm[base + a] += h; xpm[base + b] -= h;
                xmp[base + a] -= h; xmp[base + b] += h;
                xmm[base + a] -= h; xmm[base + b] -= h;
                val = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h * h);
            }
            out.segment((static_cast<Eigen::Index>(a) * dims.d + b) * m, m) = val;
        }
    }
    return out;
}

}  // namespace

std::vector<DirectionEvent> make_direction_events(const ChainDims& dims, int direction,
                                                  const Box& box, int samples,
                                                  std::uint64_t seed) {
    if (samples < 2) throw std::invalid_argument("make_direction_events: samples < 2");
    if ((box.width().array() <= 0.0).any())
        throw std::invalid_argument("make_direction_events: empty box");
    // One Weyl draw yields an anchor plus two block coordinates.
    WeylSampler sampler(dims.nd() + 2 * dims.d, seed + static_cast<std::uint64_t>(direction));
    std::vector<DirectionEvent> events;
    events.reserve(static_cast<size_t>(samples));
    const int base = (direction - 1) * dims.d;
    for (int k = 0; k < samples; ++k) {
        const Eigen::VectorXd u = sampler.point(static_cast<std::uint64_t>(k));
        Eigen::VectorXd anchor = box.map_unit(u.segment(0, dims.nd()));
        Eigen::VectorXd c1(dims.d), c2(dims.d);
        for (int c = 0; c < dims.d; ++c) {
            c1[c] = box.lo[base + c] + box.width()[base + c] * u[dims.nd() + c];
            c2[c] = box.lo[base + c] + box.width()[base + c] * u[dims.nd() + dims.d + c];
        }
        DirectionEvent ev;
        ev.p = embed_block(anchor, direction, dims, c1);
        ev.q = embed_block(anchor, direction, dims, c2);
        events.push_back(std::move(ev));
    }
    return events;
}

DirectionEstimate holder_directional_from_events(const VectorField& field, const ChainDims& dims,
                                                 int direction, double alpha,
                                                 const std::vector<DirectionEvent>& events,
                                                 double fd_step) {
    if (!(alpha > 0.0 && alpha < 3.0) || std::abs(alpha - std::round(alpha)) < 1e-12)
        throw std::invalid_argument("holder_directional: alpha must be non-integer in (0,3)");
    const int k = static_cast<int>(std::floor(alpha));
    const double beta = alpha - k;
    const int base = (direction - 1) * dims.d;

    DirectionEstimate est;
    est.direction = direction;
    est.alpha = alpha;
    est.derivative_sups.assign(static_cast<size_t>(k), 0.0);

    auto deriv = [&](int order, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        if (order == 0) return field(x);
        if (order == 1) return block_gradient(field, dims, direction, x, fd_step);
        return block_hessian(field, dims, direction, x, fd_step);
    };

    for (const DirectionEvent& ev : events) {
        est.sup_value = std::max({est.sup_value, field(ev.p).norm(), field(ev.q).norm()});
        for (int order = 1; order <= k; ++order)
            est.derivative_sups[static_cast<size_t>(order - 1)] =
                std::max(est.derivative_sups[static_cast<size_t>(order - 1)],
                         deriv(order, ev.p).norm());
        const double gap =
            (ev.p.segment(base, dims.d) - ev.q.segment(base, dims.d)).norm();
        if (gap < 4.0 * fd_step) continue;  // too close for a meaningful ratio
        const double diff = (deriv(k, ev.p) - deriv(k, ev.q)).norm();
        est.seminorm = std::max(est.seminorm, diff / std::pow(gap, beta));
    }
    return est;
}

AnisotropicHolderReport holder_norm_anisotropic(const ScalarField& field, const ChainDims& dims,
                                                int order_k, const Box& box, int samples,
                                                std::uint64_t seed) {
    if (order_k != 0 && order_k != 2)
        throw std::invalid_argument("holder_norm_anisotropic: order_k must be 0 or 2");
    if (samples < 2) throw std::invalid_argument("holder_norm_anisotropic: samples < 2");
    if (box.lo.size() != dims.nd() || (box.width().array() <= 0.0).any())
        throw std::invalid_argument("holder_norm_anisotropic: empty or mismatched box");

    AnisotropicHolderReport report;
    report.order_k = order_k;
    report.samples = samples;
    report.seed = seed;
    report.box = box;
    const VectorField vfield = as_vector_field(field);
    for (int i = 1; i <= dims.n; ++i) {
        const double alpha = (order_k + dims.gamma) / (2.0 * i - 1.0);
        const double width =
            box.width().segment(static_cast<Eigen::Index>(i - 1) * dims.d, dims.d).minCoeff();
        const auto events = make_direction_events(dims, i, box, samples, seed);
        DirectionEstimate est =
            holder_directional_from_events(vfield, dims, i, alpha, events, width / 256.0);
        report.sup_norm = std::max(report.sup_norm, est.sup_value);
        report.homogeneous_sum += est.c_norm();
        report.cb_total += est.cb_norm();
        report.directions.push_back(std::move(est));
    }
    return report;
}

}  // namespace schauder
