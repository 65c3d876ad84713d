#include "schauder/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "schauder/quadrature.hpp"
#include "schauder/util.hpp"

namespace schauder {

namespace {

constexpr int kWeierstrassBase = 2;

double fd_step_for(const Eigen::VectorXd& x) { return 1e-5 * (1.0 + x.norm()); }

Eigen::MatrixXd subdiagonal_chain_matrix(const ChainDims& dims) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dims.nd(), dims.nd());
    for (int i = 1; i < dims.n; ++i)
        A.block(static_cast<Eigen::Index>(i) * dims.d,
                static_cast<Eigen::Index>(i - 1) * dims.d, dims.d, dims.d)
            .setIdentity();
    return A;
}

std::vector<int> block_coords(const ChainDims& dims, int first_block, int last_block) {
    std::vector<int> coords;
    for (int i = first_block; i <= last_block; ++i)
        for (int c = 0; c < dims.d; ++c) coords.push_back((i - 1) * dims.d + c);
    return coords;
}

// Antiderivative of the weierstrass sum with the same phases; C^{1+rho}.
double weierstrass_int(double x, double rho, int levels, std::uint64_t phase_seed) {
    double acc = 0.0;
    double freq = 1.0;
    double amp = 1.0;
    const double decay = std::pow(kWeierstrassBase, -(1.0 + rho));
    for (int k = 0; k <= levels; ++k) {
        const double phase = 2.0 * M_PI * counter_to_unit(phase_seed + static_cast<std::uint64_t>(k));
        acc += amp * std::sin(freq * x + phase);
        freq *= kWeierstrassBase;
        amp *= decay;
    }
    return acc;
}

}  // namespace

double weierstrass(double x, double rho, int levels, std::uint64_t phase_seed) {
    double acc = 0.0;
    double freq = 1.0;
    double amp = 1.0;
    const double decay = std::pow(kWeierstrassBase, -rho);
    for (int k = 0; k <= levels; ++k) {
        const double phase = 2.0 * M_PI * counter_to_unit(phase_seed + static_cast<std::uint64_t>(k));
        acc += amp * std::cos(freq * x + phase);
        freq *= kWeierstrassBase;
        amp *= decay;
    }
    return acc;
}

Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::VectorXd ChainProblem::drift_full(double t, const Eigen::VectorXd& x) const {
    Eigen::VectorXd out(dims.nd());
    for (int i = 0; i < dims.n; ++i)
        out.segment(static_cast<Eigen::Index>(i) * dims.d, dims.d) =
            drift[static_cast<size_t>(i)].eval(t, x);
    return out;
}

Eigen::MatrixXd ChainProblem::drift_subdiagonal_jacobian(double t, const Eigen::VectorXd& x) const {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dims.nd(), dims.nd());
    const double h = fd_step_for(x);
    for (int i = 2; i <= dims.n; ++i) {
        const int row = (i - 1) * dims.d;
        const int col = (i - 2) * dims.d;
        for (int c = 0; c < dims.d; ++c) {
            Eigen::VectorXd xp = x, xm = x;
            xp[col + c] += h;
            xm[col + c] -= h;
            J.block(row, col, dims.d, dims.d).col(c) =
                (drift[static_cast<size_t>(i - 1)].eval(t, xp) -
                 drift[static_cast<size_t>(i - 1)].eval(t, xm)) /
                (2.0 * h);
        }
    }
    return J;
}

std::vector<std::string> catalog_names() {
    return {"l0",          "gaussian_chain", "brownian",     "ou_perturbed",
            "kinetic_nonlinear", "kinetic_rough",  "rough_drift", "sawtooth_a"};
}

ChainProblem make_catalog_problem(const std::string& name, const ChainDims& dims,
                                  const CatalogParams& params) {
    dims.validate();
    ChainProblem p;
    p.dims = dims;
    p.catalog_id = name;

    const int d = dims.d;
    const int n = dims.n;
    const double gamma = dims.gamma;
    const std::uint64_t ps = params.phase_seed;
    // Rough entries stay Holder down to scale 2 pi / 2^levels.
    const int levels = params.rough_levels;

    auto identity_a = [d](double, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Identity(d, d).eval();
    };
    auto chain_component = [d, n](int i) {
        // F_i(x) = x_{i-1} for i >= 2, F_1 = 0.
        return [d, i](double, const Eigen::VectorXd& x) -> Eigen::VectorXd {
            if (i == 1) return Eigen::VectorXd::Zero(d);
            return x.segment(static_cast<Eigen::Index>(i - 2) * d, d);
        };
    };

    auto set_affine_chain = [&]() {
        p.drift.clear();
        for (int i = 1; i <= n; ++i) {
            DriftComponent comp;
            comp.eval = chain_component(i);
            comp.depends_on = (i == 1) ? std::vector<int>{} : block_coords(dims, i - 1, i - 1);
            p.drift.push_back(std::move(comp));
        }
        p.drift_is_affine = true;
        p.affine_A = subdiagonal_chain_matrix(dims);
        p.affine_b = Eigen::VectorXd::Zero(dims.nd());
        p.diffusion_a = identity_a;
        p.a_depends_on = {};
        p.a_is_constant = true;
    };

    if (name == "l0" || name == "gaussian_chain") {
        set_affine_chain();
    } else if (name == "brownian") {
        p.drift.clear();
        for (int i = 1; i <= n; ++i) {
            DriftComponent comp;
            comp.eval = [d](double, const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(d); };
            comp.depends_on = {};
            p.drift.push_back(std::move(comp));
        }
        p.drift_is_affine = true;
        p.affine_A = Eigen::MatrixXd::Zero(dims.nd(), dims.nd());
        p.affine_b = Eigen::VectorXd::Zero(dims.nd());
        p.diffusion_a = identity_a;
        p.a_depends_on = {};
        p.a_is_constant = true;
    } else if (name == "ou_perturbed") {
        set_affine_chain();
        const double amp = params.amp;
        DriftComponent f1;
        f1.eval = [d, n, amp](double, const Eigen::VectorXd& x) -> Eigen::VectorXd {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
            for (int i = 0; i < n; ++i) v += x.segment(static_cast<Eigen::Index>(i) * d, d);
            return amp * v.array().sin().matrix();
        };
        f1.depends_on = block_coords(dims, 1, n);
        p.drift[0] = std::move(f1);
        p.drift_is_affine = false;
    } else if (name == "kinetic_nonlinear") {
        if (n != 2) throw std::invalid_argument("kinetic catalog problems require n = 2");
        set_affine_chain();
        const double amp = params.amp;
        const double a_amp = (params.a_amp > 0.0) ? params.a_amp : 0.2;
        DriftComponent f1;
        f1.eval = [d, amp](double, const Eigen::VectorXd& x) -> Eigen::VectorXd {
            return amp *
                   (x.segment(0, d) + x.segment(d, d)).array().sin().matrix();
        };
        f1.depends_on = block_coords(dims, 1, 2);
        DriftComponent f2;
        f2.eval = [d, amp](double, const Eigen::VectorXd& x) -> Eigen::VectorXd {
            return x.segment(0, d) + amp * x.segment(d, d).array().sin().matrix();
        };
        f2.depends_on = block_coords(dims, 1, 2);
        p.drift[0] = std::move(f1);
        p.drift[1] = std::move(f2);
        p.drift_is_affine = false;
        p.diffusion_a = [d, a_amp](double, const Eigen::VectorXd& x) {
            return ((1.0 + a_amp * std::cos(x[0])) * Eigen::MatrixXd::Identity(d, d)).eval();
        };
        p.a_depends_on = {0};
        p.a_is_constant = false;
    } else if (name == "kinetic_rough") {
        if (n != 2) throw std::invalid_argument("kinetic catalog problems require n = 2");
        set_affine_chain();
        const double amp = params.amp;
        const double a_amp = (params.a_amp > 0.0) ? params.a_amp : 0.2;
        const double rho2 = (params.rough_exponent > 0.0) ? params.rough_exponent
                                                          : (1.0 + gamma) / 3.0;
        DriftComponent f1;
        f1.eval = [d, amp, gamma, levels, ps](double, const Eigen::VectorXd& x) -> Eigen::VectorXd {
            Eigen::VectorXd v(d);
            for (int c = 0; c < d; ++c)
                v[c] = amp * (weierstrass(x[c], gamma, levels, ps) +
                              weierstrass(x[d + c], gamma / 3.0, levels, ps + 101));
            return v;
        };
        f1.depends_on = block_coords(dims, 1, 2);
        DriftComponent f2;
        f2.eval = [d, amp, gamma, rho2, levels, ps](double, const Eigen::VectorXd& x) -> Eigen::VectorXd {
            Eigen::VectorXd v(d);
            for (int c = 0; c < d; ++c)
                v[c] = x[c] + amp * weierstrass_int(x[c], gamma, levels, ps + 211) +
                       amp * weierstrass(x[d + c], rho2, levels, ps + 307);
            return v;
        };
        f2.depends_on = block_coords(dims, 1, 2);
        p.drift[0] = std::move(f1);
        p.drift[1] = std::move(f2);
        p.drift_is_affine = false;
        // W is bounded by 1/(1 - 2^{-gamma}); rescale so a stays in (0, 2).
        const double wbound = 1.0 / (1.0 - std::pow(2.0, -gamma));
        p.diffusion_a = [d, a_amp, gamma, levels, ps, wbound](double, const Eigen::VectorXd& x) {
            const double v = 1.0 + (a_amp / wbound) * weierstrass(x[0], gamma, levels, ps + 401);
            return (v * Eigen::MatrixXd::Identity(d, d)).eval();
        };
        p.a_depends_on = {0};
        p.a_is_constant = false;
    } else if (name == "rough_drift") {
        set_affine_chain();
        const double amp = params.amp;
        DriftComponent f1;
        f1.eval = [d, amp, gamma, levels, ps](double, const Eigen::VectorXd& x) -> Eigen::VectorXd {
            Eigen::VectorXd v(d);
            for (int c = 0; c < d; ++c) v[c] = amp * weierstrass(x[c], gamma, levels, ps + 19);
            return v;
        };
        f1.depends_on = block_coords(dims, 1, 1);
        p.drift[0] = std::move(f1);
        p.drift_is_affine = false;
    } else if (name == "sawtooth_a") {
        set_affine_chain();
        const double amp = (params.a_amp > 0.0) ? params.a_amp : 0.3;
        const double period = params.sawtooth_period;
        p.diffusion_a = [d, amp, period](double, const Eigen::VectorXd& x) {
            const double z = x[0] / period;
            const double tri = 2.0 * std::abs(z - std::floor(z) - 0.5);
            return ((1.0 + amp * tri) * Eigen::MatrixXd::Identity(d, d)).eval();
        };
        p.a_depends_on = {0};
        p.a_is_constant = false;
    } else {
        throw std::invalid_argument("unknown catalog problem: " + name);
    }

    // sigma: per-point symmetric square root of a (scalar fast path for d = 1).
    const MatrixFn a_fn = p.diffusion_a;
    if (d == 1) {
        p.sigma = [a_fn](double t, const Eigen::VectorXd& x) {
            Eigen::MatrixXd s(1, 1);
            s(0, 0) = std::sqrt(a_fn(t, x)(0, 0));
            return s;
        };
    } else {
        p.sigma = [a_fn](double t, const Eigen::VectorXd& x) {
            return matrix_sqrt_psd(a_fn(t, x));
        };
    }

    // Default data: g picks the deepest block's first coordinate, f = 0.
    const int gcoord = (n - 1) * d;
    p.terminal_g.eval = [gcoord](const Eigen::VectorXd& x) { return x[gcoord]; };
    p.terminal_g.depends_on = {gcoord};
    p.terminal_g.is_polynomial = true;
    p.terminal_g.poly_Q = Eigen::MatrixXd::Zero(dims.nd(), dims.nd());
    p.terminal_g.poly_c = Eigen::VectorXd::Unit(dims.nd(), gcoord);
    p.terminal_g.poly_c0 = 0.0;
    p.source_f.eval = [](double, const Eigen::VectorXd&) { return 0.0; };
    p.source_f.depends_on = {};
    return p;
}

// --- checks ------------------------------------------------------------------

UeReport check_uniform_ellipticity(const ChainProblem& problem, const Box& box, int samples,
                                   std::uint64_t seed, double kappa_cap) {
    WeylSampler sampler(problem.dims.nd() + 1, seed);
    UeReport rep;
    rep.kappa_hat = 1.0;
    rep.min_eigen = std::numeric_limits<double>::infinity();
    rep.max_eigen = 0.0;
    bool positive = true;
    for (int k = 0; k < samples; ++k) {
        const Eigen::VectorXd u = sampler.point(static_cast<std::uint64_t>(k));
        const double t = problem.dims.horizon_T * u[0];
        const Eigen::VectorXd x = box.map_unit(u.segment(1, problem.dims.nd()));
        const Eigen::MatrixXd a = problem.diffusion_a(t, x);
        if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-8)
            throw std::runtime_error("check_uniform_ellipticity: a is not symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
        const double lo = es.eigenvalues().minCoeff();
        const double hi = es.eigenvalues().maxCoeff();
        rep.min_eigen = std::min(rep.min_eigen, lo);
        rep.max_eigen = std::max(rep.max_eigen, hi);
        if (lo <= 0.0) {
            positive = false;
            continue;
        }
        rep.kappa_hat = std::max({rep.kappa_hat, hi, 1.0 / lo});
    }
    rep.pass = positive;
    rep.bounded_violation = rep.kappa_hat > kappa_cap;
    return rep;
}

HormanderReport check_hormander(const ChainProblem& problem, const Box& box, int samples,
                                std::uint64_t seed, double floor) {
    HormanderReport rep;
    rep.floor = floor;
    rep.note = "convex sets E_{i-1} proxied by a singular-value floor";
    if (problem.dims.n == 1) {
        rep.pass = true;
        return rep;
    }
    const int d = problem.dims.d;
    WeylSampler sampler(problem.dims.nd() + 1, seed);
    rep.min_singular_values.assign(static_cast<size_t>(problem.dims.n - 1),
                                   std::numeric_limits<double>::infinity());
    for (int k = 0; k < samples; ++k) {
        const Eigen::VectorXd u = sampler.point(static_cast<std::uint64_t>(k));
        const double t = problem.dims.horizon_T * u[0];
        const Eigen::VectorXd x = box.map_unit(u.segment(1, problem.dims.nd()));
        const Eigen::MatrixXd J = problem.drift_subdiagonal_jacobian(t, x);
        for (int i = 2; i <= problem.dims.n; ++i) {
            const Eigen::MatrixXd blk =
                J.block(static_cast<Eigen::Index>(i - 1) * d,
                        static_cast<Eigen::Index>(i - 2) * d, d, d);
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(blk);
            double& slot = rep.min_singular_values[static_cast<size_t>(i - 2)];
            slot = std::min(slot, svd.singularValues().minCoeff());
        }
    }
    rep.pass = true;
    for (double sv : rep.min_singular_values)
        if (!(sv > floor)) rep.pass = false;
    return rep;
}

DriftRegularityReport check_drift_regularity(const ChainProblem& problem, const Box& box,
                                             int samples, std::uint64_t seed) {
    DriftRegularityReport rep;
    const ChainDims& dims = problem.dims;
    const std::vector<double> times = {0.0, 0.5 * dims.horizon_T, dims.horizon_T};
    for (int i = 1; i <= dims.n; ++i) {
        const int jlo = std::max(i - 1, 1);
        for (int j = jlo; j <= dims.n; ++j) {
            const double exponent =
                (std::max(2 * i - 3, 0) + dims.gamma) / (2.0 * j - 1.0);
            DriftModulus mod;
            mod.level = i;
            mod.variable = j;
            mod.exponent = exponent;
            const double width =
                box.width().segment(static_cast<Eigen::Index>(j - 1) * dims.d, dims.d).minCoeff();
            auto estimate = [&](int nsamp) {
                double worst = 0.0;
                for (double t : times) {
                    const DriftFn& fi = problem.drift[static_cast<size_t>(i - 1)].eval;
                    VectorField field = [&fi, t](const Eigen::VectorXd& x) { return fi(t, x); };
                    const auto events = make_direction_events(dims, j, box, nsamp, seed);
                    const DirectionEstimate est = holder_directional_from_events(
                        field, dims, j, exponent, events, width / 256.0);
                    worst = std::max(worst, est.seminorm);
                }
                return worst;
            };
            mod.seminorm = estimate(samples);
            mod.refined_seminorm = estimate(2 * samples);
            mod.growing = mod.refined_seminorm > 1.10 * std::max(mod.seminorm, 1e-12);
            rep.moduli.push_back(mod);
        }
    }
    rep.all_stable = true;
    for (const auto& m : rep.moduli)
        if (m.growing) rep.all_stable = false;
    return rep;
}

AssumptionReport check_assumptions(const ChainProblem& problem, const Box& box, int samples,
                                   std::uint64_t seed) {
    AssumptionReport rep;
    rep.ue = check_uniform_ellipticity(problem, box, samples, seed);
    rep.hormander = check_hormander(problem, box, samples, seed + 1);
    rep.drift = check_drift_regularity(problem, box, samples, seed + 2);
    return rep;
}

// --- mollification -----------------------------------------------------------

double Mollifier::bump_normalization() {
    static const double norm = [] {
        const QuadratureRule rule = gauss_legendre(128, -1.0, 1.0);
        double mass = 0.0;
        for (int q = 0; q < rule.nodes.size(); ++q) {
            const double z = rule.nodes[q];
            mass += rule.weights[q] * std::exp(-1.0 / (1.0 - z * z));
        }
        return 1.0 / mass;
    }();
    return norm;
}

double Mollifier::bump(double z) const {
    if (std::abs(z) >= 1.0) return 0.0;
    return bump_normalization() * std::exp(-1.0 / (1.0 - z * z));
}

namespace {

struct ConvolutionRule {
    std::vector<double> offsets;  // in x units
    std::vector<double> weights;  // sum exactly 1
};

ConvolutionRule make_convolution_rule(const Mollifier& mol, int quad_points) {
    const QuadratureRule gl = gauss_legendre(quad_points, -1.0, 1.0);
    ConvolutionRule rule;
    double mass = 0.0;
    for (int q = 0; q < gl.nodes.size(); ++q) {
        const double u = gl.nodes[q];  // u = m z
        const double w = gl.weights[q] * mol.bump(u);
        rule.offsets.push_back(u / mol.m);
        rule.weights.push_back(w);
        mass += w;
    }
    // Renormalize so constants are exactly invariant.
    for (double& w : rule.weights) w /= mass;
    return rule;
}

// Convolves fn over the listed coordinates with the tensor rule.
template <class Value, class Fn>
Value convolve_over(const Fn& fn, const std::vector<int>& coords, const ConvolutionRule& rule,
                    const Eigen::VectorXd& x) {
    if (coords.empty()) return fn(x);
    const int q = static_cast<int>(rule.offsets.size());
    Value acc = Value();
    bool first = true;
    Eigen::VectorXd shifted = x;
    for_each_tensor_index(static_cast<int>(coords.size()), q, [&](const std::vector<int>& idx) {
        double w = 1.0;
        for (size_t c = 0; c < coords.size(); ++c) {
            shifted[coords[c]] = x[coords[c]] - rule.offsets[static_cast<size_t>(idx[c])];
            w *= rule.weights[static_cast<size_t>(idx[c])];
        }
        if (first) {
            acc = (w * fn(shifted)).eval();
            first = false;
        } else {
            acc += (w * fn(shifted)).eval();
        }
    });
    for (size_t c = 0; c < coords.size(); ++c) shifted[coords[c]] = x[coords[c]];
    return acc;
}

double convolve_scalar(const std::function<double(const Eigen::VectorXd&)>& fn,
                       const std::vector<int>& coords, const ConvolutionRule& rule,
                       const Eigen::VectorXd& x) {
    if (coords.empty()) return fn(x);
    const int q = static_cast<int>(rule.offsets.size());
    double acc = 0.0;
    Eigen::VectorXd shifted = x;
    for_each_tensor_index(static_cast<int>(coords.size()), q, [&](const std::vector<int>& idx) {
        double w = 1.0;
        for (size_t c = 0; c < coords.size(); ++c) {
            shifted[coords[c]] = x[coords[c]] - rule.offsets[static_cast<size_t>(idx[c])];
            w *= rule.weights[static_cast<size_t>(idx[c])];
        }
        acc += w * fn(shifted);
    });
    return acc;
}

void check_budget(size_t mask, int quad_points, long budget) {
    double cost = 1.0;
    for (size_t c = 0; c < mask; ++c) {
        cost *= quad_points;
        if (cost > static_cast<double>(budget))
            throw std::invalid_argument("mollify: quadrature budget exceeded");
    }
}

}  // namespace

ChainProblem mollify(const ChainProblem& problem, const Mollifier& mollifier,
                     const MollifyOptions& options) {
    if (options.quad_points < 8)
        throw std::invalid_argument("mollify: need quad_points >= 8 per dimension");
    if (mollifier.m < 1) throw std::invalid_argument("mollify: level m must be >= 1");
    const ConvolutionRule rule = make_convolution_rule(mollifier, options.quad_points);

    ChainProblem out = problem;
    out.catalog_id = problem.catalog_id + "+m" + std::to_string(mollifier.m);

    for (size_t i = 0; i < problem.drift.size(); ++i) {
        const DriftComponent& comp = problem.drift[i];
        check_budget(comp.depends_on.size(), options.quad_points, options.budget);
        const DriftFn base = comp.eval;
        const std::vector<int> mask = comp.depends_on;
        out.drift[i].eval = [base, mask, rule](double t, const Eigen::VectorXd& x) {
            auto fn = [&base, t](const Eigen::VectorXd& z) { return base(t, z); };
            return convolve_over<Eigen::VectorXd>(fn, mask, rule, x);
        };
    }

    check_budget(problem.a_depends_on.size(), options.quad_points, options.budget);
    {
        const MatrixFn base = problem.diffusion_a;
        const std::vector<int> mask = problem.a_depends_on;
        out.diffusion_a = [base, mask, rule](double t, const Eigen::VectorXd& x) {
            auto fn = [&base, t](const Eigen::VectorXd& z) { return base(t, z); };
            return convolve_over<Eigen::MatrixXd>(fn, mask, rule, x);
        };
        const MatrixFn am = out.diffusion_a;
        if (problem.dims.d == 1) {
            out.sigma = [am](double t, const Eigen::VectorXd& x) {
                Eigen::MatrixXd s(1, 1);
                s(0, 0) = std::sqrt(am(t, x)(0, 0));
                return s;
            };
        } else {
            out.sigma = [am](double t, const Eigen::VectorXd& x) {
                return matrix_sqrt_psd(am(t, x));
            };
        }
    }

    if (options.mollify_data) {
        check_budget(problem.terminal_g.depends_on.size(), options.quad_points, options.budget);
        check_budget(problem.source_f.depends_on.size(), options.quad_points, options.budget);
        const TerminalFn gbase = problem.terminal_g.eval;
        const std::vector<int> gmask = problem.terminal_g.depends_on;
        out.terminal_g.eval = [gbase, gmask, rule](const Eigen::VectorXd& x) {
            return convolve_scalar(gbase, gmask, rule, x);
        };
        out.terminal_g.is_polynomial = false;
        const SourceFn fbase = problem.source_f.eval;
        const std::vector<int> fmask = problem.source_f.depends_on;
        out.source_f.eval = [fbase, fmask, rule](double t, const Eigen::VectorXd& x) {
            auto fn = [&fbase, t](const Eigen::VectorXd& z) { return fbase(t, z); };
            return convolve_scalar(fn, fmask, rule, x);
        };
    }
    return out;
}

ProblemValidation validate_problem(const ChainProblem& problem, const Box& box, int samples,
                                   std::uint64_t seed) {
    ProblemValidation v;
    const ChainDims& dims = problem.dims;
    WeylSampler sampler(dims.nd() + 1, seed);
    for (int k = 0; k < samples; ++k) {
        const Eigen::VectorXd u = sampler.point(static_cast<std::uint64_t>(k));
        const double t = dims.horizon_T * u[0];
        const Eigen::VectorXd x = box.map_unit(u.segment(1, dims.nd()));
        const Eigen::MatrixXd a = problem.diffusion_a(t, x);
        const Eigen::MatrixXd s = problem.sigma(t, x);
        v.sigma_reconstruction_error =
            std::max(v.sigma_reconstruction_error,
                     (s * s.transpose() - a).cwiseAbs().maxCoeff());
        // STRUCT_F: F_i must not react to blocks 1..i-2.
        for (int i = 3; i <= dims.n; ++i) {
            Eigen::VectorXd xp = x;
            for (int c = 0; c < (i - 2) * dims.d; ++c)
                xp[c] += 0.37 * (1.0 + std::abs(x[c]));
            const Eigen::VectorXd delta =
                problem.drift[static_cast<size_t>(i - 1)].eval(t, xp) -
                problem.drift[static_cast<size_t>(i - 1)].eval(t, x);
            v.structure_violation = std::max(v.structure_violation, delta.cwiseAbs().maxCoeff());
        }
    }
    v.pass = v.sigma_reconstruction_error < 1e-10 && v.structure_violation < 1e-12;
    return v;
}

}  // namespace schauder
