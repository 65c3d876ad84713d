#include "schauder/besov.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace schauder {

namespace {

constexpr double kKernelCut = 8.0;  // truncate Gaussians at this many sigmas

double heat_kernel(double z, double v) {
    return std::exp(-0.5 * z * z / v) / std::sqrt(2.0 * M_PI * v);
}

// d^k/dz^k of the heat kernel, k <= 4.
double heat_kernel_derivative(double z, double v, int k) {
    const double h = heat_kernel(z, v);
    const double u = z / v;
    switch (k) {
        case 0: return h;
        case 1: return -u * h;
        case 2: return (u * u - 1.0 / v) * h;
        case 3: return (-u * u * u + 3.0 * u / v) * h;
        case 4: return (u * u * u * u - 6.0 * u * u / v + 3.0 / (v * v)) * h;
        default: throw std::invalid_argument("heat_kernel_derivative: order > 4");
    }
}

void check_boundary_decay(const Sampled1d& f, bool strict) {
    const double mx = f.sup_norm();
    if (mx == 0.0) return;
    const double edge = std::max(std::abs(f.values[0]), std::abs(f.values[f.size() - 1]));
    if (edge > 1e-6 * mx && strict)
        throw std::runtime_error("heat_convolve: input does not decay at the grid boundary");
}

// Composite Simpson in log v over v_nodes intervals on [v_min, 1], one value
// G(v) per node. Returns per-chunk (two-interval) contributions so callers can
// partition the sum exactly.
std::vector<std::pair<double, double>> log_simpson_chunks(double v_min, int v_nodes,
                                                          double alpha_half,
                                                          const std::function<double(double)>& G) {
    int intervals = v_nodes;
    if (intervals % 2 == 1) ++intervals;
    const double w0 = std::log(v_min), w1 = 0.0;
    const double h = (w1 - w0) / intervals;
    std::vector<double> integrand(static_cast<size_t>(intervals) + 1);
    for (int k = 0; k <= intervals; ++k) {
        const double v = std::exp(w0 + h * k);
        integrand[static_cast<size_t>(k)] = std::pow(v, alpha_half) * G(v);
    }
    std::vector<std::pair<double, double>> chunks;  // (midpoint v, contribution)
    for (int k = 0; k < intervals; k += 2) {
        const double contrib = (h / 3.0) * (integrand[static_cast<size_t>(k)] +
                                            4.0 * integrand[static_cast<size_t>(k) + 1] +
                                            integrand[static_cast<size_t>(k) + 2]);
        const double vmid = std::exp(w0 + h * (k + 1));
        chunks.emplace_back(vmid, contrib);
    }
    return chunks;
}

ThermicNorm assemble_norm(const std::function<double(double)>& G, const ThermicConfig& cfg) {
    ThermicNorm out;
    const double alpha_half = 0.5 * cfg.alpha_tilde;
    const auto chunks = log_simpson_chunks(cfg.v_min, cfg.v_nodes, alpha_half, G);
    double tail = 0.0;
    for (const auto& [v, c] : chunks) tail += c;
    // Analytic continuation on [0, v_min]: G approximately constant there.
    out.endpoint = G(cfg.v_min) * std::pow(cfg.v_min, alpha_half) / alpha_half;
    out.tail = tail + out.endpoint;
    out.lowpass = G(cfg.lowpass_v0);
    out.total = out.lowpass + out.tail;
    if (!(out.total < 1e12)) {
        out.diverged = true;
        out.total = std::numeric_limits<double>::infinity();
    }
    return out;
}

}  // namespace

Sampled1d sample_function(const std::function<double(double)>& f, double lo, double hi, int n) {
    Sampled1d out;
    out.lo = lo;
    out.hi = hi;
    out.values.resize(n);
    const double step = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) out.values[i] = f(lo + step * i);
    return out;
}

Sampled1d heat_convolve(const Sampled1d& f, double v, bool strict) {
    if (!(v > 0.0)) throw std::invalid_argument("heat_convolve: v must be > 0");
    check_boundary_decay(f, strict);
    const double h = f.step();
    const int n = f.size();
    const int reach = std::max(1, static_cast<int>(std::ceil(kKernelCut * std::sqrt(v) / h)));
    // Discrete kernel, renormalized so densities keep unit mass.
    std::vector<double> kernel(static_cast<size_t>(2 * reach) + 1);
    double mass = 0.0;
    for (int j = -reach; j <= reach; ++j) {
        const double w = heat_kernel(j * h, v);
        kernel[static_cast<size_t>(j + reach)] = w;
        mass += w * h;
    }
    for (double& w : kernel) w /= mass;
    Sampled1d out = f;
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        const int jlo = std::max(0, i - reach), jhi = std::min(n - 1, i + reach);
        for (int j = jlo; j <= jhi; ++j)
            acc += f.values[j] * kernel[static_cast<size_t>(i - j + reach)];
        out.values[i] = acc * h;
    }
    return out;
}

Sampled1d heat_convolve_derivative(const Sampled1d& w, double v) {
    if (!(v > 0.0)) throw std::invalid_argument("heat_convolve_derivative: v must be > 0");
    const double h = w.step();
    const int n = w.size();
    const int reach = std::max(1, static_cast<int>(std::ceil(kKernelCut * std::sqrt(v) / h)));
    Sampled1d out = w;
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        const int jlo = std::max(0, i - reach), jhi = std::min(n - 1, i + reach);
        for (int j = jlo; j <= jhi; ++j)
            acc += w.values[j] * heat_kernel_derivative((i - j) * h, v, 1);
        out.values[i] = acc * h;
    }
    return out;
}

ThermicNorm thermic_norm_neg(const Sampled1d& f, const ThermicConfig& cfg) {
    check_boundary_decay(f, cfg.strict);
    const double raw_l1 = f.l1_norm();
    auto G = [&](double v) -> double {
        if (std::sqrt(v) < 2.0 * f.step()) return raw_l1;  // kernel below grid scale
        return heat_convolve(f, v).l1_norm();
    };
    return assemble_norm(G, cfg);
}

namespace {

// ||h_v' * w||_{L1(R)} on an output grid wide enough to hold the convolution;
// the output step follows the kernel scale, the inner sum is truncated at the
// kernel cut. Works uniformly from kernel-below-grid to kernel-beyond-grid.
double divergence_norm_g(const Sampled1d& w, double v) {
    const double step = w.step();
    const double sd = std::sqrt(v);
    if (sd < 2.0 * step) {
        // Kernel below the grid scale: h_v' * w ~ w' in L1.
        double acc = 0.0;
        for (int i = 1; i + 1 < w.size(); ++i)
            acc += std::abs(w.values[i + 1] - w.values[i - 1]) / 2.0;
        return acc;
    }
    const double c = 0.5 * (w.lo + w.hi);
    const double half_out = 0.5 * (w.hi - w.lo) + (kKernelCut + 1.0) * sd;
    const double h_out = std::max(step, sd / 16.0);
    const int m = static_cast<int>(std::ceil(2.0 * half_out / h_out)) + 1;
    const double reach = kKernelCut * sd;
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
        const double z = c - half_out + h_out * i;
        const int jlo = std::max(0, static_cast<int>(std::floor((z - reach - w.lo) / step)));
        const int jhi =
            std::min(w.size() - 1, static_cast<int>(std::ceil((z + reach - w.lo) / step)));
        double conv = 0.0;
        for (int j = jlo; j <= jhi; ++j)
            conv += w.values[j] * heat_kernel_derivative(z - w.coord(j), v, 1);
        acc += std::abs(conv) * step * h_out;
    }
    return acc;
}

}  // namespace

ThermicNorm thermic_norm_neg_div(const Sampled1d& w, const ThermicConfig& cfg) {
    auto G = [&](double v) { return divergence_norm_g(w, v); };
    // Concentrated inputs keep structure far below the nominal v floor; extend
    // the grid down to the sampling scale so the cancellation regime is seen.
    ThermicConfig eff = cfg;
    const double grid_floor = 4.0 * w.step() * w.step();
    eff.v_min = std::min(cfg.v_min, grid_floor);
    return assemble_norm(G, eff);
}

ThermicSplit thermic_tail_split_div(const Sampled1d& w, const ThermicConfig& cfg,
                                    double v_split) {
    auto G = [&](double v) { return divergence_norm_g(w, v); };
    const auto chunks = log_simpson_chunks(cfg.v_min, cfg.v_nodes, 0.5 * cfg.alpha_tilde, G);
    ThermicSplit split;
    split.below = G(cfg.v_min) * std::pow(cfg.v_min, 0.5 * cfg.alpha_tilde) /
                  (0.5 * cfg.alpha_tilde);
    for (const auto& [v, c] : chunks) {
        if (v <= v_split)
            split.below += c;
        else
            split.above += c;
    }
    return split;
}

double besov_split_exponent(int level_i, double gamma) {
    const double q = 2.0 * level_i - 3.0;
    return q * (2.0 * level_i - 1.0) / (q - gamma);
}

double holder_norm_scalar(const Sampled1d& f, double alpha_tilde) {
    if (!(alpha_tilde > 0.0 && alpha_tilde < 3.0) ||
        std::abs(alpha_tilde - std::round(alpha_tilde)) < 1e-12)
        throw std::invalid_argument("holder_norm_scalar: alpha must be non-integer in (0,3)");
    const int k = static_cast<int>(std::floor(alpha_tilde));
    const double beta = alpha_tilde - k;
    const double h = f.step();
    const int n = f.size();

    std::vector<Eigen::VectorXd> derivs;  // orders 0..k on the interior
    derivs.push_back(f.values);
    if (k >= 1) {
        Eigen::VectorXd d1 = Eigen::VectorXd::Zero(n);
        for (int i = 1; i + 1 < n; ++i) d1[i] = (f.values[i + 1] - f.values[i - 1]) / (2.0 * h);
        derivs.push_back(d1);
    }
    if (k >= 2) {
        Eigen::VectorXd d2 = Eigen::VectorXd::Zero(n);
        for (int i = 1; i + 1 < n; ++i)
            d2[i] = (f.values[i + 1] - 2.0 * f.values[i] + f.values[i - 1]) / (h * h);
        derivs.push_back(d2);
    }

    double norm = f.sup_norm();
    for (int order = 1; order <= k; ++order) {
        double sup = 0.0;
        for (int i = order; i + order < n; ++i)
            sup = std::max(sup, std::abs(derivs[static_cast<size_t>(order)][i]));
        norm += sup;
    }
    const Eigen::VectorXd& top = derivs[static_cast<size_t>(k)];
    const int margin = std::max(1, k);
    const int stride = std::max(1, n / 512);
    double semi = 0.0;
    for (int i = margin; i + margin < n; i += stride)
        for (int j = i + 1; j + margin < n; j += stride) {
            const double gap = (j - i) * h;
            if (gap < 4.0 * h) continue;
            semi = std::max(semi, std::abs(top[j] - top[i]) / std::pow(gap, beta));
        }
    return norm + semi;
}

PsiProfile psi_besov_profile(const ChainProblem& problem, int level_i,
                             const std::vector<int>& theta, double t, const Eigen::VectorXd& x,
                             const std::vector<double>& s_values, const ThermicConfig& cfg_in,
                             int flow_steps) {
    const ChainDims& dims = problem.dims;
    if (dims.d != 1)
        throw std::invalid_argument("psi_besov_profile: slice surrogate implemented for d = 1");
    if (level_i < 2 || level_i > dims.n)
        throw std::invalid_argument("psi_besov_profile: level must be in [2, n]");

    FrozenProxy proxy(problem, t, x, flow_steps);
    const std::vector<int> slots = derivative_slots(theta, dims);
    ThermicConfig cfg = cfg_in;
    cfg.alpha_tilde = (2.0 + dims.gamma) / (2.0 * level_i - 1.0);

    PsiProfile profile;
    double sum_lx = 0, sum_ly = 0, sum_lxx = 0, sum_lxy = 0;
    int nonzero = 0;
    for (double s : s_values) {
        const FrozenProxy::GaussianSlice slice = proxy.slice(t, s);
        const Eigen::VectorXd theta_s = slice.mean_base;
        const int ci = level_i - 1;  // coordinate of block i for d = 1
        const double sigma_i = std::sqrt(slice.covariance(ci, ci));
        const int npts = 1025;
        const double half = 12.0 * sigma_i;
        Sampled1d w;
        w.lo = theta_s[ci] - half;
        w.hi = theta_s[ci] + half;
        w.values.resize(npts);
        const DriftFn& Fi = problem.drift[static_cast<size_t>(level_i - 1)].eval;
        const Eigen::VectorXd Fi_theta = Fi(s, theta_s);
        const Eigen::MatrixXd J = problem.drift_subdiagonal_jacobian(s, theta_s);
        Eigen::VectorXd y = theta_s;
        for (int q = 0; q < npts; ++q) {
            y[ci] = w.lo + (w.hi - w.lo) * q / (npts - 1);
            const Eigen::VectorXd delta_block = (y - theta_s).segment(ci - 1, 1);
            const double taylor =
                J.block(ci, ci - 1, 1, 1)(0, 0) * delta_block[0];
            const double delta = (Fi(s, y) - Fi_theta)[0] - taylor;
            const double dp =
                gaussian_derivative_tensor(slice, x, y, slots, dims.d)[0];
            w.values[q] = dp * delta;
        }
        PsiProfilePoint pt;
        pt.s = s;
        double env = 1.0;
        for (int j = 1; j <= dims.n; ++j) {
            if (j == level_i) continue;
            env *= std::sqrt(2.0 * M_PI * std::pow(s - t, 2.0 * j - 1.0));
        }
        pt.envelope_volume = env;
        if (w.sup_norm() == 0.0) {
            pt.raw_norm = 0.0;
            pt.norm = 0.0;
        } else {
            pt.raw_norm = thermic_norm_neg_div(w, cfg).total;
            pt.norm = env * pt.raw_norm;
            const double lx = std::log(s - t), ly = std::log(pt.norm);
            sum_lx += lx;
            sum_ly += ly;
            sum_lxx += lx * lx;
            sum_lxy += lx * ly;
            ++nonzero;
        }
        profile.points.push_back(pt);
    }
    double theta_weight = 0.0;
    for (int j = 0; j < dims.n; ++j)
        theta_weight += theta[static_cast<size_t>(j)] * (j + 0.5);
    profile.predicted_slope = -(theta_weight - 0.5 * dims.gamma);
    profile.saturated_slope = -(theta_weight - dims.gamma);
    profile.all_zero = (nonzero == 0);
    if (nonzero >= 2) {
        const double denom = nonzero * sum_lxx - sum_lx * sum_lx;
        profile.slope = (nonzero * sum_lxy - sum_lx * sum_ly) / denom;
    }
    return profile;
}

}  // namespace schauder
