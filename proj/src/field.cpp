#include "schauder/field.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace schauder {

SampledField::SampledField(std::vector<double> time_nodes, Eigen::VectorXd x_lo,
                           Eigen::VectorXd x_hi, std::vector<int> points_per_coord)
    : times_(std::move(time_nodes)),
      lo_(std::move(x_lo)),
      hi_(std::move(x_hi)),
      pts_(std::move(points_per_coord)) {
    if (times_.empty()) throw std::invalid_argument("SampledField: empty time grid");
    for (size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1]))
            throw std::invalid_argument("SampledField: time grid must increase");
    if (lo_.size() != hi_.size() || static_cast<size_t>(lo_.size()) != pts_.size())
        throw std::invalid_argument("SampledField: inconsistent spatial grid spec");
    steps_.resize(pts_.size());
    strides_.resize(pts_.size());
    space_size_ = 1;
    for (int c = static_cast<int>(pts_.size()) - 1; c >= 0; --c) {
        if (pts_[static_cast<size_t>(c)] < 2)
            throw std::invalid_argument("SampledField: need >= 2 points per coordinate");
        strides_[static_cast<size_t>(c)] = space_size_;
        space_size_ *= pts_[static_cast<size_t>(c)];
        steps_[static_cast<size_t>(c)] =
            (hi_[c] - lo_[c]) / (pts_[static_cast<size_t>(c)] - 1);
    }
    values_.assign(times_.size() * static_cast<size_t>(space_size_), 0.0);
}

long SampledField::flat_index(const std::vector<int>& idx) const {
    long flat = 0;
    for (size_t c = 0; c < pts_.size(); ++c) flat += strides_[c] * idx[c];
    return flat;
}

Eigen::VectorXd SampledField::coordinates(const std::vector<int>& idx) const {
    Eigen::VectorXd x(coords());
    for (int c = 0; c < coords(); ++c)
        x[c] = lo_[c] + steps_[static_cast<size_t>(c)] * idx[static_cast<size_t>(c)];
    return x;
}

Eigen::VectorXd SampledField::coordinates_flat(long flat) const {
    Eigen::VectorXd x(coords());
    for (int c = 0; c < coords(); ++c) {
        const long i = (flat / strides_[static_cast<size_t>(c)]) % pts_[static_cast<size_t>(c)];
        x[c] = lo_[c] + steps_[static_cast<size_t>(c)] * static_cast<double>(i);
    }
    return x;
}

double SampledField::value(double t, const Eigen::VectorXd& x, long* clamped) const {
    // time bracket
    int ti = 0;
    double tw = 0.0;
    if (times_.size() == 1 || t <= times_.front()) {
        ti = 0;
        tw = 0.0;
    } else if (t >= times_.back()) {
        ti = static_cast<int>(times_.size()) - 2;
        tw = 1.0;
        if (times_.size() == 1) ti = 0;
    } else {
        while (ti + 1 < static_cast<int>(times_.size()) - 1 && times_[static_cast<size_t>(ti) + 1] <= t)
            ++ti;
        tw = (t - times_[static_cast<size_t>(ti)]) /
             (times_[static_cast<size_t>(ti) + 1] - times_[static_cast<size_t>(ti)]);
    }

    const int nc = coords();
    std::vector<int> base(static_cast<size_t>(nc));
    std::vector<double> frac(static_cast<size_t>(nc));
    for (int c = 0; c < nc; ++c) {
        double pos = (x[c] - lo_[c]) / steps_[static_cast<size_t>(c)];
        const double max_pos = static_cast<double>(pts_[static_cast<size_t>(c)] - 1);
        if (pos < 0.0 || pos > max_pos) {
            if (clamped) ++(*clamped);
            pos = std::min(std::max(pos, 0.0), max_pos);
        }
        int b = static_cast<int>(pos);
        if (b >= pts_[static_cast<size_t>(c)] - 1) b = pts_[static_cast<size_t>(c)] - 2;
        if (b < 0) b = 0;
        base[static_cast<size_t>(c)] = b;
        frac[static_cast<size_t>(c)] = pos - b;
    }

    auto corner_value = [&](int time_index) {
        double acc = 0.0;
        const int corners = 1 << nc;
        for (int mask = 0; mask < corners; ++mask) {
            double w = 1.0;
            long flat = 0;
            for (int c = 0; c < nc; ++c) {
                const bool hi_side = (mask >> c) & 1;
                w *= hi_side ? frac[static_cast<size_t>(c)] : (1.0 - frac[static_cast<size_t>(c)]);
                flat += strides_[static_cast<size_t>(c)] *
                        (base[static_cast<size_t>(c)] + (hi_side ? 1 : 0));
            }
            if (w != 0.0) acc += w * at(time_index, flat);
        }
        return acc;
    };

    if (times_.size() == 1) return corner_value(0);
    const double v0 = corner_value(ti);
    const double v1 = corner_value(ti + 1);
    return (1.0 - tw) * v0 + tw * v1;
}

namespace {

// offset of +-1 along coord at a flat index, clamped to the axis.
long shifted_flat(long flat, long stride, int extent, int delta) {
    const long i = (flat / stride) % extent;
    long j = i + delta;
    if (j < 0) j = 0;
    if (j >= extent) j = extent - 1;
    return flat + (j - i) * stride;
}

}  // namespace

SampledField SampledField::derivative(int coord) const {
    SampledField out = *this;
    const long stride = strides_[static_cast<size_t>(coord)];
    const int extent = pts_[static_cast<size_t>(coord)];
    const double h = steps_[static_cast<size_t>(coord)];
    for (int ti = 0; ti < time_points(); ++ti)
        for (long f = 0; f < space_size_; ++f) {
            const long i = (f / stride) % extent;
            const long fp = shifted_flat(f, stride, extent, +1);
            const long fm = shifted_flat(f, stride, extent, -1);
            double v;
            if (i == 0)
                v = (at(ti, fp) - at(ti, f)) / h;
            else if (i == extent - 1)
                v = (at(ti, f) - at(ti, fm)) / h;
            else
                v = (at(ti, fp) - at(ti, fm)) / (2.0 * h);
            out.at(ti, f) = v;
        }
    return out;
}

SampledField SampledField::second_derivative(int coord_a, int coord_b) const {
    if (coord_a != coord_b) return derivative(coord_a).derivative(coord_b);
    SampledField out = *this;
    const long stride = strides_[static_cast<size_t>(coord_a)];
    const int extent = pts_[static_cast<size_t>(coord_a)];
    const double h = steps_[static_cast<size_t>(coord_a)];
    for (int ti = 0; ti < time_points(); ++ti)
        for (long f = 0; f < space_size_; ++f) {
            const long i = (f / stride) % extent;
            long fc = f;
            if (i == 0) fc = shifted_flat(f, stride, extent, +1);
            if (i == extent - 1) fc = shifted_flat(f, stride, extent, -1);
            const long fp = shifted_flat(fc, stride, extent, +1);
            const long fm = shifted_flat(fc, stride, extent, -1);
            out.at(ti, f) = (at(ti, fp) - 2.0 * at(ti, fc) + at(ti, fm)) / (h * h);
        }
    return out;
}

bool SampledField::strictly_interior(const Eigen::VectorXd& x, int margin) const {
    for (int c = 0; c < coords(); ++c) {
        const double pad = margin * steps_[static_cast<size_t>(c)];
        if (x[c] < lo_[c] + pad || x[c] > hi_[c] - pad) return false;
    }
    return true;
}

double SampledField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double SampledField::max_abs_diff(const SampledField& other) const {
    if (values_.size() != other.values_.size())
        throw std::invalid_argument("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (size_t i = 0; i < values_.size(); ++i)
        m = std::max(m, std::abs(values_[i] - other.values_[i]));
    return m;
}

void SampledField::save_csv(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("save_csv: cannot open " + path);
    std::fprintf(f, "t");
    for (int c = 0; c < coords(); ++c) std::fprintf(f, ",x%d", c + 1);
    std::fprintf(f, ",u\n");
    for (int ti = 0; ti < time_points(); ++ti)
        for (long flat = 0; flat < space_size_; ++flat) {
            const Eigen::VectorXd x = coordinates_flat(flat);
            std::fprintf(f, "%.17g", times_[static_cast<size_t>(ti)]);
            for (int c = 0; c < coords(); ++c) std::fprintf(f, ",%.17g", x[c]);
            std::fprintf(f, ",%.17g\n", at(ti, flat));
        }
    std::fclose(f);
}

void SampledField::save_binary(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_binary: cannot open " + path);
    const char magic[8] = {'S', 'C', 'H', 'G', 'R', 'I', 'D', '1'};
    out.write(magic, 8);
    auto put_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto put_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    put_u32(static_cast<std::uint32_t>(coords()));
    put_u32(static_cast<std::uint32_t>(time_points()));
    for (int c = 0; c < coords(); ++c) put_u32(static_cast<std::uint32_t>(pts_[static_cast<size_t>(c)]));
    for (double t : times_) put_f64(t);
    for (int c = 0; c < coords(); ++c) put_f64(lo_[c]);
    for (int c = 0; c < coords(); ++c) put_f64(hi_[c]);
    for (double v : values_) put_f64(v);
}

SampledField SampledField::load_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_binary: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::memcmp(magic, "SCHGRID1", 8) != 0)
        throw std::runtime_error("load_binary: bad magic in " + path);
    auto get_u32 = [&] {
        std::uint32_t v;
        in.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    auto get_f64 = [&] {
        double v;
        in.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    const int nc = static_cast<int>(get_u32());
    const int nt = static_cast<int>(get_u32());
    std::vector<int> pts(static_cast<size_t>(nc));
    for (int c = 0; c < nc; ++c) pts[static_cast<size_t>(c)] = static_cast<int>(get_u32());
    std::vector<double> times(static_cast<size_t>(nt));
    for (int k = 0; k < nt; ++k) times[static_cast<size_t>(k)] = get_f64();
    Eigen::VectorXd lo(nc), hi(nc);
    for (int c = 0; c < nc; ++c) lo[c] = get_f64();
    for (int c = 0; c < nc; ++c) hi[c] = get_f64();
    SampledField field(times, lo, hi, pts);
    for (double& v : field.values_) v = get_f64();
    if (!in) throw std::runtime_error("load_binary: truncated file " + path);
    return field;
}

}  // namespace schauder
