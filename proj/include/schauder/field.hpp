#pragma once

// Space-time grid representation of a scalar function: tensor spatial grid
// with per-coordinate (anisotropic) steps, multilinear interpolation in space
// and linear interpolation in time, plus grid finite-difference derivative
// fields and the CSV / binary exchange formats.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "schauder/anisotropy.hpp"

namespace schauder {

class SampledField {
public:
    SampledField() = default;
    SampledField(std::vector<double> time_nodes, Eigen::VectorXd x_lo, Eigen::VectorXd x_hi,
                 std::vector<int> points_per_coord);

    int time_points() const { return static_cast<int>(times_.size()); }
    const std::vector<double>& times() const { return times_; }
    const Eigen::VectorXd& x_lo() const { return lo_; }
    const Eigen::VectorXd& x_hi() const { return hi_; }
    const std::vector<int>& points() const { return pts_; }
    int coords() const { return static_cast<int>(pts_.size()); }
    long space_size() const { return space_size_; }
    double spatial_step(int coord) const { return steps_[static_cast<size_t>(coord)]; }

    double& at(int ti, long flat) { return values_[static_cast<size_t>(ti) * space_size_ + flat]; }
    double at(int ti, long flat) const {
        return values_[static_cast<size_t>(ti) * space_size_ + flat];
    }
    long flat_index(const std::vector<int>& idx) const;
    long stride(int coord) const { return strides_[static_cast<size_t>(coord)]; }
    Eigen::VectorXd coordinates(const std::vector<int>& idx) const;
    Eigen::VectorXd coordinates_flat(long flat) const;

    // Multilinear in space, linear in time; queries outside the box clamp to
    // the boundary and bump *clamped when provided.
    double value(double t, const Eigen::VectorXd& x, long* clamped = nullptr) const;

    // Same interpolation but extended linearly beyond the box from the edge
    // cells (exact on affine data); used when a field feeds a terminal
    // condition whose Gaussian integrals reach past the grid.
    double value_linear_extension(double t, const Eigen::VectorXd& x) const;

    // Grid central differences (one-sided at the boundary) along `coord`.
    SampledField derivative(int coord) const;
    SampledField second_derivative(int coord_a, int coord_b) const;

    // Interior test used by perturbation_residual: at least `margin` cells
    // away from every spatial face.
    bool strictly_interior(const Eigen::VectorXd& x, int margin = 1) const;

    double max_abs() const;
    double max_abs_diff(const SampledField& other) const;

    void save_csv(const std::string& path) const;       // columns: t, x_1..x_nd, u
    void save_binary(const std::string& path) const;    // little-endian f64 grid
    static SampledField load_binary(const std::string& path);

    std::vector<double>& raw_values() { return values_; }
    const std::vector<double>& raw_values() const { return values_; }

private:
    std::vector<double> times_;
    Eigen::VectorXd lo_, hi_;
    std::vector<int> pts_;
    std::vector<double> steps_;
    std::vector<long> strides_;
    long space_size_ = 0;
    std::vector<double> values_;
};

}  // namespace schauder
