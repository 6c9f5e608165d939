#pragma once

// Uniform radial meshes on B(0,R) in d = 1, 2, 3 with quadrature weights that
// carry the r^(d-1) measure, and the conservative radial Laplacian that is
// paired with those weights.
//
// Volume convention: |B(0,r)| = omega_d r^d with omega_1 = 2, omega_2 = pi,
// omega_3 = 4 pi / 3. For d = 1 the domain is (-R, R); weights already count
// both halves.

#include <cmath>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "cqtf/errors.hpp"

namespace cqtf {

inline double unit_ball_volume(int dim) {
    switch (dim) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi / 3.0;
    default: throw validation_error("dimension must be 1, 2 or 3, got " + std::to_string(dim));
    }
}

/// Surface measure of the sphere of radius r, i.e. d omega_d r^(d-1).
inline double sphere_area(int dim, double r) {
    return dim * unit_ball_volume(dim) * std::pow(r, dim - 1);
}

class RadialGrid {
public:
    static constexpr int min_cells = 16;

    RadialGrid(int dim, double radius, int n) : dim_(dim), radius_(radius), n_(n) {
        if (dim < 1 || dim > 3)
            throw validation_error("dimension must be 1, 2 or 3, got " + std::to_string(dim));
        if (!(radius > 0.0) || !std::isfinite(radius))
            throw validation_error("radius must be positive and finite");
        if (n < min_cells)
            throw validation_error("grid needs n >= 16 cells, got " + std::to_string(n));

        h_ = radius / n;
        const double omega = unit_ball_volume(dim);
        nodes_.resize(n + 1);
        weights_.resize(n + 1);
        faces_.resize(n);
        for (int i = 0; i <= n; ++i) nodes_[i] = i * h_;

        // Shell volumes of the dual cells [r_i - h/2, r_i + h/2] clipped to
        // [0, R]. For d = 1, 2 these are exactly the trapezoid weights of the
        // radial density (up to the origin cell for d = 2); for every d they
        // telescope to omega_d R^d.
        auto ball = [&](double r) { return omega * std::pow(r, dim); };
        for (int i = 0; i <= n; ++i) {
            const double lo = (i == 0) ? 0.0 : (i - 0.5) * h_;
            const double hi = (i == n) ? radius : (i + 0.5) * h_;
            weights_[i] = ball(hi) - ball(lo);
        }
        for (int i = 0; i < n; ++i) faces_[i] = sphere_area(dim, (i + 0.5) * h_);

        lap_lo_.assign(n + 1, 0.0);
        lap_up_.assign(n + 1, 0.0);
        for (int i = 0; i < n; ++i) {
            lap_up_[i] = faces_[i] / (h_ * weights_[i]);
            if (i > 0) lap_lo_[i] = faces_[i - 1] / (h_ * weights_[i]);
        }
    }

    int dim() const noexcept { return dim_; }
    double radius() const noexcept { return radius_; }
    int cells() const noexcept { return n_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    double spacing() const noexcept { return h_; }
    double total_volume() const { return unit_ball_volume(dim_) * std::pow(radius_, dim_); }

    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> weights() const noexcept { return weights_; }
    /// Sphere area at the cell midpoints r_{i+1/2}, i = 0..n-1.
    std::span<const double> faces() const noexcept { return faces_; }

    /// Laplacian stencil: (Lap u)_i = lo_i u_{i-1} + up_i u_{i+1} - (lo_i + up_i) u_i.
    /// lo_0 = 0 encodes the symmetry condition at the origin.
    std::span<const double> laplacian_lower() const noexcept { return lap_lo_; }
    std::span<const double> laplacian_upper() const noexcept { return lap_up_; }

private:
    int dim_;
    double radius_;
    int n_;
    double h_ = 0.0;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> faces_;
    std::vector<double> lap_lo_;
    std::vector<double> lap_up_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

inline GridPtr make_radial_grid(int dim, double radius, int n) {
    return std::make_shared<const RadialGrid>(dim, radius, n);
}

/// Radial profile sampled at the grid nodes.
struct Field {
    GridPtr grid;
    std::vector<double> values;

    Field() = default;
    Field(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
        if (!grid) throw validation_error("field without grid");
        if (values.size() != grid->size())
            throw validation_error("field size does not match grid");
    }

    static Field zeros(GridPtr g) {
        const auto n = g->size();
        return Field(std::move(g), std::vector<double>(n, 0.0));
    }

    template <class F>
    static Field sample(GridPtr g, F&& f) {
        std::vector<double> v(g->size());
        auto r = g->nodes();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(r[i]);
        return Field(std::move(g), std::move(v));
    }

    std::size_t size() const noexcept { return values.size(); }
    bool dirichlet() const noexcept { return !values.empty() && values.back() == 0.0; }
    bool finite() const noexcept {
        for (double x : values)
            if (!std::isfinite(x)) return false;
        return true;
    }
    bool non_negative() const noexcept {
        for (double x : values)
            if (x < 0.0) return false;
        return true;
    }
};

inline double integrate(const RadialGrid& grid, std::span<const double> f) {
    auto w = grid.weights();
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i];
    return s;
}

/// Weighted inner product sum_i w_i a_i b_i.
inline double inner(const Field& a, const Field& b) {
    auto w = a.grid->weights();
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * a.values[i] * b.values[i];
    return s;
}

/// sum_i w_i u_i^p for p in {2, 4, 6}.
inline double quadrature_power(const Field& field, int p) {
    if (p != 2 && p != 4 && p != 6)
        throw validation_error("quadrature_power supports p = 2, 4, 6 only");
    auto w = field.grid->weights();
    double s = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) {
        const double u2 = field.values[i] * field.values[i];
        const double up = (p == 2) ? u2 : (p == 4) ? u2 * u2 : u2 * u2 * u2;
        s += w[i] * up;
    }
    return s;
}

inline double mass(const Field& field) { return quadrature_power(field, 2); }

inline void apply_laplacian(const RadialGrid& grid, std::span<const double> u, std::span<double> out) {
    auto lo = grid.laplacian_lower();
    auto up = grid.laplacian_upper();
    const std::size_t n = grid.cells();
    for (std::size_t i = 0; i < n; ++i) {
        const double left = (i == 0) ? 0.0 : lo[i] * (u[i - 1] - u[i]);
        out[i] = left + up[i] * (u[i + 1] - u[i]);
    }
    out[n] = 0.0;
}

inline Field radial_laplacian(const Field& field) {
    Field out = Field::zeros(field.grid);
    apply_laplacian(*field.grid, field.values, out.values);
    return out;
}

/// Midpoint-rule quadrature of |u'|^2 using forward differences; equals
/// -<u, Lap u> exactly (up to rounding) whenever u_n = 0.
inline double gradient_energy(const Field& field) {
    const auto& g = *field.grid;
    auto a = g.faces();
    const double h = g.spacing();
    double s = 0.0;
    for (int i = 0; i < g.cells(); ++i) {
        const double du = field.values[i + 1] - field.values[i];
        s += a[i] * du * du;
    }
    return s / h;
}

/// One-sided second-order derivative u'(R).
inline double outer_slope(const Field& field) {
    const auto& u = field.values;
    const std::size_t n = u.size() - 1;
    return (3.0 * u[n] - 4.0 * u[n - 1] + u[n - 2]) / (2.0 * field.grid->spacing());
}

} // namespace cqtf
