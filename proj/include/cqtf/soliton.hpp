#pragma once

// Radial soliton Q_d of  -(d/2) Lap u + ((4-d)/2) u = u^3  by shooting on u(0),
// and an audit of the Gagliardo-Nirenberg-Hoelder quotient on trial fields.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cqtf/radial_grid.hpp"

namespace cqtf {

struct SolitonOptions {
    double r_max = 0.0;   ///< 0 picks a dimension-dependent default
    double step = 5e-4;   ///< RK4 step, also the grid spacing of the profile
    double u0_max = 50.0; ///< upper end of the bracket search for u(0)
    int max_bisections = 200;
};

struct SolitonResult {
    int dim = 1;
    Field profile;
    std::vector<double> slope;  ///< u'(r) from the integrator, same nodes as profile
    double shoot_parameter = 0.0;
    double mass = 0.0;          ///< int Q^2
    double gradient = 0.0;      ///< int |Q'|^2
    double quartic = 0.0;       ///< int Q^4
    /// Relative residuals of int|Q'|^2 = int Q^2 = 1/2 int Q^4:
    /// {|K - M|, |M - Q4/2|, |K - Q4/2|} / M.
    std::array<double, 3> identity_residuals{};
};

namespace detail {

struct SolitonOde {
    int dim;
    double linear;     // (4-d)/d
    double cubic;      // 2/d

    explicit SolitonOde(int d) : dim(d), linear((4.0 - d) / d), cubic(2.0 / d) {}

    // (u, v = u')' at radius r; at r = 0 the (d-1)/r v term is replaced by
    // its limit (d-1) u''(0).
    std::array<double, 2> operator()(double r, double u, double v) const {
        const double source = linear * u - cubic * u * u * u;
        if (r == 0.0) return {v, source / dim};
        return {v, source - (dim - 1) / r * v};
    }
};

enum class ShotOutcome { undershoot, overshoot, undecided };

/// Integrates from the origin; if `u`/`v` are non-null they receive the nodal
/// values. Stops at the first sign change of u (overshoot) or the first
/// positive slope (undershoot).
inline ShotOutcome shoot(const SolitonOde& ode, double u0, double h, int steps, std::vector<double>* u_out,
                         std::vector<double>* v_out) {
    double u = u0, v = 0.0, r = 0.0;
    if (u_out) { u_out->assign(steps + 1, 0.0); (*u_out)[0] = u0; }
    if (v_out) v_out->assign(steps + 1, 0.0);
    for (int i = 0; i < steps; ++i) {
        const auto k1 = ode(r, u, v);
        const auto k2 = ode(r + 0.5 * h, u + 0.5 * h * k1[0], v + 0.5 * h * k1[1]);
        const auto k3 = ode(r + 0.5 * h, u + 0.5 * h * k2[0], v + 0.5 * h * k2[1]);
        const auto k4 = ode(r + h, u + h * k3[0], v + h * k3[1]);
        u += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
        v += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
        r = (i + 1) * h;
        if (u < 0.0) return ShotOutcome::overshoot;
        if (v > 0.0) return ShotOutcome::undershoot;
        if (u_out) (*u_out)[i + 1] = u;
        if (v_out) (*v_out)[i + 1] = v;
    }
    return ShotOutcome::undecided;
}

} // namespace detail

inline SolitonResult q_soliton(int dim, SolitonOptions opts = {}) {
    if (dim < 1 || dim > 3) throw validation_error("soliton dimension must be 1, 2 or 3");
    if (opts.r_max <= 0.0) opts.r_max = (dim == 1) ? 20.0 : (dim == 2) ? 30.0 : 50.0;
    if (!(opts.step > 0.0) || opts.step >= opts.r_max / RadialGrid::min_cells)
        throw validation_error("soliton step must be positive and resolve r_max");

    const int steps = static_cast<int>(std::lround(opts.r_max / opts.step));
    const double h = opts.r_max / steps;
    const detail::SolitonOde ode(dim);

    // Below sqrt((4-d)/2) the profile starts convex and turns up: undershoot.
    const double turning = std::sqrt((4.0 - dim) / 2.0);
    double lo = 0.5 * turning;
    double hi = std::min(2.0 * turning, opts.u0_max);
    if (detail::shoot(ode, lo, h, steps, nullptr, nullptr) != detail::ShotOutcome::undershoot)
        throw convergence_error("soliton shooting: lower bracket does not undershoot");
    while (detail::shoot(ode, hi, h, steps, nullptr, nullptr) != detail::ShotOutcome::overshoot) {
        if (hi >= opts.u0_max)
            throw convergence_error("soliton shooting: no overshooting u(0) up to " + show(opts.u0_max));
        hi = std::min(1.5 * hi, opts.u0_max);
    }

    for (int it = 0; it < opts.max_bisections; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const auto outcome = detail::shoot(ode, mid, h, steps, nullptr, nullptr);
        if (outcome == detail::ShotOutcome::overshoot)
            hi = mid;
        else
            lo = mid;
    }

    // The undershooting side stays positive; beyond the turning point the
    // tail is rounding noise and is dropped.
    SolitonResult res;
    res.dim = dim;
    res.shoot_parameter = lo;
    auto grid = make_radial_grid(dim, steps * h, steps);
    std::vector<double> u, v;
    detail::shoot(ode, lo, h, steps, &u, &v);
    u.back() = 0.0;
    res.profile = Field(grid, std::move(u));
    res.slope = std::move(v);

    auto w = grid->weights();
    for (std::size_t i = 0; i < res.slope.size(); ++i) {
        const double q2 = res.profile.values[i] * res.profile.values[i];
        res.mass += w[i] * q2;
        res.quartic += w[i] * q2 * q2;
        res.gradient += w[i] * res.slope[i] * res.slope[i];
    }
    const double m = res.mass;
    res.identity_residuals = {std::abs(res.gradient - m) / m, std::abs(m - 0.5 * res.quartic) / m,
                              std::abs(res.gradient - 0.5 * res.quartic) / m};
    return res;
}

struct GnhAudit {
    std::vector<double> quotients;
    double worst = 0.0;
    std::size_t worst_index = 0;
};

/// int u^4 / [ (int u^2)^(1/2) (int u^6)^(1/4) (int |u'|^2)^(3/2) ].
inline double gnh_quotient(const Field& u) {
    if (u.grid->dim() != 3) throw validation_error("GNH audit is defined for d = 3 fields");
    const double m = quadrature_power(u, 2);
    const double q4 = quadrature_power(u, 4);
    const double q6 = quadrature_power(u, 6);
    const double k = gradient_energy(u);
    if (!(m > 0.0) || !(q4 > 0.0) || !(q6 > 0.0) || !(k > 0.0))
        throw validation_error("degenerate GNH trial: a norm vanishes");
    return q4 / (std::sqrt(m) * std::pow(q6, 0.25) * std::pow(k, 1.5));
}

inline GnhAudit audit_gnh(const std::vector<Field>& trials) {
    if (trials.empty()) throw validation_error("GNH audit needs at least one trial");
    GnhAudit a;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const double q = gnh_quotient(trials[i]);
        a.quotients.push_back(q);
        if (q > a.worst) {
            a.worst = q;
            a.worst_index = i;
        }
    }
    return a;
}

/// Seeded unit-mass radial trial family on a d = 3 grid: Gaussians, sech
/// profiles and compact (1 - (r/a)^2)^2 bumps with random scales. Uses only
/// the raw 64-bit engine output so the family is identical across standard
/// libraries.
inline std::vector<Field> gnh_trial_family(GridPtr grid, std::uint64_t seed, int count) {
    if (grid->dim() != 3) throw validation_error("GNH trials live on d = 3 grids");
    std::mt19937_64 gen(seed);
    auto unit = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    const double R = grid->radius();
    std::vector<Field> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        const int kind = static_cast<int>(gen() % 3);
        const double scale = R * (0.05 + 0.25 * unit());
        Field f = Field::sample(grid, [&](double r) {
            const double x = r / scale;
            switch (kind) {
            case 0: return std::exp(-0.5 * x * x);
            case 1: return 1.0 / std::cosh(x);
            default: return x < 1.0 ? (1.0 - x * x) * (1.0 - x * x) : 0.0;
            }
        });
        f.values.back() = 0.0;
        const double s = 1.0 / std::sqrt(mass(f));
        for (double& x : f.values) x *= s;
        out.push_back(std::move(f));
    }
    return out;
}

} // namespace cqtf
