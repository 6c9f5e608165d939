#pragma once

// Parameter sweeps towards the thermodynamic limit (fixed domain, growing L)
// and the Thomas-Fermi limit (truncated whole space, growing N), plus the
// rate fits used to read exponents off the sweeps.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "cqtf/energy.hpp"
#include "cqtf/solver.hpp"
#include "cqtf/thomas_fermi.hpp"

namespace cqtf {

inline double eps_of_L(int dim, double rho, double domain_radius, double L) {
    if (!(L > 0.0) || !(domain_radius > 0.0)) throw validation_error("L and R must be positive");
    check_density(rho);
    const double particles = rho * unit_ball_volume(dim) * std::pow(domain_radius, dim);
    return std::pow(L, -2.0) * std::pow(particles, -2.0 / dim);
}

inline double eps_of_N(int dim, double N) {
    if (!(N > 0.0)) throw validation_error("N must be positive");
    unit_ball_volume(dim);
    return std::pow(N, -2.0 / dim);
}

struct SweepRow {
    double control = 0.0;   ///< L or N
    double eps = 0.0;
    double energy = 0.0;
    double energy_gap = 0.0;
    double mu = 0.0;
    double mu_gap = 0.0;
    double kinetic = 0.0;
    double linf_err_interior = 0.0;
    double tail_probe = std::numeric_limits<double>::quiet_NaN();
    double laplacian_sup = 0.0;
    int iterations = 0;
    double residual = 0.0;
    /// Whole-space sweeps only: |E(trunc) - E(1.5 trunc)|, NaN otherwise.
    double truncation_delta = std::numeric_limits<double>::quiet_NaN();
    bool truncation_ok = true;
};

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int points_used = 0;
};

/// Ordinary least squares y = slope * x + intercept. r^2 is 1 when y is constant.
inline RateFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw validation_error("fit_line: x and y differ in length");
    if (x.size() < 3) throw validation_error("rate fit needs at least 3 points, got " + std::to_string(x.size()));
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw validation_error("rate fit needs distinct controls");
    RateFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.points_used = static_cast<int>(x.size());
    if (syy == 0.0) {
        f.r_squared = 1.0;
    } else {
        double ssr = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double e = y[i] - (f.slope * x[i] + f.intercept);
            ssr += e * e;
        }
        f.r_squared = std::clamp(1.0 - ssr / syy, 0.0, 1.0);
    }
    return f;
}

/// Log-log fit of value against control.
inline RateFit fit_rate(const std::vector<double>& control, const std::vector<double>& value) {
    if (control.size() != value.size()) throw validation_error("fit_rate: columns differ in length");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < control.size(); ++i) {
        if (!(control[i] > 0.0)) throw validation_error("fit_rate: controls must be positive");
        if (!(value[i] > 0.0) || !std::isfinite(value[i]))
            throw validation_error("fit_rate: values must be positive, got " + show(value[i]) +
                                   " at control " + show(control[i]));
        x.push_back(std::log(control[i]));
        y.push_back(std::log(value[i]));
    }
    return fit_line(x, y);
}

/// max |u(r) - sqrt(3/4)| over nodes r <= r0 - margin.
inline double linf_interior_error(const Field& field, const TFProfile& profile, double margin) {
    if (!(margin >= 0.0)) throw validation_error("margin must be >= 0");
    const double edge = profile.plateau_radius - margin;
    if (!(edge > 0.0)) throw validation_error("interior region is empty: margin >= plateau radius");
    auto r = field.grid->nodes();
    double worst = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < field.size() && r[i] <= edge; ++i) {
        worst = std::max(worst, std::abs(field.values[i] - profile.plateau_height));
        any = true;
    }
    if (!any) throw validation_error("interior region holds no grid node");
    return worst;
}

inline double laplacian_interior_sup(const Field& field, double radius) {
    if (radius > field.grid->radius() * (1.0 + 1e-12))
        throw validation_error("Laplacian region exceeds the grid radius");
    const Field lap = radial_laplacian(field);
    auto r = field.grid->nodes();
    const std::size_t last = field.size() - 1;
    double worst = 0.0;
    for (std::size_t i = 0; i < last && r[i] <= radius; ++i) worst = std::max(worst, std::abs(lap.values[i]));
    return worst;
}

/// Linear interpolation of the nodal values at radius r.
inline double probe(const Field& field, double r) {
    const auto& g = *field.grid;
    if (r < 0.0 || r > g.radius()) throw validation_error("probe radius outside the grid");
    const double x = r / g.spacing();
    const auto i = std::min(static_cast<std::size_t>(x), field.size() - 2);
    const double t = x - static_cast<double>(i);
    return (1.0 - t) * field.values[i] + t * field.values[i + 1];
}

struct TailDecay {
    RateFit fit;             ///< ln(tail) against the control, linear in the control
    int excluded = 0;        ///< rows at or below the positive floor
    bool conforming = false; ///< slope < 0
    bool soft_rate_ok = false; ///< |slope| >= r_probe / 8
};

inline TailDecay tail_decay_fit(const std::vector<SweepRow>& rows, double r_probe) {
    constexpr double floor = 1e-300;
    TailDecay t;
    std::vector<double> x, y;
    for (const auto& row : rows) {
        if (std::isnan(row.tail_probe))
            throw validation_error("tail probe missing (rho = 3/4 sweeps have no tail region)");
        if (!(row.tail_probe > floor)) {
            ++t.excluded;
            continue;
        }
        x.push_back(row.control);
        y.push_back(std::log(row.tail_probe));
    }
    t.fit = fit_line(x, y);
    t.conforming = t.fit.slope < 0.0;
    t.soft_rate_ok = -t.fit.slope >= r_probe / 8.0;
    return t;
}

struct SweepOptions {
    int grid_n = 8192;
    SolverOptions solver;
    double margin = 0.1;
    bool warm_start = true;
    int threads = 1;
    /// Tail probe radius; 0 picks (r0 + R0)/2, or 1.5 r0 on truncated whole space.
    double r_probe = 0.0;
};

namespace detail {

inline void require_increasing(const std::vector<double>& c, const char* name) {
    if (c.size() < 3) throw validation_error(std::string("sweep needs at least 3 values of ") + name);
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!(c[i] > 0.0) || !std::isfinite(c[i]))
            throw validation_error(std::string(name) + " values must be positive");
        if (i > 0 && !(c[i] > c[i - 1])) throw validation_error(std::string(name) + " values must increase");
    }
}

inline std::string control_label(const char* name, double c) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s = %.17g", name, c);
    return buf;
}

/// Runs solve(i, warm) for every control. Sequential with warm starts, or
/// spread over threads when each row starts cold; rows land in input order.
template <class Solve>
std::vector<SweepRow> run_rows(std::size_t count, const SweepOptions& opts, const char* name,
                               const std::vector<double>& controls, Solve solve) {
    std::vector<SweepRow> rows(count);
    auto guarded = [&](std::size_t i, const Field* warm, Field* out) {
        try {
            rows[i] = solve(i, warm, out);
        } catch (const solver_nonconvergence& e) {
            throw solver_nonconvergence(control_label(name, controls[i]) + ": " + e.what(), e.last());
        } catch (const convergence_error& e) {
            throw convergence_error(control_label(name, controls[i]) + ": " + e.what());
        }
    };

    if (opts.warm_start || opts.threads <= 1) {
        Field prev;
        for (std::size_t i = 0; i < count; ++i) {
            Field cur;
            guarded(i, (opts.warm_start && prev.grid) ? &prev : nullptr, &cur);
            prev = std::move(cur);
        }
        return rows;
    }

    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                Field cur;
                guarded(i, nullptr, &cur);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto nthreads = std::min<std::size_t>(static_cast<std::size_t>(opts.threads), count);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return rows;
}

inline SolverOptions seeded(const SolverOptions& base, const Field* warm) {
    SolverOptions s = base;
    if (warm) {
        s.init = InitKind::warm_start;
        s.warm = *warm;
    }
    return s;
}

inline void fill_common(SweepRow& row, const GroundStateResult& res, double eps) {
    row.eps = eps;
    row.energy = res.energy.total;
    row.energy_gap = res.energy.total - tf_energy;
    row.mu = res.multipliers.weak_form;
    row.mu_gap = std::abs(res.multipliers.weak_form - tf_multiplier);
    row.kinetic = res.energy.kinetic;
    row.iterations = res.iterations;
    row.residual = res.final_residual;
}

} // namespace detail

/// Thermodynamic-limit sweep on the fixed domain B(0, R0), R0 = (1/(rho omega_d))^(1/d).
inline std::vector<SweepRow> sweep_thermo(int dim, double rho, const std::vector<double>& L_list,
                                          const SweepOptions& opts = {}) {
    const TFProfile tf = tf_profile(dim, rho);
    detail::require_increasing(L_list, "L");
    opts.solver.validate();
    const auto grid = make_radial_grid(dim, tf.domain_radius, opts.grid_n);
    const bool saturated = tf.fills_domain();
    const double r_probe =
        (opts.r_probe > 0.0) ? opts.r_probe : 0.5 * (tf.plateau_radius + tf.domain_radius);

    auto solve = [&](std::size_t i, const Field* warm, Field* out) {
        const double L = L_list[i];
        const double eps = eps_of_L(dim, rho, tf.domain_radius, L);
        auto res = ground_state(grid, eps, detail::seeded(opts.solver, warm));
        SweepRow row;
        row.control = L;
        detail::fill_common(row, res, eps);
        if (saturated) {
            // The support touches the boundary: shrink the ball by L^-2 ln L
            // and skip the tail.
            const double shrink = std::log(L) / (L * L);
            row.linf_err_interior = linf_interior_error(res.field, tf, std::max(opts.margin, shrink));
            row.laplacian_sup = laplacian_interior_sup(res.field, tf.plateau_radius - shrink);
        } else {
            row.linf_err_interior = linf_interior_error(res.field, tf, opts.margin);
            row.laplacian_sup = laplacian_interior_sup(res.field, tf.plateau_radius - opts.margin);
            row.tail_probe = probe(res.field, r_probe);
        }
        *out = std::move(res.field);
        return row;
    };
    return detail::run_rows(L_list.size(), opts, "L", L_list, solve);
}

/// Thomas-Fermi-limit sweep: eps = N^(-2/d) on B(0, trunc). Each N is solved
/// again on B(0, 1.5 trunc) at the same spacing; rows whose energies differ by
/// more than 1e-8 are flagged.
inline std::vector<SweepRow> sweep_tf_limit(int dim, const std::vector<double>& N_list, double trunc,
                                            const SweepOptions& opts = {}) {
    constexpr double truncation_tolerance = 1e-8;
    const double r0 = tf_plateau_radius(dim);
    if (!(trunc >= 1.5 * r0))
        throw validation_error("truncation radius must be at least 1.5 r0 = " + show(1.5 * r0));
    detail::require_increasing(N_list, "N");
    opts.solver.validate();
    const auto grid = make_radial_grid(dim, trunc, opts.grid_n);
    const int wide_n = static_cast<int>(std::lround(1.5 * opts.grid_n));
    const auto wide = make_radial_grid(dim, trunc * wide_n / opts.grid_n, wide_n);
    const double r_probe = (opts.r_probe > 0.0) ? opts.r_probe : 1.5 * r0;
    if (r_probe > trunc) throw validation_error("tail probe lies outside the truncated domain");

    TFProfile tf;
    tf.dim = dim;
    tf.rho = 0.0;
    tf.domain_radius = trunc;
    tf.plateau_radius = r0;
    tf.plateau_height = std::sqrt(tf_plateau_density);

    auto solve = [&](std::size_t i, const Field* warm, Field* out) {
        const double N = N_list[i];
        const double eps = eps_of_N(dim, N);
        auto res = ground_state(grid, eps, detail::seeded(opts.solver, warm));
        SweepRow row;
        row.control = N;
        detail::fill_common(row, res, eps);
        row.linf_err_interior = linf_interior_error(res.field, tf, opts.margin);
        row.laplacian_sup = laplacian_interior_sup(res.field, r0 - opts.margin);
        row.tail_probe = probe(res.field, r_probe);

        const auto check = ground_state(wide, eps, detail::seeded(opts.solver, &res.field));
        row.truncation_delta = std::abs(check.energy.total - res.energy.total);
        row.truncation_ok = row.truncation_delta <= truncation_tolerance;
        *out = std::move(res.field);
        return row;
    };
    return detail::run_rows(N_list.size(), opts, "N", N_list, solve);
}

} // namespace cqtf
