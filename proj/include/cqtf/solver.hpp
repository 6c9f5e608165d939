#pragma once

// Normalized gradient flow for mass-constrained minimizers of E_eps.
//
// One step solves (I - tau eps Lap) v = u + tau (u^3 - u^5 + mu(u) u) with the
// Dirichlet condition at R, clips v at 0 and rescales it back to the target
// mass. mu(u) is the weak-form multiplier of the current iterate; with it the
// fixed points of the step are exactly the discrete Euler-Lagrange solutions,
// independent of tau.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cqtf/energy.hpp"
#include "cqtf/radial_grid.hpp"
#include "cqtf/thomas_fermi.hpp"

namespace cqtf {

enum class InitKind { tf_plateau_smoothed, gaussian, warm_start };

struct SolverOptions {
    double tau = 1.0;
    double tol_energy = 1e-15;
    double tol_residual = 1e-9;
    int max_iter = 20000;
    InitKind init = InitKind::tf_plateau_smoothed;
    std::optional<Field> warm;   ///< used when init == warm_start
    double target_mass = 1.0;

    void validate() const {
        if (!(tau > 0.0)) throw validation_error("tau must be positive");
        if (!(tol_energy > 0.0) || !(tol_residual > 0.0))
            throw validation_error("solver tolerances must be positive");
        if (max_iter < 1) throw validation_error("max_iter must be >= 1");
        if (!(target_mass > 0.0)) throw validation_error("target mass must be positive");
        if (init == InitKind::warm_start && !warm)
            throw validation_error("warm start requested without a field");
    }
};

struct GroundStateResult {
    Field field;
    EnergyBreakdown energy;
    MultiplierEstimates multipliers;
    int iterations = 0;
    double final_residual = 0.0;
    bool monotone_flag = false;
    /// Steps whose energy rose by more than 1e-12.
    int energy_increases = 0;
    /// Largest single-step energy rise observed (0 if none).
    double worst_energy_increase = 0.0;
    /// Number of times the step size was halved to keep the energy monotone.
    int tau_reductions = 0;
    /// Step size in use when the iteration stopped.
    double final_tau = 0.0;
};

/// Thrown when ground_state exhausts max_iter; carries the last iterate.
class solver_nonconvergence : public convergence_error {
public:
    solver_nonconvergence(const std::string& what, GroundStateResult last)
        : convergence_error(what), last_(std::move(last)) {}
    const GroundStateResult& last() const noexcept { return last_; }

private:
    GroundStateResult last_;
};

inline bool radially_non_increasing(const Field& f, double slack = 1e-10) {
    for (std::size_t i = 0; i + 1 < f.size(); ++i)
        if (f.values[i + 1] > f.values[i] + slack) return false;
    return true;
}

inline void rescale_to_mass(Field& f, double target) {
    const double m = mass(f);
    if (!(m > 0.0) || !std::isfinite(m)) throw convergence_error("cannot normalize a field with zero mass");
    const double s = std::sqrt(target / m);
    for (double& x : f.values) x *= s;
}

/// Plateau of height sqrt(3/4) carrying the target mass, averaged over a
/// +-3 node window (mirrored at the origin), pinned to 0 at R.
inline Field smoothed_plateau(GridPtr grid, double target_mass = 1.0) {
    const int d = grid->dim();
    const double edge = std::min(std::pow(target_mass / (tf_plateau_density * unit_ball_volume(d)), 1.0 / d),
                                 grid->radius());
    const double height = std::sqrt(tf_plateau_density);
    const Field raw = Field::sample(grid, [=](double r) { return r <= edge ? height : 0.0; });
    const int n = grid->cells();
    constexpr int half = 3;
    Field out = Field::zeros(grid);
    for (int i = 0; i <= n; ++i) {
        double s = 0.0;
        for (int k = -half; k <= half; ++k) {
            const int j = std::abs(i + k);
            if (j <= n) s += raw.values[j];
        }
        out.values[i] = s / (2 * half + 1);
    }
    out.values[n] = 0.0;
    rescale_to_mass(out, target_mass);
    return out;
}

inline Field gaussian_init(GridPtr grid, double target_mass = 1.0) {
    const int d = grid->dim();
    const double spread = std::min(std::pow(target_mass / (tf_plateau_density * unit_ball_volume(d)), 1.0 / d),
                                   grid->radius()) / 2.0;
    Field out = Field::sample(grid, [=](double r) { return std::exp(-0.5 * r * r / (spread * spread)); });
    out.values.back() = 0.0;
    rescale_to_mass(out, target_mass);
    return out;
}

/// Piecewise-linear transfer of a field onto another grid of the same dimension.
inline Field transfer(const Field& src, GridPtr grid) {
    if (src.grid->dim() != grid->dim()) throw validation_error("cannot transfer between dimensions");
    auto rs = src.grid->nodes();
    const double hs = src.grid->spacing();
    const std::size_t last = src.size() - 1;
    Field out = Field::sample(grid, [&](double r) {
        const double x = r / hs;
        const auto i = static_cast<std::size_t>(x);
        if (i >= last) return r <= rs[last] * (1 + 1e-14) ? src.values[last] : 0.0;
        const double t = x - static_cast<double>(i);
        return (1.0 - t) * src.values[i] + t * src.values[i + 1];
    });
    out.values.back() = 0.0;
    return out;
}

namespace detail {

/// Solves (I - c Lap) x = rhs for nodes 0..n-1 with x_n = 0 (Thomas algorithm).
inline void solve_shifted_laplacian(const RadialGrid& g, double c, std::span<const double> rhs,
                                    std::span<double> x) {
    auto lo = g.laplacian_lower();
    auto up = g.laplacian_upper();
    const int n = g.cells();
    std::vector<double> cp(n), dp(n);
    for (int i = 0; i < n; ++i) {
        const double a = -c * lo[i];
        const double b = 1.0 + c * (lo[i] + up[i]);
        const double cc = -c * up[i];
        const double denom = (i == 0) ? b : b - a * cp[i - 1];
        cp[i] = cc / denom;
        dp[i] = ((i == 0) ? rhs[i] : rhs[i] - a * dp[i - 1]) / denom;
    }
    x[n] = 0.0;
    x[n - 1] = dp[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = dp[i] - cp[i] * x[i + 1];
}

} // namespace detail

inline Field ngf_step(const Field& field, double eps, double tau, double target_mass = 1.0) {
    if (!(eps > 0.0))
        throw validation_error("ngf_step needs eps > 0; use tf_dual_solve for eps = 0");
    if (!(tau > 0.0)) throw validation_error("tau must be positive");
    const auto& g = *field.grid;
    const double mu = multiplier_estimates(field, eps).weak_form;

    std::vector<double> rhs(field.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        const double u = field.values[i];
        const double u2 = u * u;
        rhs[i] = u + tau * (u * u2 - u * u2 * u2 + mu * u);
    }
    Field next = Field::zeros(field.grid);
    detail::solve_shifted_laplacian(g, tau * eps, rhs, next.values);
    for (double& x : next.values) {
        if (!std::isfinite(x))
            throw convergence_error("normalized gradient flow diverged at tau = " + show(tau));
        x = std::max(x, 0.0);
    }
    rescale_to_mass(next, target_mass);
    return next;
}

inline Field initial_field(GridPtr grid, const SolverOptions& opts) {
    switch (opts.init) {
    case InitKind::gaussian: return gaussian_init(grid, opts.target_mass);
    case InitKind::warm_start: {
        Field f = (opts.warm->grid == grid) ? *opts.warm : transfer(*opts.warm, grid);
        f.values.back() = 0.0;
        for (double& x : f.values) x = std::max(x, 0.0);
        rescale_to_mass(f, opts.target_mass);
        return f;
    }
    case InitKind::tf_plateau_smoothed:
    default: return smoothed_plateau(grid, opts.target_mass);
    }
}

/// Rounding floor of el_residual for a field of this size: eps Lap u carries
/// an absolute error of about eps |u|_inf ulp / h^2 at every node.
inline double residual_floor(const Field& f, double eps) {
    const auto& g = *f.grid;
    const double umax = *std::max_element(f.values.begin(), f.values.end());
    const double h = g.spacing();
    return eps * umax * std::sqrt(g.total_volume()) * 0.5 * std::numeric_limits<double>::epsilon() / (h * h);
}

inline GroundStateResult ground_state(GridPtr grid, double eps, const SolverOptions& opts = {}) {
    if (!(eps > 0.0)) throw validation_error("ground_state needs eps > 0");
    opts.validate();

    GroundStateResult res;
    res.field = initial_field(grid, opts);
    double energy = energy_breakdown(res.field, eps).total;
    bool converged = false;
    int it = 0;
    double tau = opts.tau;
    while (it < opts.max_iter) {
        Field next;
        double e_next = 0.0;
        // Backtrack on energy rises above rounding; tau stays reduced afterwards.
        for (;;) {
            bool ok = true;
            try {
                next = ngf_step(res.field, eps, tau, opts.target_mass);
                e_next = energy_breakdown(next, eps).total;
            } catch (const convergence_error&) {
                ok = false;
            }
            const double slack = 1e-13 * std::max(1.0, std::abs(energy));
            if (ok && e_next - energy <= slack) break;
            if (tau < 1e-10 * opts.tau) {
                if (!ok) throw convergence_error("normalized gradient flow diverged at tau = " + show(tau));
                break;
            }
            tau *= 0.5;
            ++res.tau_reductions;
        }
        ++it;
        const double rise = e_next - energy;
        if (rise > 1e-12) {
            ++res.energy_increases;
            res.worst_energy_increase = std::max(res.worst_energy_increase, rise);
        }
        res.field = std::move(next);
        energy = e_next;
        if (-rise < opts.tol_energy) {
            const double mu = multiplier_estimates(res.field, eps).weak_form;
            // A tolerance below the rounding floor can never be met.
            const double tol = std::max(opts.tol_residual, 2.0 * residual_floor(res.field, eps));
            if (el_residual(res.field, mu, eps) < tol) {
                converged = true;
                break;
            }
        }
    }

    res.iterations = it;
    res.final_tau = tau;
    res.energy = energy_breakdown(res.field, eps);
    res.multipliers = multiplier_estimates(res.field, eps);
    res.final_residual = el_residual(res.field, res.multipliers.weak_form, eps);
    res.monotone_flag = radially_non_increasing(res.field);
    if (!converged)
        throw solver_nonconvergence("ground state did not converge within " + std::to_string(opts.max_iter) +
                                        " iterations (residual " + show(res.final_residual) + ")",
                                    std::move(res));
    return res;
}

} // namespace cqtf
