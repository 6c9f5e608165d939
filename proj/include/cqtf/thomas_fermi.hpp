#pragma once

// Thomas-Fermi (kinetic-free) problem: minimize -1/4 int u^4 + 1/6 int u^6
// at unit mass. Closed-form plateau minimizer plus a discrete dual
// construction on a grid.

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "cqtf/radial_grid.hpp"

namespace cqtf {

/// Plateau density rho_* = argmin (phi^2/6 - phi/4).
inline constexpr double tf_plateau_density = 0.75;
/// Value of phi^2/6 - phi/4 at rho_*, i.e. the degenerate dual multiplier.
inline constexpr double tf_critical_alpha = -3.0 / 32.0;
inline constexpr double tf_energy = -3.0 / 32.0;
inline constexpr double tf_multiplier = -3.0 / 16.0;

struct TFProfile {
    int dim = 1;
    double rho = 0.5;
    double domain_radius = 0.0;
    double plateau_radius = 0.0;
    double plateau_height = 0.0;
    double energy = tf_energy;
    double multiplier = tf_multiplier;

    /// Mass carried by the plateau, height^2 * omega_d * r0^d.
    double mass() const {
        return plateau_height * plateau_height * unit_ball_volume(dim) * std::pow(plateau_radius, dim);
    }

    bool fills_domain() const noexcept { return rho == tf_plateau_density; }

    /// Nodal samples of sqrt(3/4) * 1_{r <= r0}.
    Field sample(GridPtr grid) const {
        const double edge = plateau_radius * (1.0 + 1e-12);
        const double height = plateau_height;
        return Field::sample(std::move(grid), [=](double r) { return r <= edge ? height : 0.0; });
    }
};

inline double tf_plateau_radius(int dim) {
    return std::pow(4.0 / (3.0 * unit_ball_volume(dim)), 1.0 / dim);
}

inline double tf_domain_radius(int dim, double rho) {
    return std::pow(1.0 / (rho * unit_ball_volume(dim)), 1.0 / dim);
}

inline void check_density(double rho) {
    if (!(rho > 0.0) || !std::isfinite(rho))
        throw validation_error("density rho must be positive, got " + show(rho));
    if (rho > tf_plateau_density) throw tf_existence_unknown(rho);
}

inline TFProfile tf_profile(int dim, double rho) {
    check_density(rho);
    TFProfile p;
    p.dim = dim;
    p.rho = rho;
    p.plateau_radius = tf_plateau_radius(dim);
    // At rho = 3/4 both radii are the same closed form; keep them bit-equal.
    p.domain_radius = (rho == tf_plateau_density) ? p.plateau_radius : tf_domain_radius(dim, rho);
    p.plateau_height = std::sqrt(tf_plateau_density);
    return p;
}

struct TFIdentityReport {
    double quartic_integral = 0.0; ///< int u^4
    double sextic_integral = 0.0;  ///< int u^6
    double quartic_sextic_residual = 0.0;  ///< |3 int u^4 - 4 int u^6|
    double multiplier_residual = 0.0;      ///< |mu - 6 E - 1/2 int u^4|
};

inline TFIdentityReport tf_identities(const TFProfile& profile, GridPtr grid) {
    if (grid->dim() != profile.dim) throw validation_error("grid dimension differs from profile");
    if (grid->radius() < profile.domain_radius * (1.0 - 1e-12))
        throw validation_error("grid radius is smaller than the Thomas-Fermi domain");
    const Field u = profile.sample(std::move(grid));
    TFIdentityReport rep;
    rep.quartic_integral = quadrature_power(u, 4);
    rep.sextic_integral = quadrature_power(u, 6);
    rep.quartic_sextic_residual = std::abs(3.0 * rep.quartic_integral - 4.0 * rep.sextic_integral);
    rep.multiplier_residual =
        std::abs(profile.multiplier - 6.0 * profile.energy - 0.5 * rep.quartic_integral);
    return rep;
}

struct DiscreteTFSolution {
    Field field;              ///< phi = u^2 at the nodes
    double dual_alpha = 0.0;
    double mass = 0.0;
    double energy = 0.0;      ///< sum_i w_i (phi_i^3/6 - phi_i^2/4)
    int bang_bang_violations = 0;
    /// Set when mass exceeds 3/4 of the volume: the constant state is only
    /// the optimum of the pointwise dual, existence of a minimizer is open.
    bool relaxation = false;
};

namespace detail {

inline double tf_pointwise_objective(double phi, double alpha) {
    return phi * phi * phi / 6.0 - phi * phi / 4.0 - alpha * phi;
}

/// argmin over phi >= 0 of phi^3/6 - phi^2/4 - alpha phi. Ties at alpha_*
/// resolve to 0; the caller fills the degenerate set explicitly.
inline double tf_pointwise_minimizer(double alpha) {
    const double disc = 1.0 + 8.0 * alpha;
    if (disc < 0.0) return 0.0;
    const double root = 0.5 * (1.0 + std::sqrt(disc));
    return tf_pointwise_objective(root, alpha) < 0.0 ? root : 0.0;
}

} // namespace detail

inline DiscreteTFSolution tf_dual_solve(GridPtr grid, double target_mass) {
    if (!(target_mass > 0.0) || !std::isfinite(target_mass))
        throw validation_error("target mass must be positive");
    const double volume = grid->total_volume();
    auto w = grid->weights();

    // Every node takes the same pointwise minimizer, so the primal mass of a
    // multiplier is volume * phi(alpha).
    auto mass_of = [&](double alpha) { return volume * detail::tf_pointwise_minimizer(alpha); };

    double lo = -0.125;
    const double phi_hi = std::max(1.0, 2.0 * target_mass / volume);
    double hi = 0.5 * phi_hi * phi_hi - 0.5 * phi_hi;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (mass_of(mid) < target_mass)
            lo = mid;
        else
            hi = mid;
    }

    DiscreteTFSolution sol;
    sol.field = Field::zeros(grid);
    sol.dual_alpha = 0.5 * (lo + hi);
    auto& phi = sol.field.values;

    const double saturated = tf_plateau_density * volume;
    if (target_mass >= saturated * (1.0 - 1e-14)) {
        // Constant branch; alpha solves phi^2/2 - phi/2 = alpha.
        const double level = (std::abs(target_mass - saturated) <= 1e-14 * saturated)
                                 ? tf_plateau_density
                                 : target_mass / volume;
        std::fill(phi.begin(), phi.end(), level);
        sol.relaxation = level > tf_plateau_density;
    } else {
        // Degenerate multiplier: fill {0, 3/4} from the origin outward, one
        // fractional node absorbs the remainder.
        double remaining = target_mass;
        for (std::size_t i = 0; i < phi.size() && remaining > 0.0; ++i) {
            const double full = tf_plateau_density * w[i];
            if (remaining >= full) {
                phi[i] = tf_plateau_density;
                remaining -= full;
            } else {
                phi[i] = remaining / w[i];
                remaining = 0.0;
            }
        }
    }

    for (std::size_t i = 0; i < phi.size(); ++i) {
        sol.mass += w[i] * phi[i];
        sol.energy += w[i] * (phi[i] * phi[i] * phi[i] / 6.0 - phi[i] * phi[i] / 4.0);
        if (std::abs(phi[i]) > 1e-6 && std::abs(phi[i] - tf_plateau_density) > 1e-6)
            ++sol.bang_bang_violations;
    }
    return sol;
}

} // namespace cqtf
