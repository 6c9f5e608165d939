#pragma once

// Cubic-quintic energy E_eps(u) = eps/2 int |u'|^2 - 1/4 int u^4 + 1/6 int u^6
// and its first-order diagnostics. eps = 0 is the Thomas-Fermi functional.

#include <cmath>

#include "cqtf/radial_grid.hpp"
#include "cqtf/thomas_fermi.hpp"

namespace cqtf {

struct EnergyBreakdown {
    double kinetic = 0.0;
    double quartic = 0.0;
    double sextic = 0.0;
    double total = 0.0;
    double eps = 0.0;
};

inline EnergyBreakdown energy_breakdown(const Field& field, double eps) {
    if (!(eps >= 0.0)) throw validation_error("kinetic coefficient eps must be >= 0");
    EnergyBreakdown e;
    e.eps = eps;
    e.kinetic = (eps > 0.0) ? 0.5 * eps * gradient_energy(field) : 0.0;
    e.quartic = -0.25 * quadrature_power(field, 4);
    e.sextic = quadrature_power(field, 6) / 6.0;
    e.total = e.kinetic + e.quartic + e.sextic;
    return e;
}

/// Quadrature 2-norm over the interior nodes of -eps Lap u - u^3 + u^5 - mu u.
inline double el_residual(const Field& field, double mu, double eps) {
    const auto& g = *field.grid;
    auto w = g.weights();
    std::vector<double> lap(field.size(), 0.0);
    if (eps != 0.0) apply_laplacian(g, field.values, lap);
    double s = 0.0;
    for (int i = 0; i < g.cells(); ++i) {
        const double u = field.values[i];
        const double u2 = u * u;
        const double r = -eps * lap[i] - u * u2 + u * u2 * u2 - mu * u;
        s += w[i] * r * r;
    }
    return std::sqrt(s);
}

/// Boundary flux int_{|x|=R} |x| |grad u|^2 dS from the one-sided slope at R.
inline double boundary_flux(const Field& field) {
    const auto& g = *field.grid;
    const double slope = outer_slope(field);
    return g.radius() * slope * slope * sphere_area(g.dim(), g.radius());
}

struct MultiplierEstimates {
    double weak_form = 0.0;
    double pohozaev_form = 0.0;
    double discrepancy = 0.0;
};

/// Two routes to the Lagrange multiplier of a (near-)critical point:
///  - weak form: test the Euler-Lagrange equation against u,
///      mu m = eps K - Q4 + Q6;
///  - virial form: the Pohozaev identity with its measured boundary flux,
///      d mu m / 2 = eps B / 2 + (d-2) eps K / 2 - d Q4 / 4 + d Q6 / 6,
/// with K = int |u'|^2, Qp = int u^p, m = int u^2, B the boundary flux.
/// The two agree only when u solves the equation, which makes their gap a
/// convergence diagnostic.
inline MultiplierEstimates multiplier_estimates(const Field& field, double eps) {
    const double m = mass(field);
    if (!(m > 0.0)) throw validation_error("multiplier estimate needs a field with positive mass");
    const int d = field.grid->dim();
    const double k = (eps > 0.0) ? gradient_energy(field) : 0.0;
    const double q4 = quadrature_power(field, 4);
    const double q6 = quadrature_power(field, 6);
    const double b = (eps > 0.0) ? boundary_flux(field) : 0.0;

    MultiplierEstimates est;
    est.weak_form = (eps * k - q4 + q6) / m;
    est.pohozaev_form =
        (eps * b + (d - 2) * eps * k - 0.5 * d * q4 + d * q6 / 3.0) / (d * m);
    est.discrepancy = std::abs(est.weak_form - est.pohozaev_form);
    return est;
}

/// |LHS - RHS| of the bounded-domain Pohozaev identity
///   eps/2 B + (d-2) eps/2 K = d/4 Q4 - d/6 Q6 + d mu/2 m.
inline double pohozaev_residual(const Field& field, double mu, double eps) {
    const int d = field.grid->dim();
    const double k = (eps > 0.0) ? gradient_energy(field) : 0.0;
    const double b = (eps > 0.0) ? boundary_flux(field) : 0.0;
    const double lhs = 0.5 * eps * b + 0.5 * (d - 2) * eps * k;
    const double rhs = 0.25 * d * quadrature_power(field, 4) - d * quadrature_power(field, 6) / 6.0 +
                       0.5 * d * mu * mass(field);
    return std::abs(lhs - rhs);
}

/// Gap between the energy and the universal bound -(3/32) * mass. The
/// pointwise inequality u^6/6 - u^4/4 + 3u^2/32 = (u^2/6)(u^2 - 3/4)^2 >= 0
/// makes this non-negative on any grid with non-negative weights.
inline double check_lower_bound(const Field& field, double eps) {
    return energy_breakdown(field, eps).total - tf_energy * mass(field);
}

} // namespace cqtf
