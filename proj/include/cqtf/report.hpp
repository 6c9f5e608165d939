#pragma once

// Pass/fail checks over a sweep table. Rates are one-sided: a column may
// decay faster than the bound it is checked against, never slower.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "cqtf/asymptotics.hpp"
#include "cqtf/table_io.hpp"

namespace cqtf {

// Regression bounds, measured once on the reference sweeps (n = 8192) and
// frozen with headroom. Measured maxima: 0.374, 0.383, 0.312.
inline constexpr double laplacian_thermo_bound = 0.5;     ///< laplacian_sup * L^(-3/2)
inline constexpr double laplacian_saturated_bound = 0.5;  ///< laplacian_sup * L^(-2) (ln L)^(1/2)
inline constexpr double kinetic_L_bound = 0.5;            ///< kinetic * L

inline constexpr double rate_slope_max = -0.8;
inline constexpr double linf_slope_max = -0.45;
inline constexpr double fit_r2_min = 0.98;
inline constexpr double tail_level_max = 1e-6;

struct CheckResult {
    std::string name;
    bool passed = false;
    bool soft = false;   ///< reported but does not fail the sweep
    std::string detail;
};

struct SweepReport {
    SweepKind kind = SweepKind::thermo;
    bool saturated = false;
    std::vector<CheckResult> checks;

    bool passed() const {
        for (const auto& c : checks)
            if (!c.soft && !c.passed) return false;
        return true;
    }
};

namespace detail {

inline std::string fmt(const char* f, double a, double b = 0.0) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

template <class Get>
std::vector<double> column(const std::vector<SweepRow>& rows, Get get) {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(get(r));
    return v;
}

inline CheckResult lower_bound_check(const std::vector<SweepRow>& rows) {
    CheckResult c{"lower_bound", true, false, "energy_gap >= -1e-12 on every row"};
    for (const auto& r : rows)
        if (!(r.energy_gap >= -1e-12)) {
            c.passed = false;
            c.detail = fmt("energy_gap = %.6g at control %.6g", r.energy_gap, r.control);
            break;
        }
    return c;
}

inline CheckResult decreasing_check(const std::vector<SweepRow>& rows) {
    CheckResult c{"energy_gap_decreasing", true, false, "positive and strictly decreasing"};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!(rows[i].energy_gap > 0.0)) {
            c.passed = false;
            c.detail = fmt("non-positive gap at control %.6g", rows[i].control);
            break;
        }
        if (i > 0 && !(rows[i].energy_gap < rows[i - 1].energy_gap)) {
            c.passed = false;
            c.detail = fmt("gap does not decrease at control %.6g", rows[i].control);
            break;
        }
    }
    return c;
}

/// Log-log slope of a column against the control. A column that cannot be
/// fitted (non-positive entries) fails the check rather than the run.
template <class Get>
CheckResult rate_check(const char* name, const std::vector<SweepRow>& rows, Get get, double slope_max,
                       double r2_min) {
    CheckResult c{name, false, false, ""};
    try {
        const auto fit = fit_rate(column(rows, [](const SweepRow& r) { return r.control; }), column(rows, get));
        c.passed = fit.slope <= slope_max && fit.r_squared >= r2_min;
        c.detail = fmt("slope %.4f, r^2 %.4f", fit.slope, fit.r_squared);
    } catch (const validation_error& e) {
        c.detail = e.what();
    }
    return c;
}

template <class Get>
CheckResult bound_check(const char* name, const std::vector<SweepRow>& rows, Get scaled, double bound) {
    double worst = 0.0;
    bool finite = true;
    for (const auto& r : rows) {
        const double v = scaled(r);
        if (!std::isfinite(v)) finite = false;
        worst = std::max(worst, v);
    }
    return {name, finite && worst <= bound, false, fmt("max %.4g (bound %.4g)", worst, bound)};
}

} // namespace detail

inline SweepReport report_sweep(const SweepTable& table) {
    const auto& rows = table.rows;
    if (rows.size() < 3)
        throw table_error("a sweep needs at least 3 rows for rate fits, got " + std::to_string(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (!(rows[i].control > 0.0) || (i > 0 && !(rows[i].control > rows[i - 1].control)))
            throw table_error("sweep controls must be positive and increasing");

    SweepReport rep;
    rep.kind = table.kind;
    std::size_t missing_tail = 0;
    for (const auto& r : rows) missing_tail += std::isnan(r.tail_probe) ? 1 : 0;
    if (missing_tail != 0 && missing_tail != rows.size())
        throw table_error("tail_probe must be present on all rows or on none");
    rep.saturated = table.kind == SweepKind::thermo && missing_tail == rows.size();

    auto& out = rep.checks;
    out.push_back(detail::lower_bound_check(rows));
    out.push_back(detail::decreasing_check(rows));

    if (table.kind == SweepKind::tf_limit) {
        out.push_back(detail::rate_check("energy_gap_rate", rows, [](const SweepRow& r) { return r.energy_gap; },
                                         rate_slope_max, 0.0));
        CheckResult t{"truncation", true, false, ""};
        std::string flagged;
        for (const auto& r : rows)
            if (!(r.truncation_delta <= 1e-8)) {
                t.passed = false;
                flagged += (flagged.empty() ? "" : ",") + format_number(r.control);
            }
        t.detail = "delta <= 1e-8 on every row; flagged N: " + (flagged.empty() ? std::string("none") : flagged);
        out.push_back(t);
        return rep;
    }

    if (rep.saturated) {
        out.push_back(detail::bound_check("laplacian_bound", rows, [](const SweepRow& r) {
            const double L = r.control;
            return r.laplacian_sup * std::sqrt(std::log(L)) / (L * L);
        }, laplacian_saturated_bound));
        return rep;
    }

    out.push_back(detail::rate_check("energy_gap_rate", rows, [](const SweepRow& r) { return r.energy_gap; },
                                     rate_slope_max, fit_r2_min));
    out.push_back(
        detail::rate_check("mu_gap_rate", rows, [](const SweepRow& r) { return r.mu_gap; }, rate_slope_max, 0.0));

    CheckResult window{"mu_window", true, false, "-1/4 < mu < -1/8 for L >= 16"};
    for (const auto& r : rows)
        if (r.control >= 16.0 && !(r.mu > -0.25 && r.mu < -0.125)) {
            window.passed = false;
            window.detail = detail::fmt("mu = %.6g at L = %.6g", r.mu, r.control);
            break;
        }
    out.push_back(window);

    out.push_back(detail::rate_check("linf_rate", rows, [](const SweepRow& r) { return r.linf_err_interior; },
                                     linf_slope_max, 0.0));
    out.push_back(detail::bound_check("kinetic_bound", rows, [](const SweepRow& r) { return r.kinetic * r.control; },
                                      kinetic_L_bound));

    // Only the sign of the decay is enforced. How straight ln(tail) is in L
    // over a sweep that starts at small L, and the absolute level reached,
    // depend on the unpinned decay constant; both are reported as warnings.
    CheckResult tail{"tail_decay", false, false, ""};
    CheckResult straight{"tail_fit_quality", false, true, ""};
    try {
        const auto t = tail_decay_fit(rows, 0.0);
        tail.passed = t.conforming;
        tail.detail = detail::fmt("slope in L %.4f", t.fit.slope);
        if (t.excluded) tail.detail += ", " + std::to_string(t.excluded) + " rows below floor";
        straight.passed = t.fit.r_squared >= fit_r2_min;
        straight.detail = detail::fmt("r^2 %.4f (target %.2f)", t.fit.r_squared, fit_r2_min);
    } catch (const validation_error& e) {
        tail.detail = e.what();
        straight.detail = e.what();
    }
    out.push_back(tail);
    out.push_back(straight);

    const double last_tail = rows.back().tail_probe;
    out.push_back({"tail_level", last_tail < tail_level_max, true,
                   detail::fmt("tail %.3g at the largest L (target %.0e)", last_tail, tail_level_max)});

    out.push_back(detail::bound_check("laplacian_bound", rows, [](const SweepRow& r) {
        return r.laplacian_sup * std::pow(r.control, -1.5);
    }, laplacian_thermo_bound));
    return rep;
}

inline void print_report(std::ostream& os, const std::string& source, const SweepReport& rep) {
    os << source << " ("
       << (rep.kind == SweepKind::tf_limit ? "whole-space sweep" : rep.saturated ? "thermodynamic sweep, rho = 3/4"
                                                                                   : "thermodynamic sweep")
       << ")\n";
    for (const auto& c : rep.checks) {
        const char* status = c.passed ? "pass" : c.soft ? "warn" : "FAIL";
        char buf[64];
        std::snprintf(buf, sizeof buf, "  %-4s  %-22s ", status, c.name.c_str());
        os << buf << c.detail << '\n';
    }
    os << (rep.passed() ? "  => all checks passed\n" : "  => FAILED\n");
}

} // namespace cqtf
