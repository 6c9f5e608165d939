#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace cqtf {

/// Compact rendering of a number for error messages.
inline std::string show(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

/// Bad input: out-of-range parameters, malformed files, degenerate fields.
class validation_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Requested density lies above 3/4 where no Thomas-Fermi minimizer is known.
class tf_existence_unknown : public validation_error {
public:
    explicit tf_existence_unknown(double rho)
        : validation_error(message(rho)), rho_(rho) {}
    double rho() const noexcept { return rho_; }

private:
    static std::string message(double rho) {
        return "TF existence unknown: rho = " + show(rho) + " exceeds 3/4; only 0 < rho <= 3/4 is supported";
    }
    double rho_;
};

/// Iterative method stopped without meeting its tolerances, or blew up.
class convergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace cqtf
