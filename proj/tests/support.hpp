#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "cqtf/radial_grid.hpp"
#include "cqtf/solver.hpp"

namespace cqtf::testing {

inline double unit(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

/// Non-negative, radially non-increasing, piecewise linear between a few
/// random knots, zero at R, unit mass.
inline Field random_profile(GridPtr grid, std::mt19937_64& gen, double target_mass = 1.0) {
    const int knots = 2 + static_cast<int>(gen() % 6);
    std::vector<double> kr(knots), kv(knots);
    for (int k = 0; k < knots; ++k) {
        kr[k] = unit(gen) * grid->radius();
        kv[k] = unit(gen) * 3.0;
    }
    std::sort(kr.begin(), kr.end());
    std::sort(kv.begin(), kv.end(), std::greater<>());
    kr.front() = 0.0;
    kr.push_back(grid->radius());
    kv.push_back(0.0);
    Field f = Field::sample(grid, [&](double r) {
        for (std::size_t k = 0; k + 1 < kr.size(); ++k)
            if (r <= kr[k + 1]) {
                const double span = kr[k + 1] - kr[k];
                const double t = span > 0.0 ? (r - kr[k]) / span : 1.0;
                return (1.0 - t) * kv[k] + t * kv[k + 1];
            }
        return 0.0;
    });
    f.values.back() = 0.0;
    if (mass(f) <= 0.0) f.values.front() = 1.0;
    rescale_to_mass(f, target_mass);
    return f;
}

} // namespace cqtf::testing
