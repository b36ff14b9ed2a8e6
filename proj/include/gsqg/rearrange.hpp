#pragma once

// Rearrangements: angular Steiner symmetrization per sector ring, Steiner
// symmetrization in x2 per half-plane column, radial decreasing rearrangement
// about the origin, and the bathtub-fill maximizer.
//
// Discrete fiber rule: sort the fiber values decreasingly and hand them out
// to positions ordered by |offset| from the fiber center, the nonnegative
// side first on ties. Deterministic and idempotent.

#include <algorithm>
#include <numeric>
#include <vector>

#include "gsqg/fields.hpp"

namespace gsqg {

namespace detail {

// visiting order of a centered fiber of length n: center outwards, positive
// side first (n=5 -> 2,3,1,4,0; n=4 -> 2,1,3,0)
inline std::vector<int> centered_order(int n) {
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n));
    if (n % 2 == 1) {
        const int c = (n - 1) / 2;
        order.push_back(c);
        for (int step = 1; c + step < n || c - step >= 0; ++step) {
            if (c + step < n) order.push_back(c + step);
            if (c - step >= 0) order.push_back(c - step);
        }
    } else {
        for (int step = 0; step < n / 2; ++step) {
            order.push_back(n / 2 + step);
            order.push_back(n / 2 - 1 - step);
        }
    }
    return order;
}

// rearrange values[fiber[k]] symmetric-decreasingly in place
inline void symmetrize_fiber(std::vector<double>& values, const std::vector<std::size_t>& fiber) {
    std::vector<double> vals;
    vals.reserve(fiber.size());
    for (std::size_t k : fiber) vals.push_back(values[k]);
    std::sort(vals.begin(), vals.end(), std::greater<>());
    const std::vector<int> order = centered_order(static_cast<int>(fiber.size()));
    for (std::size_t k = 0; k < fiber.size(); ++k)
        values[fiber[static_cast<std::size_t>(order[k])]] = vals[k];
}

}  // namespace detail

// Even in theta and nonincreasing in |theta| per radius ring.
inline SectorField angular_steiner(const SectorField& f) {
    f.check_nonnegative();
    SectorField out = f;
    std::vector<std::size_t> fiber(static_cast<std::size_t>(f.grid.n_theta));
    for (int i = 0; i < f.grid.n_r; ++i) {
        for (int j = 0; j < f.grid.n_theta; ++j)
            fiber[static_cast<std::size_t>(j)] = f.grid.index(i, j);
        detail::symmetrize_fiber(out.values, fiber);
    }
    return out;
}

// Even in x2 and nonincreasing in |x2| per x1-column.
inline PlaneField steiner_x2(const PlaneField& f) {
    f.check_nonnegative();
    if (f.grid.center.x2 != 0.0)
        throw config_error("steiner_x2 requires a grid symmetric about x2 = 0");
    PlaneField out = f;
    for (int i = 0; i < f.grid.n; ++i) {
        std::vector<std::size_t> fiber;
        for (int j = 0; j < f.grid.n; ++j)
            if (f.grid.inside(i, j)) fiber.push_back(f.grid.index(i, j));
        if (fiber.size() < 2) continue;
        // clipped columns must come out symmetric around x2=0
        const int j_lo = static_cast<int>(fiber.front() % f.grid.n);
        const int j_hi = static_cast<int>(fiber.back() % f.grid.n);
        if (j_lo + j_hi != f.grid.n - 1)
            throw config_error("steiner_x2: column clipping is not symmetric about x2 = 0");
        detail::symmetrize_fiber(out.values, fiber);
    }
    return out;
}

// Decreasing values assigned outward by cell-center distance from the origin
// (index order breaks distance ties).
inline PlaneField radial_decreasing(const PlaneField& f) {
    f.check_nonnegative();
    if (f.grid.center.norm() > f.grid.radius)
        throw value_error("radial_decreasing requires a grid containing the origin");
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < f.values.size(); ++k)
        if (f.grid.active_flat(k)) active.push_back(k);
    std::vector<std::size_t> by_dist = active;
    std::vector<double> d2(f.values.size(), 0.0);
    for (std::size_t k : active) d2[k] = f.grid.center_flat(k).norm2();
    std::stable_sort(by_dist.begin(), by_dist.end(),
                     [&](std::size_t a, std::size_t b) { return d2[a] < d2[b]; });
    std::vector<double> vals;
    vals.reserve(active.size());
    for (std::size_t k : active) vals.push_back(f.values[k]);
    std::sort(vals.begin(), vals.end(), std::greater<>());
    PlaneField out = f;
    for (std::size_t k = 0; k < by_dist.size(); ++k) out.values[by_dist[k]] = vals[k];
    return out;
}

// Maximizer of sum(u * xi * dA) over 0 <= xi <= 1 with sum(xi * dA) <= beta:
// fill cells in decreasing weight order, fractional marginal cell.
template <class Grid>
Field<Grid> bathtub_fill(const Field<Grid>& weight, double beta) {
    if (beta < 0.0) throw value_error("bathtub_fill: mass must be >= 0");
    std::vector<std::size_t> active;
    double capacity = 0.0;
    for (std::size_t k = 0; k < weight.values.size(); ++k)
        if (weight.grid.active_flat(k)) {
            active.push_back(k);
            capacity += weight.grid.measure_flat(k);
        }
    if (beta > capacity * (1.0 + 1e-12))
        throw value_error("bathtub_fill: mass exceeds the available capacity");
    std::stable_sort(active.begin(), active.end(), [&](std::size_t a, std::size_t b) {
        return weight.values[a] > weight.values[b];
    });
    Field<Grid> out(weight.grid, weight.epsilon);
    double remaining = beta;
    for (std::size_t k : active) {
        if (remaining <= 0.0) break;
        const double A = weight.grid.measure_flat(k);
        const double take = std::min(1.0, remaining / A);
        out.values[k] = take;
        remaining -= take * A;
    }
    return out;
}

}  // namespace gsqg
