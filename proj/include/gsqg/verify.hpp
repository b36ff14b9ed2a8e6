#pragma once

// Structural property suite: fast, deterministic checks of the kernel
// symmetries, rearrangement inequalities, bathtub optimality, and conjugate
// duality that the solver leans on. Shared by the `verify` subcommand and the
// acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "gsqg/fields.hpp"
#include "gsqg/kernels.hpp"
#include "gsqg/nonlinearity.hpp"
#include "gsqg/quadrature.hpp"
#include "gsqg/rearrange.hpp"

namespace gsqg {

struct PropertyResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;  // worst observed value, compared against bound
    double bound = 0.0;
    std::string note;  // what "measured" is
};

namespace detail {

// Even in tau (bit-exact rotation table, so 1e-12 is generous) and strictly
// decreasing on (0, pi/N): sampled on a 10x10x10 lattice of (r, r', tau) for
// each (s, N) combination. The monotonicity result reports the worst forward
// difference, which must stay negative.
inline void polar_kernel_checks(std::vector<PropertyResult>& out) {
    double worst_even = 0.0;
    double worst_slope = -infinity;
    for (double s : {0.5, 0.75}) {
        for (int nf : {2, 3, 4}) {
            for (int a = 0; a < 10; ++a) {
                const double r = 0.55 + 0.9 * a / 9.0;
                for (int b = 0; b < 10; ++b) {
                    const double rp = 0.55 + 0.9 * b / 9.0;
                    double prev = infinity;
                    for (int j = 0; j < 10; ++j) {
                        const double tau = (pi / nf) * (j + 0.5) / 10.0;
                        const double vp = polar_kernel(s, nf, r, rp, tau);
                        const double vm = polar_kernel(s, nf, r, rp, -tau);
                        worst_even = std::max(worst_even, std::abs(vp - vm));
                        if (j > 0) worst_slope = std::max(worst_slope, vp - prev);
                        prev = vp;
                    }
                }
            }
        }
    }
    out.push_back({"polar kernel even in tau", worst_even <= 1e-12, worst_even, 1e-12,
                   "max |V(tau) - V(-tau)| over the sample lattice"});
    out.push_back({"polar kernel decreasing on (0, pi/N)", worst_slope < 0.0, worst_slope, 0.0,
                   "max forward difference of V along tau (negative = monotone)"});
}

// Interaction energy never decreases under radial decreasing rearrangement.
inline void riesz_rearrangement_check(std::vector<PropertyResult>& out) {
    const KernelSpec spec{0.5, KernelMode::FreePlane, 1};
    std::mt19937 rng(2101u);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = -infinity;
    for (int trial = 0; trial < 100; ++trial) {
        PlaneField f(CartesianGrid{{0.0, 0.0}, 1.0, 12}, 0.1);
        for (std::size_t k = 0; k < f.values.size(); ++k)
            if (f.grid.active_flat(k)) f[k] = u(rng);
        const double before = interaction_energy(f, spec);
        const double after = interaction_energy(radial_decreasing(f), spec);
        worst = std::max(worst, (before - after) / after);
    }
    out.push_back({"riesz rearrangement inequality", worst <= 1e-6, worst, 1e-6,
                   "max (I(f) - I(f*)) / I(f*) over 100 random fields"});
}

// Angular Steiner symmetrization never decreases the N-fold sector energy.
inline void angular_steiner_energy_check(std::vector<PropertyResult>& out) {
    std::mt19937 rng(2102u);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = -infinity;
    for (int trial = 0; trial < 100; ++trial) {
        const int nf = 2 + trial % 3;
        SectorField f(SectorGrid{nf, 12, 12}, 0.2);
        for (double& v : f.values) v = u(rng);
        const KernelSpec spec{trial % 2 ? 0.75 : 0.5, KernelMode::NFold, nf};
        const double before = interaction_energy(f, spec);
        const double after = interaction_energy(angular_steiner(f), spec);
        worst = std::max(worst, (before - after) / std::abs(after));
    }
    out.push_back({"angular steiner raises sector energy", worst <= 1e-9, worst, 1e-9,
                   "max (E(f) - E(f#)) / |E(f#)| over 100 random fields"});
}

// Symmetrization permutes each radius fiber, so radial-weighted integrals
// survive exactly (up to summation reordering).
inline void radial_weight_invariance_check(std::vector<PropertyResult>& out) {
    std::mt19937 rng(2103u);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        SectorField f(SectorGrid{2 + trial % 4, 14, 11}, 0.2);
        for (double& v : f.values) v = u(rng);
        std::vector<double> g(static_cast<std::size_t>(f.grid.n_r));
        for (double& w : g) w = u(rng);
        const SectorField fs = angular_steiner(f);
        double before = 0.0, after = 0.0;
        for (int i = 0; i < f.grid.n_r; ++i)
            for (int j = 0; j < f.grid.n_theta; ++j) {
                const std::size_t k = f.grid.index(i, j);
                const double gm = g[static_cast<std::size_t>(i)] * f.grid.measure(i);
                before += gm * f[k];
                after += gm * fs[k];
            }
        worst = std::max(worst, std::abs(before - after) / std::max(1.0, std::abs(before)));
    }
    out.push_back({"radial-weighted integrals invariant", worst <= 1e-12, worst, 1e-12,
                   "max relative change of sum g(r) w over 20 random weights"});
}

// Bathtub fill maximizes the linear functional among mass-constrained
// competitors and recovers ball indicators from radial weights.
inline void bathtub_checks(std::vector<PropertyResult>& out) {
    PlaneField u_field(CartesianGrid{{0.0, 0.0}, 1.0, 32}, 0.1);
    const Vec2 c{0.2, 0.1};
    for (std::size_t k = 0; k < u_field.values.size(); ++k)
        u_field[k] = -(u_field.grid.center_flat(k) - c).norm();
    const double R = 0.4;
    const double beta = pi * R * R;
    const PlaneField fill = bathtub_fill(u_field, beta);

    double best = 0.0;
    for (std::size_t k = 0; k < fill.values.size(); ++k)
        best += u_field[k] * fill[k] * fill.grid.measure_flat(k);
    std::mt19937 rng(2104u);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_gap = -infinity;
    for (int trial = 0; trial < 200; ++trial) {
        double mass = 0.0;
        std::vector<double> xi(u_field.values.size(), 0.0);
        for (std::size_t k = 0; k < xi.size(); ++k)
            if (u_field.grid.active_flat(k)) {
                xi[k] = u(rng);
                mass += xi[k] * u_field.grid.measure_flat(k);
            }
        const double scale = std::min(1.0, beta / mass);
        double score = 0.0;
        for (std::size_t k = 0; k < xi.size(); ++k)
            score += u_field[k] * scale * xi[k] * u_field.grid.measure_flat(k);
        worst_gap = std::max(worst_gap, score - best);
    }
    out.push_back({"bathtub fill beats random competitors", worst_gap <= 1e-12, worst_gap, 1e-12,
                   "max competitor score minus fill score, 200 trials"});

    // one-cell ring around |x-c| = R is allowed to disagree
    const double h = fill.grid.h();
    int mismatched = 0;
    for (std::size_t k = 0; k < fill.values.size(); ++k) {
        if (!fill.grid.active_flat(k)) continue;
        const double dist = (fill.grid.center_flat(k) - c).norm();
        if (std::abs(dist - R) < h) continue;
        if (std::abs(fill[k] - (dist < R ? 1.0 : 0.0)) > 1e-12) ++mismatched;
    }
    out.push_back({"bathtub fill recovers the ball indicator", mismatched == 0,
                   static_cast<double>(mismatched), 0.0,
                   "cells wrong outside a one-cell ring at the ball boundary"});
}

// Penalized conjugate is sandwiched between the two explicit power laws,
// pointwise on a 1000-point tau grid, and inverting the penalized profile
// round-trips through it.
inline void conjugate_checks(std::vector<PropertyResult>& out) {
    const Nonlinearity st = Nonlinearity::step();
    const Nonlinearity sm = Nonlinearity::smooth_ramp();
    double worst_violation = -infinity;
    for (const Nonlinearity* nl : {&st, &sm}) {
        for (double s : {0.5, 0.75}) {
            for (double lambda : {1e-1, 1e-2, 1e-3}) {
                const double denom = (1.0 + 1.0 / s) * std::pow(lambda, 1.0 / s);
                for (int i = 0; i < 1000; ++i) {
                    const double tau = 5.0 * i / 999.0;
                    const double J = conjugate_J_lambda(*nl, lambda, s, tau);
                    const double lower =
                        std::pow(std::max(tau - 1.0, 0.0), 1.0 + 1.0 / s) / denom;
                    const double upper = std::pow(tau, 1.0 + 1.0 / s) / denom;
                    const double scale = std::max(1.0, upper);
                    worst_violation = std::max(
                        worst_violation,
                        std::max(lower - J, J - upper) / scale);
                }
            }
        }
    }
    out.push_back({"penalized conjugate sandwich", worst_violation <= 1e-12, worst_violation,
                   1e-12, "max scaled bound violation on 1000-point tau grids"});

    double worst_rt = 0.0;
    for (double s : {0.5, 0.75}) {
        for (double lambda : {1e-1, 1e-2, 1e-3}) {
            for (int i = 0; i < 1000; ++i) {
                const double w = 5.0 * i / 999.0;
                const double tau = inverse_f_lambda(sm, lambda, s, w);
                worst_rt = std::max(worst_rt,
                                    std::abs(eval_f_lambda(sm, lambda, s, tau) - w));
                // the step profile jumps across (0,1]; stay above the gap
                const double wj = 1.0 + w;
                const double tj = inverse_f_lambda(st, lambda, s, wj);
                worst_rt = std::max(worst_rt,
                                    std::abs(eval_f_lambda(st, lambda, s, tj) - wj));
            }
        }
    }
    out.push_back({"inverse profile round-trip", worst_rt <= 1e-10, worst_rt, 1e-10,
                   "max |f_lambda(f_lambda^-1(w)) - w| on 1000-point w grids"});
}

// Step-profile conjugate vanishes on [0,1] and is flagged infinite outside.
inline void step_conjugate_check(std::vector<PropertyResult>& out) {
    const Nonlinearity st = Nonlinearity::step();
    double worst = 0.0;
    bool flags_ok = true;
    for (int i = 0; i <= 100; ++i)
        worst = std::max(worst, std::abs(conjugate_J(st, i / 100.0)));
    for (double sig : {-2.0, -0.5, -1e-9, 1.0 + 1e-9, 1.5, 10.0})
        flags_ok = flags_ok && conjugate_J(st, sig) == infinity;
    out.push_back({"step conjugate zero on [0,1], infinite outside",
                   worst == 0.0 && flags_ok, worst, 0.0,
                   "max |J(sigma)| on [0,1]; outside values checked for +inf"});
}

}  // namespace detail

inline std::vector<PropertyResult> run_property_suite() {
    std::vector<PropertyResult> out;
    detail::polar_kernel_checks(out);
    detail::riesz_rearrangement_check(out);
    detail::angular_steiner_energy_check(out);
    detail::radial_weight_invariance_check(out);
    detail::bathtub_checks(out);
    detail::conjugate_checks(out);
    detail::step_conjugate_check(out);
    return out;
}

inline bool all_pass(const std::vector<PropertyResult>& results) {
    return std::all_of(results.begin(), results.end(),
                       [](const PropertyResult& r) { return r.pass; });
}

// One line per property; returns overall success.
inline bool print_property_results(const std::vector<PropertyResult>& results, std::FILE* stream) {
    for (const PropertyResult& r : results)
        std::fprintf(stream, "[%s] %-48s measured % .3e  bound % .3e  (%s)\n",
                     r.pass ? "PASS" : "FAIL", r.name.c_str(), r.measured, r.bound,
                     r.note.c_str());
    return all_pass(results);
}

}  // namespace gsqg
