#pragma once

// Penalized variational maximization. The scheme iterates the optimality
// relation omega = eps^-2 f_lambda(psi) as a damped fixed point: each step
// evaluates the potential once, root-finds the mass multiplier mu so the
// candidate update has unit mass, mixes, symmetrizes, and renormalizes the
// mass exactly. A geometric lambda schedule removes the penalization, with an
// optional terminal lambda = 0 stage.
//
// Two discrete effects shape the drivers. First, tilting a candidate at
// frozen potential barely moves the angular impulse (the response lives on
// the thin set where f' > 0), so root-finding alpha per step amplifies
// lattice-scale noise into the rotation rate by the inverse of that tiny
// gain; alpha is instead the steady-rotation identity <v_2> = alpha <x_1>
// evaluated on converged fields, whose self-field part cancels pairwise.
// Second, the converged blob position is pinned to the cell lattice (the
// discrete self-interaction absorbs O(1) force imbalances through cell-scale
// shape adjustment), so the position constraints cannot be met by any tilt:
// the drivers slide the whole mesh under the blob -- a continuous geometric
// degree of freedom that costs no interpolation -- until the converged state
// meets the impulse constraint (rotating) or the mirror force balance
// (travelling) exactly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gsqg/nonlinearity.hpp"
#include "gsqg/pointvortex.hpp"
#include "gsqg/quadrature.hpp"
#include "gsqg/rearrange.hpp"

namespace gsqg {

struct Multipliers {
    double alpha = 0.0;  // rotating only; stays 0 in travelling mode
    double mu = 0.0;
};

struct LambdaStage {
    double lambda = 0.0;
    double alpha = 0.0;
    double mu = 0.0;
    int iterations = 0;
    double residual = 0.0;  // L1 gap between the candidate update and the field
    double energy = 0.0;
};

struct multiplier_error : convergence_error {
    using convergence_error::convergence_error;
};

// carries the stages completed before the stall
struct continuation_error : convergence_error {
    continuation_error(const std::string& what, std::vector<LambdaStage> partial)
        : convergence_error(what), trajectory(std::move(partial)) {}
    std::vector<LambdaStage> trajectory;
};

enum class SolverMode { Rotating, Travelling };

struct SolverConfig {
    SolverMode mode = SolverMode::Rotating;
    double s = 0.5;
    int nfold = 3;       // rotating
    double speed = 0.0;  // travelling: prescribed W > 0
    double epsilon = 0.05;
    Nonlinearity profile = Nonlinearity::smooth_ramp();
    int resolution = 96;
    double guess_delta = 1.0;  // seed profile height delta in (0, 1]

    double lambda0 = 1e-1;
    double kappa = 0.5;
    double lambda_min = 1e-4;
    bool final_lambda_zero = true;

    double theta_damp = 0.5;  // patch (step-profile) runs want 0.2
    double alpha_cap = 2.0;
    double tol_fix = 1e-8;   // relative L1 fixed-point tolerance
    double tol_con = 1e-10;  // constraint tolerance
    int max_iters = 500;     // per lambda stage

    KernelSpec kernel() const {
        if (mode == SolverMode::Rotating) return {s, KernelMode::NFold, nfold};
        return {s, KernelMode::HalfPlaneOdd, 0};
    }

    double travel_distance() const { return pair_distance(speed, s); }

    double rho0() const { return std::sin(pi / (2.0 * nfold)) / (6.0 * std::sqrt(pi)); }

    // sufficient-condition bound from the existence argument; recorded, not
    // enforced (the hard feasibility check is seed_disk below)
    double epsilon_bound() const {
        if (mode == SolverMode::Rotating)
            return std::min(rho0(), std::sqrt(7.0 * pi * profile.f(1.0) / (72.0 * nfold)));
        return std::sqrt(pi) * travel_distance() / 2.0;
    }
    bool epsilon_bound_satisfied() const { return epsilon < epsilon_bound(); }

    struct SeedDisk {
        Vec2 center;
        double radius;
    };

    // seed profile support: radius eps/sqrt(pi delta), centered at (a, 0)
    // with a chosen so the continuum seed has unit angular impulse, or at
    // (d, 0) in travelling mode; throws when the disk does not fit
    SeedDisk seed_disk() const {
        const double R = epsilon / std::sqrt(pi * guess_delta);
        if (mode == SolverMode::Rotating) {
            const double a2 = 1.0 - epsilon * epsilon / (2.0 * guess_delta * pi);
            if (!(a2 > 0.0)) throw config_error("epsilon too large: seed disk center undefined");
            const double a = std::sqrt(a2);
            if (!(a - R > SectorGrid::r_min) || !(a + R < SectorGrid::r_max) ||
                !(std::asin(std::min(1.0, R / a)) < pi / (2.0 * nfold)))
                throw config_error("seed disk does not fit inside the sector");
            return {{a, 0.0}, R};
        }
        const double d = travel_distance();
        if (!(R < 0.5 * d)) throw config_error("seed disk does not fit inside the travelling ball");
        return {{d, 0.0}, R};
    }

    SectorGrid sector_grid() const { return {nfold, resolution, resolution}; }
    CartesianGrid plane_grid() const { return CartesianGrid::for_travelling(travel_distance(), resolution); }

    void validate() const {
        if (!(s >= 0.5 && s < 1.0)) throw config_error("solver requires s in [1/2, 1)");
        if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw config_error("epsilon must be positive");
        if (!(guess_delta > 0.0 && guess_delta <= 1.0))
            throw config_error("seed delta must lie in (0, 1]");
        if (resolution < 2) throw config_error("grid resolution must be at least 2");
        if (!(lambda0 > 0.0) || !(kappa > 0.0 && kappa < 1.0) || !(lambda_min > 0.0) ||
            lambda_min > lambda0)
            throw config_error("lambda schedule needs 0 < lambda_min <= lambda0 and kappa in (0,1)");
        if (!(theta_damp > 0.0 && theta_damp <= 1.0)) throw config_error("damping must lie in (0, 1]");
        if (!(alpha_cap > 0.0)) throw config_error("alpha_cap must be positive");
        if (!(tol_fix > 0.0) || !(tol_con > 0.0)) throw config_error("tolerances must be positive");
        if (max_iters < 1) throw config_error("max_iters must be at least 1");
        if (mode == SolverMode::Rotating && nfold < 2)
            throw config_error("rotating mode requires nfold >= 2");
        if (mode == SolverMode::Travelling && (!(speed > 0.0) || !std::isfinite(speed)))
            throw config_error("travelling mode requires a positive speed W");
        seed_disk();
    }
};

inline std::vector<double> lambda_schedule(const SolverConfig& cfg) {
    std::vector<double> sched;
    double lam = cfg.lambda0;
    while (lam > cfg.lambda_min * (1.0 + 1e-12)) {
        sched.push_back(lam);
        lam *= cfg.kappa;
    }
    sched.push_back(cfg.lambda_min);
    if (cfg.final_lambda_zero) sched.push_back(0.0);
    return sched;
}

// --- seed profiles ----------------------------------------------------------

inline SectorField initial_guess_rotating(const SolverConfig& cfg) {
    const auto disk = cfg.seed_disk();
    SectorField f(cfg.sector_grid(), cfg.epsilon);
    const double level = cfg.guess_delta / (cfg.epsilon * cfg.epsilon);
    for (std::size_t k = 0; k < f.values.size(); ++k)
        if ((f.grid.center_flat(k) - disk.center).norm() < disk.radius) f.values[k] = level;
    if (!(total_vorticity(f) > 0.0))
        throw config_error("seed disk is not resolved by the grid (no cell center inside)");
    return f;
}

inline PlaneField initial_guess_travelling(const SolverConfig& cfg) {
    const auto disk = cfg.seed_disk();
    PlaneField f(cfg.plane_grid(), cfg.epsilon);
    const double level = cfg.guess_delta / (cfg.epsilon * cfg.epsilon);
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        if (!f.grid.active_flat(k)) continue;
        if ((f.grid.center_flat(k) - disk.center).norm() < disk.radius) f.values[k] = level;
    }
    if (!(total_vorticity(f) > 0.0))
        throw config_error("seed disk is not resolved by the grid (no cell center inside)");
    return f;
}

namespace detail {

// guarded secant (Illinois) on a sign-changing bracket; returns the abscissa
// and the achieved |h| so callers can report how well the constraint is met
template <class H>
double illinois_root(H&& h, double lo, double hi, double hlo, double hhi, double tol,
                     int max_iter, double& achieved) {
    if (std::abs(hlo) <= tol) {
        achieved = std::abs(hlo);
        return lo;
    }
    if (std::abs(hhi) <= tol) {
        achieved = std::abs(hhi);
        return hi;
    }
    if (hlo * hhi > 0.0) throw multiplier_error("root finder: endpoints do not bracket a root");
    int side = 0;
    for (int it = 0; it < max_iter; ++it) {
        double x = (hlo * hi - hhi * lo) / (hlo - hhi);
        if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
        const double hx = h(x);
        if (std::abs(hx) <= tol) {
            achieved = std::abs(hx);
            return x;
        }
        if ((hx > 0.0) == (hlo > 0.0)) {
            lo = x;
            hlo = hx;
            if (side == -1) hhi *= 0.5;
            side = -1;
        } else {
            hi = x;
            hhi = hx;
            if (side == 1) hlo *= 0.5;
            side = 1;
        }
        if (hi - lo <= 8.0 * std::numeric_limits<double>::epsilon() *
                           std::max({1.0, std::abs(lo), std::abs(hi)}))
            break;
    }
    // bracket exhausted (e.g. a jump profile): report the better endpoint
    if (std::abs(hlo) < std::abs(hhi)) {
        achieved = std::abs(hlo);
        return lo;
    }
    achieved = std::abs(hhi);
    return hi;
}

inline double candidate_mass(const std::vector<double>& a, const std::vector<double>& measure,
                             const Nonlinearity& nl, double lambda, double s, double inv_eps2,
                             double mu) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double tau = a[k] - mu;
        if (tau <= 0.0) continue;
        m += eval_f_lambda(nl, lambda, s, tau) * measure[k];
    }
    return inv_eps2 * m;
}

inline double candidate_moment(const std::vector<double>& a, const std::vector<double>& measure,
                               const std::vector<double>& weight, const Nonlinearity& nl,
                               double lambda, double s, double inv_eps2, double mu) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double tau = a[k] - mu;
        if (tau <= 0.0) continue;
        m += eval_f_lambda(nl, lambda, s, tau) * measure[k] * weight[k];
    }
    return inv_eps2 * m;
}

// solve M(mu) = 1; M is nonincreasing in mu and vanishes for mu >= max a
inline double solve_mass_multiplier(const std::vector<double>& a,
                                    const std::vector<double>& measure, const Nonlinearity& nl,
                                    double lambda, double s, double inv_eps2, double tol,
                                    double& achieved) {
    double amax = -infinity, amin = infinity;
    for (double v : a) {
        amax = std::max(amax, v);
        amin = std::min(amin, v);
    }
    auto h = [&](double mu) {
        return candidate_mass(a, measure, nl, lambda, s, inv_eps2, mu) - 1.0;
    };
    double hi = amax, hhi = -1.0;  // candidate vanishes identically there
    double step = std::max(1.0, 0.5 * (amax - amin));
    double lo = hi - step, hlo = h(lo);
    int grow = 0;
    while (hlo < 0.0) {
        if (++grow > 200)
            throw multiplier_error(
                "mass constraint cannot be bracketed (profile range too small for this grid)");
        hi = lo;
        hhi = hlo;
        step *= 2.0;
        lo = amax - step;
        hlo = h(lo);
    }
    return illinois_root(h, lo, hi, hlo, hhi, tol, 200, achieved);
}

struct MultiplierSolve {
    Multipliers mult;
    double mass_err = 0.0;
    double second_err = 0.0;  // |L - 1| of the candidate (rotating only)
};

// rotating: nested root-find on the candidate update for a given field.
// Inner: mu from M = 1 at fixed alpha. Outer: alpha from L = 1, searched on a
// warm bracket clamped to |alpha| <= cap; when L = 1 has no root inside the
// cap the nearest endpoint is accepted. Exposed through solve_multipliers for
// inspection; the continuation driver solves L at the converged fixed point
// instead, where the alpha response is well conditioned.
inline MultiplierSolve solve_rotating_multipliers(const std::vector<double>& phi,
                                                  const std::vector<double>& half_r2,
                                                  const std::vector<double>& r2,
                                                  const std::vector<double>& measure,
                                                  const Nonlinearity& nl, double lambda, double s,
                                                  double inv_eps2, double tol, double cap,
                                                  Multipliers warm) {
    std::vector<double> a(phi.size());
    double mu = warm.mu, mass_err = 0.0;
    auto g = [&](double alpha) {
        for (std::size_t k = 0; k < a.size(); ++k) a[k] = phi[k] + alpha * half_r2[k];
        mu = solve_mass_multiplier(a, measure, nl, lambda, s, inv_eps2, tol, mass_err);
        return candidate_moment(a, measure, r2, nl, lambda, s, inv_eps2, mu) - 1.0;
    };
    double lo = std::clamp(warm.alpha - 0.05, -cap, cap);
    double hi = std::clamp(warm.alpha + 0.05, -cap, cap);
    if (!(lo < hi)) {
        lo = -cap;
        hi = cap;
    }
    double glo = g(lo), ghi = g(hi);
    double width = hi - lo;
    while (glo > 0.0 && lo > -cap) {  // L too large even at the left end: push left
        lo = std::max(-cap, lo - width);
        width *= 2.0;
        glo = g(lo);
    }
    while (ghi < 0.0 && hi < cap) {  // L too small even at the right end: push right
        hi = std::min(cap, hi + width);
        width *= 2.0;
        ghi = g(hi);
    }
    double alpha;
    double second_err = 0.0;
    if (glo > 0.0)
        alpha = lo;
    else if (ghi < 0.0)
        alpha = hi;
    else
        alpha = illinois_root(g, lo, hi, glo, ghi, tol, 100, second_err);
    second_err = std::abs(g(alpha));  // refresh mu/mass_err for the returned alpha
    return {{alpha, mu}, mass_err, second_err};
}

inline MultiplierSolve solve_travelling_multiplier(const std::vector<double>& base,
                                                   const std::vector<double>& measure,
                                                   const Nonlinearity& nl, double lambda, double s,
                                                   double inv_eps2, double tol) {
    MultiplierSolve out;
    out.mult.mu =
        solve_mass_multiplier(base, measure, nl, lambda, s, inv_eps2, tol, out.mass_err);
    return out;
}

struct CellGeometry {
    std::vector<double> measure;
    std::vector<double> r2;       // |x|^2 per cell
    std::vector<double> half_r2;  // |x|^2 / 2
    std::vector<double> x1;
};

template <class Grid>
CellGeometry cell_geometry(const Grid& grid) {
    CellGeometry geo;
    const std::size_t n = grid.size();
    geo.measure.resize(n);
    geo.r2.resize(n);
    geo.half_r2.resize(n);
    geo.x1.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Vec2 x = grid.center_flat(k);
        geo.measure[k] = grid.measure_flat(k);
        geo.r2[k] = x.norm2();
        geo.half_r2[k] = 0.5 * geo.r2[k];
        geo.x1[k] = x.x1;
    }
    return geo;
}

struct IterateOutcome {
    double mu = 0.0;
    double residual = 0.0;  // L1 gap between candidate and incoming field
    double mass_err = 0.0;
};

// one damped step at fixed tilt; the field enters and leaves with unit mass
template <class FieldT, class TableT, class Sym>
IterateOutcome iterate_step(FieldT& f, const TableT& table, const CellGeometry& geo,
                            const SolverConfig& cfg, double lambda, double alpha,
                            Sym&& symmetrize) {
    const double inv_eps2 = 1.0 / (cfg.epsilon * cfg.epsilon);
    const std::vector<double> phi = table.apply(f.values);

    std::vector<double> a(phi.size());
    if (cfg.mode == SolverMode::Rotating)
        for (std::size_t k = 0; k < a.size(); ++k) a[k] = phi[k] + alpha * geo.half_r2[k];
    else
        for (std::size_t k = 0; k < a.size(); ++k) a[k] = phi[k] - cfg.speed * geo.x1[k];

    IterateOutcome out;
    out.mu = solve_mass_multiplier(a, geo.measure, cfg.profile, lambda, cfg.s, inv_eps2,
                                   cfg.tol_con, out.mass_err);

    double gap = 0.0;
    const double th = cfg.theta_damp;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double cand = inv_eps2 * eval_f_lambda(cfg.profile, lambda, cfg.s, a[k] - out.mu);
        gap += std::abs(cand - f.values[k]) * geo.measure[k];
        f.values[k] = (1.0 - th) * f.values[k] + th * cand;
    }
    f = symmetrize(f);
    const double tv = total_vorticity(f);
    if (!(tv > 0.0)) throw convergence_error("iteration collapsed to the zero field");
    const double c = 1.0 / tv;
    for (double& v : f.values) v *= c;
    out.residual = gap;
    return out;
}

// Steiner steps with the leftover odd part averaged away: the discrete
// rearrangement of an even-length fiber cannot place equal values on both
// center cells, and the residual asymmetry would bias the centroid
// identities the drivers anchor on. Averaging mirror cells preserves mass
// and every moment the constraints use, and keeps the profiles monotone.
inline SectorField symmetrize_rotating(const SectorField& f) {
    SectorField out = angular_steiner(f);
    const int nt = out.grid.n_theta;
    for (int i = 0; i < out.grid.n_r; ++i)
        for (int j = 0; j < nt / 2; ++j) {
            const std::size_t a = out.grid.index(i, j);
            const std::size_t b = out.grid.index(i, nt - 1 - j);
            const double m = 0.5 * (out.values[a] + out.values[b]);
            out.values[a] = m;
            out.values[b] = m;
        }
    return out;
}

inline PlaneField symmetrize_travelling(const PlaneField& f) {
    PlaneField out = steiner_x2(f);
    const int n = out.grid.n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n / 2; ++j) {
            if (!out.grid.inside(i, j)) continue;  // mirror cell is active too
            const std::size_t a = out.grid.index(i, j);
            const std::size_t b = out.grid.index(i, n - 1 - j);
            const double m = 0.5 * (out.values[a] + out.values[b]);
            out.values[a] = m;
            out.values[b] = m;
        }
    return out;
}

// point-vortex image pull of the field's own centroid configuration, used to
// seed the rotation-rate solve; the root does not depend on it
inline double image_alpha_estimate(const SectorField& f, const KernelSpec& spec) {
    double m = 0.0, rbar = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        const double w = f.values[k] * f.grid.measure_flat(k);
        m += w;
        rbar += w * f.grid.center_flat(k).norm();
    }
    if (!(m > 0.0) || !(rbar > 0.0)) return 0.0;
    rbar /= m;
    const double cs = riesz_constant(spec.s);
    double pull = 0.0;  // d/dr of the image potential at (rbar, 0)
    for (int k = 1; k < spec.nfold; ++k) {
        const double th = 2.0 * pi * k / spec.nfold;
        const Vec2 d{rbar - rbar * std::cos(th), -rbar * std::sin(th)};
        pull += cs * (2.0 * spec.s - 2.0) * std::pow(d.norm2(), spec.s - 2.0) * d.x1;
    }
    return -pull / rbar;
}

inline double impulse_x1(const PlaneField& f) { return impulse(f); }
inline double impulse_x1(const SectorField&) { return 0.0; }

template <class FieldT, class TableT>
double stage_energy(const FieldT& f, const TableT& table, const SolverConfig& cfg, double lambda) {
    const std::vector<double> phi = table.apply(f.values);
    double inter = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k)
        inter += f.values[k] * phi[k] * f.grid.measure_flat(k);
    double e = energy_prefactor(cfg.kernel()) * inter;
    if (cfg.mode == SolverMode::Travelling) e -= cfg.speed * impulse_x1(f);
    return e - penalty_integral(f, cfg.profile, lambda, cfg.s);
}

}  // namespace detail

// --- public iteration API ----------------------------------------------------

struct RotatingState {
    SectorField field;
    Multipliers multipliers{};
    double residual = infinity;
};

struct TravellingState {
    PlaneField field;
    Multipliers multipliers{};
    double residual = infinity;
};

// the (alpha, mu) making the candidate update meet the constraints for the
// given field; deterministic, so repeated calls agree exactly
inline Multipliers solve_multipliers(const SectorField& f, const SolverConfig& cfg, double lambda) {
    const std::vector<double> phi = potential_at_cells(f, cfg.kernel());
    const detail::CellGeometry geo = detail::cell_geometry(f.grid);
    const double inv_eps2 = 1.0 / (cfg.epsilon * cfg.epsilon);
    return detail::solve_rotating_multipliers(phi, geo.half_r2, geo.r2, geo.measure, cfg.profile,
                                              lambda, cfg.s, inv_eps2, cfg.tol_con, cfg.alpha_cap,
                                              Multipliers{})
        .mult;
}

inline Multipliers solve_multipliers(const PlaneField& f, const SolverConfig& cfg, double lambda) {
    const std::vector<double> phi = potential_at_cells(f, cfg.kernel());
    const detail::CellGeometry geo = detail::cell_geometry(f.grid);
    const double inv_eps2 = 1.0 / (cfg.epsilon * cfg.epsilon);
    std::vector<double> base(phi.size());
    for (std::size_t k = 0; k < base.size(); ++k) base[k] = phi[k] - cfg.speed * geo.x1[k];
    return detail::solve_travelling_multiplier(base, geo.measure, cfg.profile, lambda, cfg.s,
                                               inv_eps2, cfg.tol_con)
        .mult;
}

// constraint residuals of the candidate update at prescribed multipliers
// (diagnostic companion to solve_multipliers; zero there by construction)
struct ConstraintResiduals {
    double mass = 0.0;     // M(candidate) - 1
    double angular = 0.0;  // L(candidate) - 1 (rotating only)
};

inline ConstraintResiduals constraint_residuals(const SectorField& f, const SolverConfig& cfg,
                                                double lambda, Multipliers m) {
    const std::vector<double> phi = potential_at_cells(f, cfg.kernel());
    const detail::CellGeometry geo = detail::cell_geometry(f.grid);
    const double inv_eps2 = 1.0 / (cfg.epsilon * cfg.epsilon);
    std::vector<double> a(phi.size());
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = phi[k] + m.alpha * geo.half_r2[k];
    ConstraintResiduals out;
    out.mass =
        detail::candidate_mass(a, geo.measure, cfg.profile, lambda, cfg.s, inv_eps2, m.mu) - 1.0;
    out.angular = detail::candidate_moment(a, geo.measure, geo.r2, cfg.profile, lambda, cfg.s,
                                           inv_eps2, m.mu) -
                  1.0;
    return out;
}

inline ConstraintResiduals constraint_residuals(const PlaneField& f, const SolverConfig& cfg,
                                                double lambda, Multipliers m) {
    const std::vector<double> phi = potential_at_cells(f, cfg.kernel());
    const detail::CellGeometry geo = detail::cell_geometry(f.grid);
    const double inv_eps2 = 1.0 / (cfg.epsilon * cfg.epsilon);
    std::vector<double> a(phi.size());
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = phi[k] - cfg.speed * geo.x1[k];
    ConstraintResiduals out;
    out.mass =
        detail::candidate_mass(a, geo.measure, cfg.profile, lambda, cfg.s, inv_eps2, m.mu) - 1.0;
    return out;
}

// one damped penalized iteration at the state's rotation rate (builds the
// potential table per call; the continuation driver amortizes it across a run)
inline RotatingState penalized_iterate(RotatingState state, const SolverConfig& cfg,
                                       double lambda) {
    const SectorPotentialTable table(state.field.grid, cfg.kernel());
    const detail::CellGeometry geo = detail::cell_geometry(state.field.grid);
    const auto out =
        detail::iterate_step(state.field, table, geo, cfg, lambda, state.multipliers.alpha,
                             [](const SectorField& f) { return detail::symmetrize_rotating(f); });
    state.multipliers.mu = out.mu;
    state.residual = out.residual;
    return state;
}

inline TravellingState penalized_iterate(TravellingState state, const SolverConfig& cfg,
                                         double lambda) {
    const PlanePotentialTable table(state.field.grid, cfg.kernel());
    const detail::CellGeometry geo = detail::cell_geometry(state.field.grid);
    const auto out = detail::iterate_step(state.field, table, geo, cfg, lambda, 0.0,
                                          [](const PlaneField& f) { return detail::symmetrize_travelling(f); });
    state.multipliers.mu = out.mu;
    state.residual = out.residual;
    return state;
}

// --- continuation and drivers ------------------------------------------------

struct RotatingSolution {
    RotatingSolution(SolverConfig c, SectorField f) : config(std::move(c)), field(std::move(f)) {}

    SolverConfig config;
    SectorField field;
    Multipliers multipliers{};
    double energy = 0.0;
    double el_residual = 0.0;    // L1 gap of omega vs eps^-2 f(psi), psi rebuilt
    double mass_error = 0.0;     // |M - 1| of the returned field
    double angular_error = 0.0;  // |L - 1|
    SupportMetrics support;
    std::vector<LambdaStage> trajectory;
    int iterations = 0;
    bool epsilon_bound_satisfied = true;
};

struct TravellingSolution {
    TravellingSolution(SolverConfig c, PlaneField f) : config(std::move(c)), field(std::move(f)) {}

    SolverConfig config;
    PlaneField field;
    Multipliers multipliers{};
    double speed = 0.0;
    double distance = 0.0;  // d recovered from the prescribed W
    double energy = 0.0;
    double el_residual = 0.0;
    double mass_error = 0.0;
    SupportMetrics support;
    std::vector<LambdaStage> trajectory;
    int iterations = 0;
    bool epsilon_bound_satisfied = true;
};

namespace detail {

// blob cells carrying all but `drop` of the mass, heaviest first; the
// pairwise identities below are quadratic in the cell count, and the
// penalized stages grow an algebraic tail of numerous but negligible cells
struct ActiveCells {
    std::vector<Vec2> x;
    std::vector<double> w;  // value * measure
};

template <class FieldT>
ActiveCells active_cells(const FieldT& f, double drop = 1e-7) {
    std::vector<std::size_t> idx;
    double total = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k)
        if (f.values[k] != 0.0) {
            idx.push_back(k);
            total += f.values[k] * f.grid.measure_flat(k);
        }
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return f.values[a] * f.grid.measure_flat(a) > f.values[b] * f.grid.measure_flat(b);
    });
    ActiveCells out;
    double kept = 0.0;
    for (std::size_t k : idx) {
        if (kept >= (1.0 - drop) * total) break;
        const double w = f.values[k] * f.grid.measure_flat(k);
        out.x.push_back(f.grid.center_flat(k));
        out.w.push_back(w);
        kept += w;
    }
    return out;
}

// rotation rate from the steady-rotation identity <v_2> = alpha <x_1>; the
// self-interaction part of <v_2> cancels pairwise, so only the smooth image
// terms enter and the extraction stays conditioned even for a blob a few
// cells wide (unlike the impulse-matching multiplier, which amplifies lattice
// noise by the inverse of the thin f' > 0 channel)
inline double weak_rotation_rate(const SectorField& f, const KernelSpec& spec) {
    const ActiveCells ac = active_cells(f);
    const double pre = riesz_constant(spec.s) * (2.0 * spec.s - 2.0);
    double den = 0.0;
    for (std::size_t i = 0; i < ac.x.size(); ++i) den += ac.w[i] * ac.x[i].x1;
    double num = 0.0;
    for (int k = 1; k < spec.nfold; ++k) {
        const double ph = 2.0 * pi * k / spec.nfold;
        const double cph = std::cos(ph), sph = std::sin(ph);
        double acc = 0.0;
        for (std::size_t i = 0; i < ac.x.size(); ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < ac.x.size(); ++j) {
                const Vec2 y{cph * ac.x[j].x1 - sph * ac.x[j].x2,
                             sph * ac.x[j].x1 + cph * ac.x[j].x2};
                const Vec2 d = ac.x[i] - y;
                row += ac.w[j] * std::pow(d.norm2(), spec.s - 2.0) * d.x1;
            }
            acc += ac.w[i] * row;
        }
        num -= pre * acc;  // v_2 = -d_1 potential
    }
    return num / den;
}

// net mirror-induced vertical velocity plus the prescribed speed: zero when
// the blob sits at the separation where the mirror pull balances W (the
// self-interaction part again cancels pairwise)
inline double mirror_imbalance(const PlaneField& f, const KernelSpec& spec, double speed) {
    const ActiveCells ac = active_cells(f);
    const double pre = riesz_constant(spec.s) * (2.0 * spec.s - 2.0);
    double mass = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < ac.x.size(); ++i) {
        mass += ac.w[i];
        double row = 0.0;
        for (std::size_t j = 0; j < ac.x.size(); ++j) {
            const Vec2 d{ac.x[i].x1 + ac.x[j].x1, ac.x[i].x2 - ac.x[j].x2};  // x_i - mirror(x_j)
            row += ac.w[j] * std::pow(d.norm2(), spec.s - 2.0) * d.x1;
        }
        acc += ac.w[i] * row;
    }
    return pre * acc / mass + speed;  // mirror term carries the opposite sign
}

// Travelling stages. The damped iteration pins the blob to the cell lattice,
// so its distance from the dividing axis freezes wherever the seed landed,
// off the true balance point by up to a cell. Sliding the whole mesh along
// x_1 (values keep their cells, geometry moves) restores that degree of
// freedom; the anchor is the pairwise mirror balance above.
template <class Sym>
std::vector<LambdaStage> run_schedule_travelling(PlaneField& f, const SolverConfig& cfg,
                                                 Multipliers& warm, int& total_iters,
                                                 Sym&& symmetrize) {
    const KernelSpec spec = cfg.kernel();
    auto table = std::make_unique<PlanePotentialTable>(f.grid, spec);
    CellGeometry geo = cell_geometry(f.grid);
    const double itol = std::min(cfg.tol_fix, cfg.tol_con);
    const auto schedule = lambda_schedule(cfg);
    std::vector<LambdaStage> traj;
    for (std::size_t si = 0; si < schedule.size(); ++si) {
        const double lam = schedule[si];
        const bool last = si + 1 == schedule.size();
        int stage_iters = 0;
        double gap = infinity;
        auto converge = [&]() {
            gap = infinity;
            int it = 0;
            while (it < cfg.max_iters && gap > cfg.tol_fix) {
                const auto out = iterate_step(f, *table, geo, cfg, lam, 0.0, symmetrize);
                warm.mu = out.mu;
                gap = out.residual;
                ++it;
                ++stage_iters;
                ++total_iters;
            }
            if (gap > cfg.tol_fix)
                throw continuation_error("continuation stalled at lambda = " + fmt_g17(lam) +
                                             " (residual " + fmt_g17(gap) + " after " +
                                             std::to_string(it) + " iterations)",
                                         traj);
            for (int polish = 0; polish < 160 && gap > itol; ++polish) {
                const auto out = iterate_step(f, *table, geo, cfg, lam, 0.0, symmetrize);
                warm.mu = out.mu;
                gap = out.residual;
                ++stage_iters;
                ++total_iters;
            }
        };
        const double btol = (last ? 1e-8 : 1e-4) * std::max(1.0, cfg.speed);
        for (int pass = 0;; ++pass) {
            converge();
            const double g = mirror_imbalance(f, spec, cfg.speed);
            if (std::abs(g) <= btol) break;
            if (pass >= 24)
                throw continuation_error("mesh positioning did not settle at lambda = " +
                                             fmt_g17(lam) + " (mirror imbalance " + fmt_g17(g) +
                                             ")",
                                         traj);
            double xc = 0.0, mass = 0.0;
            for (std::size_t k = 0; k < f.values.size(); ++k) {
                const double w = f.values[k] * f.grid.measure_flat(k);
                mass += w;
                xc += w * f.grid.center_flat(k).x1;
            }
            xc /= mass;
            // pull ~ (2 x_c)^(2s-3), so d(imbalance)/d(x_c) ~ (3-2s) W / x_c
            f.grid.center.x1 -= g * xc / ((3.0 - 2.0 * spec.s) * cfg.speed);
            table = std::make_unique<PlanePotentialTable>(f.grid, spec);
            geo = cell_geometry(f.grid);
        }
        traj.push_back({lam, 0.0, warm.mu, stage_iters, gap, stage_energy(f, *table, cfg, lam)});
    }
    return traj;
}

// Rotating stages. Same lattice pinning: the converged blob position -- and
// with it the angular impulse -- is a one-cell staircase in any continuous
// control, so no tilt can land L = 1 with a meaningful multiplier. The mesh
// slides radially until the converged state meets the impulse constraint
// exactly, and the rotation rate is the steady-rotation identity evaluated on
// the converged field, fed back as the tilt until self-consistent.
template <class Sym>
std::vector<LambdaStage> run_schedule_rotating(SectorField& f, const SolverConfig& cfg,
                                               Multipliers& warm, int& total_iters,
                                               Sym&& symmetrize) {
    const KernelSpec spec = cfg.kernel();
    auto table = std::make_unique<SectorPotentialTable>(f.grid, spec);
    CellGeometry geo = cell_geometry(f.grid);
    const double itol = std::min(cfg.tol_fix, cfg.tol_con);
    const auto schedule = lambda_schedule(cfg);
    std::vector<LambdaStage> traj;
    double alpha = image_alpha_estimate(f, spec);
    for (std::size_t si = 0; si < schedule.size(); ++si) {
        const double lam = schedule[si];
        const bool last = si + 1 == schedule.size();
        int stage_iters = 0;
        double gap = infinity;
        auto converge = [&]() {
            gap = infinity;
            int it = 0;
            while (it < cfg.max_iters && gap > cfg.tol_fix) {
                const auto out = iterate_step(f, *table, geo, cfg, lam, alpha, symmetrize);
                warm.mu = out.mu;
                gap = out.residual;
                ++it;
                ++stage_iters;
                ++total_iters;
            }
            if (gap > cfg.tol_fix)
                throw continuation_error("continuation stalled at lambda = " + fmt_g17(lam) +
                                             " (residual " + fmt_g17(gap) + " after " +
                                             std::to_string(it) + " iterations)",
                                         traj);
            for (int polish = 0; polish < 160 && gap > itol; ++polish) {
                const auto out = iterate_step(f, *table, geo, cfg, lam, alpha, symmetrize);
                warm.mu = out.mu;
                gap = out.residual;
                ++stage_iters;
                ++total_iters;
            }
        };
        const double ltol = last ? cfg.tol_con : std::max(cfg.tol_con, 1e-6);
        const double atol = last ? 1e-8 : 1e-4;
        for (int pass = 0;; ++pass) {
            converge();
            const double a_new = weak_rotation_rate(f, spec);
            const double eL = angular_momentum(f) - 1.0;
            if (std::abs(a_new - alpha) <= atol * std::max(1.0, std::abs(a_new)) &&
                std::abs(eL) <= ltol)
                break;  // field is converged under the recorded tilt
            if (pass >= 24)
                throw continuation_error("mesh positioning did not settle at lambda = " +
                                             fmt_g17(lam) + " (|L - 1| = " +
                                             fmt_g17(std::abs(eL)) + ")",
                                         traj);
            alpha = a_new;
            if (std::abs(eL) > ltol) {
                double rbar = 0.0;
                for (std::size_t k = 0; k < f.values.size(); ++k)
                    rbar += f.values[k] * f.grid.measure_flat(k) * f.grid.center_flat(k).norm();
                f.grid.r_shift -= eL / (2.0 * rbar);
                f.grid.validate();
                table = std::make_unique<SectorPotentialTable>(f.grid, spec);
                geo = cell_geometry(f.grid);
            }
        }
        warm.alpha = alpha;
        traj.push_back({lam, alpha, warm.mu, stage_iters, gap, stage_energy(f, *table, cfg, lam)});
    }
    return traj;
}

}  // namespace detail

// runs the full lambda schedule from the discretized seed profile, each stage
// warm-started from the previous one; diagnostics beyond the trajectory are
// left to solve_rotating / solve_travelling
inline RotatingSolution continuation_rotating(const SolverConfig& cfg) {
    cfg.validate();
    if (cfg.mode != SolverMode::Rotating)
        throw config_error("continuation_rotating requires rotating mode");
    SectorField f = initial_guess_rotating(cfg);
    {
        const double c = 1.0 / total_vorticity(f);
        for (double& v : f.values) v *= c;
    }
    Multipliers warm{};
    int total = 0;
    auto traj = detail::run_schedule_rotating(
        f, cfg, warm, total, [](const SectorField& g) { return detail::symmetrize_rotating(g); });
    RotatingSolution sol{cfg, std::move(f)};
    sol.multipliers = warm;
    sol.trajectory = std::move(traj);
    sol.iterations = total;
    sol.epsilon_bound_satisfied = cfg.epsilon_bound_satisfied();
    return sol;
}

inline TravellingSolution continuation_travelling(const SolverConfig& cfg) {
    cfg.validate();
    if (cfg.mode != SolverMode::Travelling)
        throw config_error("continuation_travelling requires travelling mode");
    PlaneField f = initial_guess_travelling(cfg);
    {
        const double c = 1.0 / total_vorticity(f);
        for (double& v : f.values) v *= c;
    }
    Multipliers warm{};
    int total = 0;
    auto traj = detail::run_schedule_travelling(
        f, cfg, warm, total, [](const PlaneField& g) { return detail::symmetrize_travelling(g); });
    TravellingSolution sol{cfg, std::move(f)};
    sol.multipliers = warm;
    sol.speed = cfg.speed;
    sol.distance = cfg.travel_distance();
    sol.trajectory = std::move(traj);
    sol.iterations = total;
    sol.epsilon_bound_satisfied = cfg.epsilon_bound_satisfied();
    return sol;
}

inline RotatingSolution solve_rotating(const SolverConfig& cfg) {
    RotatingSolution sol = continuation_rotating(cfg);
    const KernelSpec spec = cfg.kernel();
    const double lam = cfg.final_lambda_zero ? 0.0 : cfg.lambda_min;
    const double inv_eps2 = 1.0 / (cfg.epsilon * cfg.epsilon);

    // rebuild psi through the pointwise quadrature path, independent of the
    // table used while iterating
    std::vector<Vec2> centers(sol.field.values.size());
    for (std::size_t k = 0; k < centers.size(); ++k) centers[k] = sol.field.grid.center_flat(k);
    const std::vector<double> phi = riesz_potential(sol.field, spec, centers);

    double gap = 0.0, inter = 0.0;
    for (std::size_t k = 0; k < phi.size(); ++k) {
        const Vec2 x = centers[k];
        const double A = sol.field.grid.measure_flat(k);
        const double psi =
            phi[k] + 0.5 * sol.multipliers.alpha * x.norm2() - sol.multipliers.mu;
        gap += std::abs(inv_eps2 * eval_f_lambda(cfg.profile, lam, cfg.s, psi) - sol.field.values[k]) * A;
        inter += sol.field.values[k] * phi[k] * A;
    }
    sol.el_residual = gap;
    sol.energy = energy_prefactor(spec) * inter - penalty_integral(sol.field, cfg.profile, lam, cfg.s);
    sol.mass_error = std::abs(total_vorticity(sol.field) - 1.0);
    sol.angular_error = std::abs(angular_momentum(sol.field) - 1.0);
    sol.support = support_metrics(sol.field, 0.0);
    return sol;
}

inline TravellingSolution solve_travelling(const SolverConfig& cfg) {
    TravellingSolution sol = continuation_travelling(cfg);
    const KernelSpec spec = cfg.kernel();
    const double lam = cfg.final_lambda_zero ? 0.0 : cfg.lambda_min;
    const double inv_eps2 = 1.0 / (cfg.epsilon * cfg.epsilon);

    std::vector<Vec2> centers(sol.field.values.size());
    for (std::size_t k = 0; k < centers.size(); ++k) centers[k] = sol.field.grid.center_flat(k);
    const std::vector<double> phi = riesz_potential(sol.field, spec, centers);

    double gap = 0.0, inter = 0.0;
    for (std::size_t k = 0; k < phi.size(); ++k) {
        const double A = sol.field.grid.measure_flat(k);
        const double psi = phi[k] - cfg.speed * centers[k].x1 - sol.multipliers.mu;
        gap += std::abs(inv_eps2 * eval_f_lambda(cfg.profile, lam, cfg.s, psi) - sol.field.values[k]) * A;
        inter += sol.field.values[k] * phi[k] * A;
    }
    sol.el_residual = gap;
    sol.energy = energy_prefactor(spec) * inter - cfg.speed * impulse(sol.field) -
                 penalty_integral(sol.field, cfg.profile, lam, cfg.s);
    sol.mass_error = std::abs(total_vorticity(sol.field) - 1.0);
    sol.support = support_metrics(sol.field, 0.0);
    return sol;
}

// --- full-plane assembly -----------------------------------------------------

// N rotated copies of the sector field, sampled piecewise-constant on a
// centered Cartesian grid; total mass N (up to the sampling error)
inline PlaneField assemble_full_plane(const RotatingSolution& sol, int n_out) {
    const SectorGrid& sg = sol.field.grid;
    PlaneField out(CartesianGrid{{0.0, 0.0}, SectorGrid::r_max, n_out}, sol.field.epsilon);
    const double period = 2.0 * pi / sg.nfold;
    for (std::size_t k = 0; k < out.values.size(); ++k) {
        if (!out.grid.active_flat(k)) continue;
        const Vec2 x = out.grid.center_flat(k);
        const double r = x.norm();
        if (r <= SectorGrid::r_min + sg.r_shift || r >= SectorGrid::r_max + sg.r_shift) continue;
        double th = std::atan2(x.x2, x.x1);
        th -= period * std::round(th / period);
        const long c = detail::containing_cell(sg, {r * std::cos(th), r * std::sin(th)});
        if (c >= 0) out.values[k] = sol.field.values[static_cast<std::size_t>(c)];
    }
    return out;
}

// odd reflection across the x2-axis; signed, zero total mass
inline PlaneField assemble_full_plane(const TravellingSolution& sol, int n_out) {
    const CartesianGrid& hg = sol.field.grid;
    PlaneField out(CartesianGrid{{0.0, 0.0}, 1.5 * sol.distance, n_out}, sol.field.epsilon);
    for (std::size_t k = 0; k < out.values.size(); ++k) {
        if (!out.grid.active_flat(k)) continue;
        const Vec2 x = out.grid.center_flat(k);
        if (x.x1 == 0.0) continue;
        const double sgn = x.x1 > 0.0 ? 1.0 : -1.0;
        const long c = detail::containing_cell(hg, {std::abs(x.x1), x.x2});
        if (c >= 0 && hg.active_flat(static_cast<std::size_t>(c)))
            out.values[k] = sgn * sol.field.values[static_cast<std::size_t>(c)];
    }
    return out;
}

}  // namespace gsqg
