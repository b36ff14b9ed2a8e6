#pragma once

// Closed-form Riesz kernels: free-plane Green function G_s, N-fold rotational
// sum K_s, half-plane odd reflection Ḡ_s, and the polar form V_s.
//
// Evaluators never regularize: a (numerically) coincident singular pair raises
// singularity_error and quadrature code must treat the diagonal itself.

#include <cmath>
#include <vector>

#include "gsqg/common.hpp"

namespace gsqg {

enum class KernelMode { FreePlane, NFold, HalfPlaneOdd };

struct KernelSpec {
    double s = 0.5;
    KernelMode mode = KernelMode::FreePlane;
    int nfold = 1;  // N, used only in NFold mode

    void validate() const {
        if (!(s > 0.0 && s < 1.0)) throw config_error("kernel exponent s must lie in (0,1)");
        if (mode == KernelMode::NFold && nfold < 2)
            throw config_error("N-fold kernel requires N >= 2");
    }
};

// c_s = Gamma(1-s) / (2^{2s} pi Gamma(s))
inline double riesz_constant(double s) {
    if (!(s > 0.0 && s < 1.0)) throw value_error("riesz_constant: s must lie in (0,1)");
    return std::tgamma(1.0 - s) / (std::pow(2.0, 2.0 * s) * pi * std::tgamma(s));
}

namespace detail {

// Relative coincidence test: |x-x'|^2 below 1e-24 * scale counts as singular.
// Rotated images of a point rarely subtract to exact zero in floats, so an
// absolute zero test would let near-infinite terms through.
inline bool singular_dist2(double dist2, double scale2) {
    return dist2 <= 1e-24 * std::max(scale2, 1e-300);
}

// c_s |z|^{2s-2} = c_s (|z|^2)^{s-1}, with c_s hoisted out of kernel sums
inline double green_from_dist2_c(double dist2, double s, double c_s) {
    return c_s * std::pow(dist2, s - 1.0);
}

inline double green_from_dist2(double dist2, double s) {
    return green_from_dist2_c(dist2, s, riesz_constant(s));
}

// Rotation table for the N-fold sum, symmetrized so that entries k and N-k
// are exact float mirrors (c equal, s negated). Together with pairwise
// summation in nfold_kernel this makes V_s(r,r',-tau) == V_s(r,r',tau)
// bit-for-bit, not just up to rounding.
inline std::vector<Vec2> nfold_table(int N) {
    std::vector<Vec2> cs(static_cast<std::size_t>(N));
    cs[0] = {1.0, 0.0};
    for (int k = 1; 2 * k <= N; ++k) {
        const double a = 2.0 * pi * k / N;
        cs[static_cast<std::size_t>(k)] = {std::cos(a), std::sin(a)};
        cs[static_cast<std::size_t>(N - k)] = {cs[k].x1, -cs[k].x2};
    }
    return cs;
}

}  // namespace detail

inline double green_riesz(double s, Vec2 z) {
    const double d2 = z.norm2();
    if (d2 == 0.0) throw singularity_error("green_riesz at z = 0");
    return detail::green_from_dist2(d2, s);
}

// grad G_s(z) = c_s (2s-2) |z|^{2s-4} z
inline Vec2 grad_green_riesz(double s, Vec2 z) {
    const double d2 = z.norm2();
    if (d2 == 0.0) throw singularity_error("grad_green_riesz at z = 0");
    const double c = riesz_constant(s) * (2.0 * s - 2.0) * std::pow(d2, s - 2.0);
    return {c * z.x1, c * z.x2};
}

// counterclockwise rotation by phi
inline Vec2 rotate(double phi, Vec2 x) { return x.rotated(phi); }

// K_s(x,x') = sum_{k=0}^{N-1} G_s(x - Q_{2k pi/N} x'). N=1 degenerates to G_s.
inline double nfold_kernel(double s, int N, Vec2 x, Vec2 xp) {
    if (N < 1) throw value_error("nfold_kernel: N must be >= 1");
    const double scale2 = std::max(x.norm2(), xp.norm2());
    const double c_s = riesz_constant(s);
    const auto cs = detail::nfold_table(N);
    const auto term = [&](int k) {
        const Vec2 rot{cs[static_cast<std::size_t>(k)].x1 * xp.x1 -
                           cs[static_cast<std::size_t>(k)].x2 * xp.x2,
                       cs[static_cast<std::size_t>(k)].x2 * xp.x1 +
                           cs[static_cast<std::size_t>(k)].x1 * xp.x2};
        const double dx = x.x1 - rot.x1, dy = x.x2 - rot.x2;
        const double d2 = dx * dx + dy * dy;
        if (detail::singular_dist2(d2, scale2))
            throw singularity_error("nfold_kernel: x coincides with a rotated image of x'");
        return detail::green_from_dist2_c(d2, s, c_s);
    };
    // paired order (k, N-k): keeps the sum exactly even under x2-reflection
    double total = term(0);
    for (int k = 1; 2 * k < N; ++k) total += term(k) + term(N - k);
    if (N % 2 == 0 && N > 1) total += term(N / 2);
    return total;
}

// Ḡ_s(x,x') = G_s(x-x') - G_s(x̄-x'), x̄ = (-x1, x2); right half-plane only.
inline double halfplane_kernel(double s, Vec2 x, Vec2 xp) {
    const double scale2 = std::max(x.norm2(), xp.norm2());
    const Vec2 d = x - xp;
    const double d2 = d.norm2();
    if (detail::singular_dist2(d2, scale2))
        throw singularity_error("halfplane_kernel at x = x'");
    const Vec2 m = x.mirrored() - xp;
    const double m2 = m.norm2();
    if (detail::singular_dist2(m2, scale2))
        throw singularity_error("halfplane_kernel: x' coincides with the mirror image of x");
    const double c_s = riesz_constant(s);
    return detail::green_from_dist2_c(d2, s, c_s) - detail::green_from_dist2_c(m2, s, c_s);
}

// V_s(r,r',tau) = K_s((r,0), (r' cos(-tau), r' sin(-tau)))
inline double polar_kernel(double s, int N, double r, double rp, double tau) {
    const Vec2 x{r, 0.0};
    const Vec2 xp{rp * std::cos(tau), rp * -std::sin(tau)};
    return nfold_kernel(s, N, x, xp);
}

inline double evaluate_kernel(const KernelSpec& spec, Vec2 x, Vec2 xp) {
    switch (spec.mode) {
        case KernelMode::FreePlane: return green_riesz(spec.s, x - xp);
        case KernelMode::NFold: return nfold_kernel(spec.s, spec.nfold, x, xp);
        case KernelMode::HalfPlaneOdd: return halfplane_kernel(spec.s, x, xp);
    }
    throw value_error("evaluate_kernel: unknown mode");
}

// sum(N/2, 1, 1/2)-prefactor of the quadratic energy for each functional
inline double energy_prefactor(const KernelSpec& spec) {
    switch (spec.mode) {
        case KernelMode::FreePlane: return 1.0;  // interaction functional I_s
        case KernelMode::NFold: return 0.5 * spec.nfold;
        case KernelMode::HalfPlaneOdd: return 0.5;
    }
    throw value_error("energy_prefactor: unknown mode");
}

}  // namespace gsqg
