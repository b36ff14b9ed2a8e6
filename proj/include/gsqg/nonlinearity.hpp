#pragma once

// Vorticity profiles f (zero on tau <= 0, nondecreasing, sup = 1), their
// primitives F, Legendre-Fenchel conjugates J, and the penalized family
// f_lambda(tau) = f(tau) + lambda tau_+^s with its conjugate J_lambda.
//
// Conjugates are computed by monotone bracketing of the optimality condition
// f(t) >= sigma, never symbolically, so tabulated profiles go through the
// same code path as the built-in ones.

#include <cmath>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "gsqg/fields.hpp"

namespace gsqg {

enum class ProfileKind { Step, SmoothRamp, Tabulated };

class Nonlinearity {
  public:
    static Nonlinearity step() { return Nonlinearity(ProfileKind::Step, {}); }
    static Nonlinearity smooth_ramp() { return Nonlinearity(ProfileKind::SmoothRamp, {}); }

    // breakpoints (tau, f); piecewise linear from an implicit (0,0) anchor,
    // jumps at repeated tau, right-continuous, constant past the last entry
    static Nonlinearity tabulated(std::vector<std::pair<double, double>> pts) {
        std::vector<std::pair<double, double>> keep;
        double prev_tau = -infinity, prev_f = 0.0;
        for (const auto& [tau, f] : pts) {
            if (tau < prev_tau) throw value_error("tabulated profile: tau must be nondecreasing");
            if (f < prev_f) throw value_error("tabulated profile: f must be nondecreasing");
            if (tau <= 0.0 && f != 0.0)
                throw value_error("tabulated profile: f must vanish for tau <= 0");
            if (tau > 0.0 && f <= 0.0)
                throw value_error("tabulated profile: f must be positive for tau > 0");
            prev_tau = tau;
            prev_f = f;
            if (tau > 0.0) keep.push_back({tau, f});
        }
        if (keep.empty()) throw value_error("tabulated profile: no positive part");
        if (std::abs(keep.back().second - 1.0) > 1e-9)
            throw value_error("tabulated profile: sup f must equal 1 (normalize the table)");
        return Nonlinearity(ProfileKind::Tabulated, std::move(keep));
    }

    ProfileKind kind() const { return kind_; }

    double f(double tau) const {
        if (tau <= 0.0) return 0.0;
        switch (kind_) {
            case ProfileKind::Step: return 1.0;
            case ProfileKind::SmoothRamp: return std::tanh(tau);
            case ProfileKind::Tabulated: return tab_f(tau);
        }
        return 0.0;
    }

    double F(double tau) const {
        if (tau <= 0.0) return 0.0;
        switch (kind_) {
            case ProfileKind::Step: return tau;
            case ProfileKind::SmoothRamp:
                // log cosh without overflow
                return tau - std::numbers::ln2 + std::log1p(std::exp(-2.0 * tau));
            case ProfileKind::Tabulated: return tab_F(tau);
        }
        return 0.0;
    }

    // smallest t with f(t) >= sigma is reached by this abscissa for every
    // profile; only asymptotic-sup profiles (tanh) ever hit the cap
    static constexpr double bracket_cap = 1024.0;

  private:
    Nonlinearity(ProfileKind k, std::vector<std::pair<double, double>> tab)
        : kind_(k), tab_(std::move(tab)) {
        if (kind_ == ProfileKind::Tabulated) {
            cumF_.resize(tab_.size());
            double acc = 0.0, ptau = 0.0, pf = 0.0;
            for (std::size_t i = 0; i < tab_.size(); ++i) {
                acc += 0.5 * (pf + tab_[i].second) * (tab_[i].first - ptau);
                cumF_[i] = acc;
                ptau = tab_[i].first;
                pf = tab_[i].second;
            }
        }
    }

    double tab_f(double tau) const {
        // first entry with breakpoint > tau
        std::size_t hi = 0;
        while (hi < tab_.size() && tab_[hi].first <= tau) ++hi;
        if (hi == tab_.size()) return tab_.back().second;
        const double tau_hi = tab_[hi].first, f_hi = tab_[hi].second;
        const double tau_lo = hi == 0 ? 0.0 : tab_[hi - 1].first;
        const double f_lo = hi == 0 ? 0.0 : tab_[hi - 1].second;
        if (tau_hi == tau_lo) return f_hi;  // landing exactly on a jump column
        return f_lo + (f_hi - f_lo) * (tau - tau_lo) / (tau_hi - tau_lo);
    }

    double tab_F(double tau) const {
        std::size_t hi = 0;
        while (hi < tab_.size() && tab_[hi].first <= tau) ++hi;
        if (hi == tab_.size())
            return cumF_.back() + tab_.back().second * (tau - tab_.back().first);
        const double tau_lo = hi == 0 ? 0.0 : tab_[hi - 1].first;
        const double F_lo = hi == 0 ? 0.0 : cumF_[hi - 1];
        // integrate the linear piece from tau_lo to tau
        const double f_a = hi == 0 ? 0.0 : tab_[hi - 1].second;
        return F_lo + f_a * (tau - tau_lo) +
               0.5 * (tab_f(tau) - f_a) * (tau - tau_lo);
    }

    ProfileKind kind_;
    std::vector<std::pair<double, double>> tab_;
    std::vector<double> cumF_;
};

inline double eval_f(const Nonlinearity& nl, double tau) { return nl.f(tau); }
inline double primitive_F(const Nonlinearity& nl, double tau) { return nl.F(tau); }

inline double pow_plus(double tau, double s) { return tau > 0.0 ? std::pow(tau, s) : 0.0; }

// f_lambda(tau) = f(tau) + lambda tau_+^s
inline double eval_f_lambda(const Nonlinearity& nl, double lambda, double s, double tau) {
    if (lambda < 0.0) throw value_error("penalization weight must be >= 0");
    return nl.f(tau) + lambda * pow_plus(tau, s);
}

// F_lambda(tau) = F(tau) + lambda tau_+^{1+s}/(1+s)
inline double primitive_F_lambda(const Nonlinearity& nl, double lambda, double s, double tau) {
    if (lambda < 0.0) throw value_error("penalization weight must be >= 0");
    return nl.F(tau) + lambda * pow_plus(tau, 1.0 + s) / (1.0 + s);
}

namespace detail {

// J(sigma) = sup_t [sigma t - F(t)] for a nondecreasing subdifferential f:
// locate the smallest t with f(t) >= sigma by doubling + bisection, then read
// off sigma t - F(t). A failed bracket (bounded profile with asymptotic sup)
// evaluates at the cap, where the increment is below rounding.
template <class Fx, class FX>
double conjugate_by_bracketing(Fx&& f, FX&& F, double sigma, double sup_f) {
    if (sigma < 0.0) return infinity;
    if (sigma > sup_f) return infinity;
    if (sigma == 0.0) return 0.0;
    // unbounded profiles (lambda > 0) always bracket; only a bounded profile
    // that approaches its sup asymptotically stops at the cap
    const bool bounded = std::isfinite(sup_f);
    double hi = 1.0;
    while (f(hi) < sigma && (!bounded || hi < Nonlinearity::bracket_cap)) hi *= 2.0;
    double t_star;
    if (f(hi) < sigma) {
        t_star = hi;  // plateau: sup approached only asymptotically
    } else {
        double lo = 0.0;
        for (int it = 0; it < 200 && (hi - lo) > 1e-16 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (f(mid) >= sigma)
                hi = mid;
            else
                lo = mid;
        }
        t_star = hi;
    }
    // t = 0 is always admissible with value 0, so the sup is nonnegative
    return std::max(sigma * t_star - F(t_star), 0.0);
}

}  // namespace detail

// Fenchel conjugate of F; +infinity outside [0, sup f] (in-band IEEE inf).
inline double conjugate_J(const Nonlinearity& nl, double sigma) {
    return detail::conjugate_by_bracketing([&](double t) { return nl.f(t); },
                                           [&](double t) { return nl.F(t); }, sigma, 1.0);
}

// Conjugate of F_lambda; finite on all sigma >= 0 once lambda > 0.
inline double conjugate_J_lambda(const Nonlinearity& nl, double lambda, double s, double sigma) {
    if (lambda == 0.0) return conjugate_J(nl, sigma);
    if (lambda < 0.0) throw value_error("penalization weight must be >= 0");
    return detail::conjugate_by_bracketing(
        [&](double t) { return eval_f_lambda(nl, lambda, s, t); },
        [&](double t) { return primitive_F_lambda(nl, lambda, s, t); }, sigma, infinity);
}

// unique tau >= 0 with f_lambda(tau) = w (the jump abscissa if w falls in a
// jump gap); 0 for w = 0
inline double inverse_f_lambda(const Nonlinearity& nl, double lambda, double s, double w) {
    if (w < 0.0) throw value_error("inverse_f_lambda: w must be >= 0");
    if (!(lambda > 0.0)) throw value_error("inverse_f_lambda requires lambda > 0");
    if (w == 0.0) return 0.0;
    double hi = std::pow(w / lambda, 1.0 / s) + 1.0;
    while (eval_f_lambda(nl, lambda, s, hi) < w) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 200 && (hi - lo) > 1e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (eval_f_lambda(nl, lambda, s, mid) >= w)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

// penalty term J_{eps,lambda}(omega) = eps^-2 sum J_lambda(eps^2 omega) dA;
// +infinity when a cell exceeds the conjugate's finite domain at lambda = 0
template <class Grid>
double penalty_integral(const Field<Grid>& field, const Nonlinearity& nl, double lambda,
                        double s) {
    const double e2 = field.epsilon * field.epsilon;
    double acc = 0.0;
    for (std::size_t k = 0; k < field.values.size(); ++k) {
        if (field.values[k] == 0.0) continue;
        const double j = conjugate_J_lambda(nl, lambda, s, e2 * field.values[k]);
        if (j == infinity) return infinity;
        acc += j * field.grid.measure_flat(k);
    }
    return acc / e2;
}

// CSV rows `tau,f`, '#' comments allowed; validates assumption (A)
inline Nonlinearity load_tabulated_profile(std::istream& in) {
    std::vector<std::pair<double, double>> pts;
    std::string line;
    bool header_skipped = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_skipped && line.find("tau") != std::string::npos) {
            header_skipped = true;
            continue;
        }
        std::istringstream row(line);
        std::string a, b;
        if (!std::getline(row, a, ',') || !std::getline(row, b))
            throw io_error("tabulated profile: expected rows `tau,f`");
        try {
            pts.push_back({std::stod(a), std::stod(b)});
        } catch (const std::exception&) {
            throw io_error("tabulated profile: non-numeric row: " + line);
        }
    }
    if (pts.empty()) throw io_error("tabulated profile: empty input");
    return Nonlinearity::tabulated(std::move(pts));
}

}  // namespace gsqg
