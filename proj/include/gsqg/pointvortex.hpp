#pragma once

// Point-vortex oracle: induced velocities of the singular gSQG model, the
// closed-form Thomson polygon angular velocity and pair distance/speed
// relation, and a fixed-step RK4 integrator for rigid-motion checks.

#include <cmath>
#include <vector>

#include "gsqg/kernels.hpp"

namespace gsqg {

struct PointVortexConfiguration {
    std::vector<Vec2> positions;
    std::vector<double> circulations;
    double s = 0.5;

    void validate() const {
        if (positions.size() != circulations.size())
            throw config_error("point-vortex: positions and circulations must pair up");
        if (!(s > 0.0 && s < 1.0)) throw config_error("point-vortex: s must lie in (0,1)");
        for (std::size_t a = 0; a < positions.size(); ++a)
            for (std::size_t b = a + 1; b < positions.size(); ++b)
                if ((positions[a] - positions[b]).norm2() == 0.0)
                    throw config_error("point-vortex: coincident vortices");
    }

    double min_separation() const {
        double d2 = infinity_sep;
        for (std::size_t a = 0; a < positions.size(); ++a)
            for (std::size_t b = a + 1; b < positions.size(); ++b)
                d2 = std::min(d2, (positions[a] - positions[b]).norm2());
        return std::sqrt(d2);
    }

  private:
    static constexpr double infinity_sep = 1e300;
};

// unit circulations at the unit-circle N-gon vertices, first vertex at (r, 0)
inline PointVortexConfiguration thomson_polygon(int N, double s, double radius = 1.0) {
    if (N < 2) throw config_error("thomson polygon needs N >= 2");
    PointVortexConfiguration c;
    c.s = s;
    for (int k = 0; k < N; ++k) {
        const double a = 2.0 * pi * k / N;
        c.positions.push_back({radius * std::cos(a), radius * std::sin(a)});
        c.circulations.push_back(1.0);
    }
    return c;
}

// circulation +1 at (d, 0), -1 at the mirror point (-d, 0)
inline PointVortexConfiguration opposite_pair(double d, double s) {
    if (!(d > 0.0)) throw config_error("pair separation must be positive");
    return {{{d, 0.0}, {-d, 0.0}}, {1.0, -1.0}, s};
}

// v_j = sum_{k != j} Gamma_k grad^perp G_s(x_j - x_k), perp = (a2, -a1)
inline Vec2 induced_velocity(const PointVortexConfiguration& c, std::size_t j) {
    if (j >= c.positions.size()) throw value_error("induced_velocity: index out of range");
    Vec2 v{0.0, 0.0};
    for (std::size_t k = 0; k < c.positions.size(); ++k) {
        if (k == j) continue;
        const Vec2 g = grad_green_riesz(c.s, c.positions[j] - c.positions[k]);
        v = v + c.circulations[k] * g.perp();
    }
    return v;
}

// alpha_T = sum_{k=1}^{N-1} c_s (1-s) / |(1,0) - Q_{2k pi/N}(1,0)|^{2-2s},
// with |(1,0) - Q_phi (1,0)| = 2 sin(phi/2)
inline double thomson_angular_velocity(int N, double s) {
    if (N < 2) throw value_error("thomson_angular_velocity needs N >= 2");
    const double c_s = riesz_constant(s);
    double acc = 0.0;
    for (int k = 1; k < N; ++k) {
        const double chord = 2.0 * std::sin(pi * k / N);
        acc += c_s * (1.0 - s) / std::pow(chord, 2.0 - 2.0 * s);
    }
    return acc;
}

// W = Gamma(2-s) / (4 pi Gamma(s) d^{3-2s})
inline double pair_speed(double d, double s) {
    if (!(d > 0.0)) throw value_error("pair_speed: d must be positive");
    return std::tgamma(2.0 - s) / (4.0 * pi * std::tgamma(s) * std::pow(d, 3.0 - 2.0 * s));
}

// d = (Gamma(2-s) / (4 pi W Gamma(s)))^{1/(3-2s)}
inline double pair_distance(double W, double s) {
    if (!(W > 0.0)) throw value_error("pair_distance: W must be positive");
    return std::pow(std::tgamma(2.0 - s) / (4.0 * pi * W * std::tgamma(s)), 1.0 / (3.0 - 2.0 * s));
}

namespace detail {

inline std::vector<Vec2> velocities(const PointVortexConfiguration& c) {
    std::vector<Vec2> v(c.positions.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = induced_velocity(c, j);
    return v;
}

}  // namespace detail

inline PointVortexConfiguration step_rk4(const PointVortexConfiguration& c, double dt) {
    if (!(dt > 0.0)) throw value_error("step_rk4: dt must be positive");
    if (c.min_separation() < 1e-8) throw collision_error("point vortices about to collide");
    const auto shifted = [&](const std::vector<Vec2>& k, double h) {
        PointVortexConfiguration tmp = c;
        for (std::size_t j = 0; j < tmp.positions.size(); ++j)
            tmp.positions[j] = tmp.positions[j] + h * k[j];
        return tmp;
    };
    const std::vector<Vec2> k1 = detail::velocities(c);
    const std::vector<Vec2> k2 = detail::velocities(shifted(k1, 0.5 * dt));
    const std::vector<Vec2> k3 = detail::velocities(shifted(k2, 0.5 * dt));
    const std::vector<Vec2> k4 = detail::velocities(shifted(k3, dt));
    PointVortexConfiguration out = c;
    for (std::size_t j = 0; j < out.positions.size(); ++j)
        out.positions[j] =
            out.positions[j] + (dt / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    return out;
}

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<Vec2>> positions;  // one snapshot per recorded time
};

inline Trajectory simulate(PointVortexConfiguration c, double T, double dt) {
    if (!(dt > 0.0) || !(T > 0.0)) throw value_error("simulate: T and dt must be positive");
    c.validate();
    Trajectory tr;
    const auto record = [&](double t) {
        tr.times.push_back(t);
        tr.positions.push_back(c.positions);
    };
    record(0.0);
    const long nsteps = std::lround(T / dt);
    for (long n = 1; n <= nsteps; ++n) {
        c = step_rk4(c, dt);
        record(n * dt);
    }
    return tr;
}

// interaction Hamiltonian sum_{j<k} Gamma_j Gamma_k G_s(x_j - x_k)
inline double hamiltonian(const PointVortexConfiguration& c) {
    double acc = 0.0;
    for (std::size_t a = 0; a < c.positions.size(); ++a)
        for (std::size_t b = a + 1; b < c.positions.size(); ++b)
            acc += c.circulations[a] * c.circulations[b] *
                   green_riesz(c.s, c.positions[a] - c.positions[b]);
    return acc;
}

}  // namespace gsqg
