#pragma once

// Discretized vorticity fields: the sector grid for N-fold rotating states,
// the Cartesian disk grid for travelling pairs, constraint functionals, the
// zoom-in rescaling and support metrics. Potential evaluation lives in
// quadrature.hpp.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <type_traits>
#include <utility>
#include <vector>

#include "gsqg/common.hpp"

namespace gsqg {

// Uniform (r, theta) grid on S = {1/2 <= r <= 3/2, |theta| <= pi/(2N)}.
// Row-major by radius ring: flat index = i * n_theta + j.
struct SectorGrid {
    int nfold = 2;
    int n_r = 32;
    int n_theta = 32;
    // sub-cell radial slide of the whole mesh. The damped iteration pins the
    // blob to the cell lattice, so the continuation positions the lattice
    // itself to land the converged state exactly on the impulse constraint.
    double r_shift = 0.0;

    static constexpr double r_min = 0.5;
    static constexpr double r_max = 1.5;

    void validate() const {
        if (nfold < 2) throw config_error("sector grid requires N >= 2");
        if (n_r < 1 || n_theta < 1) throw config_error("sector grid needs positive cell counts");
        if (!(r_min + r_shift > 0.0) || !std::isfinite(r_shift))
            throw config_error("sector grid radial slide must keep the mesh off the origin");
    }

    double theta_half() const { return pi / (2.0 * nfold); }
    double dr() const { return (r_max - r_min) / n_r; }
    double dtheta() const { return 2.0 * theta_half() / n_theta; }
    double r(int i) const { return r_min + r_shift + (i + 0.5) * dr(); }
    // symmetric form: theta(n_theta-1-j) is the exact float negation of theta(j)
    double theta(int j) const { return (j - 0.5 * (n_theta - 1)) * dtheta(); }
    double measure(int i) const { return r(i) * dr() * dtheta(); }
    std::size_t size() const { return static_cast<std::size_t>(n_r) * n_theta; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n_theta + j; }
    Vec2 center(int i, int j) const {
        const double rr = r(i), th = theta(j);
        return {rr * std::cos(th), rr * std::sin(th)};
    }
    Vec2 center_flat(std::size_t k) const {
        return center(static_cast<int>(k) / n_theta, static_cast<int>(k) % n_theta);
    }
    double measure_flat(std::size_t k) const { return measure(static_cast<int>(k) / n_theta); }
    bool active_flat(std::size_t) const { return true; }
};

// Square cell grid of side 2*radius around `center`; a cell participates iff
// its center lies in the closed disk, and then counts with full area h^2.
// Row-major: flat index = i * n + j, i along x1, j along x2.
struct CartesianGrid {
    Vec2 center{1.0, 0.0};
    double radius = 0.5;
    int n = 64;

    void validate() const {
        if (!(radius > 0.0)) throw config_error("cartesian grid radius must be positive");
        if (n < 1) throw config_error("cartesian grid needs a positive cell count");
    }

    // travelling-pair convention: disk B_{d/2}((d,0)), h = d/n
    static CartesianGrid for_travelling(double d, int n) { return {{d, 0.0}, 0.5 * d, n}; }

    double h() const { return 2.0 * radius / n; }
    double x1(int i) const { return center.x1 + (i - 0.5 * (n - 1)) * h(); }
    double x2(int j) const { return center.x2 + (j - 0.5 * (n - 1)) * h(); }
    bool inside(int i, int j) const {
        const double dx = x1(i) - center.x1, dy = x2(j) - center.x2;
        return dx * dx + dy * dy <= radius * radius * (1.0 + 1e-14);
    }
    double measure(int /*i*/) const { return h() * h(); }
    std::size_t size() const { return static_cast<std::size_t>(n) * n; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * n + j; }
    Vec2 center_of(int i, int j) const { return {x1(i), x2(j)}; }
    Vec2 center_flat(std::size_t k) const {
        return center_of(static_cast<int>(k) / n, static_cast<int>(k) % n);
    }
    double measure_flat(std::size_t /*k*/) const { return h() * h(); }
    bool active_flat(std::size_t k) const {
        return inside(static_cast<int>(k) / n, static_cast<int>(k) % n);
    }
};

template <class Grid>
struct Field {
    Grid grid;
    std::vector<double> values;  // one per flat index; zero outside the active region
    double epsilon = 0.1;

    explicit Field(Grid g, double eps = 0.1)
        : grid(std::move(g)), values(grid.size(), 0.0), epsilon(eps) {}

    double& operator[](std::size_t k) { return values[k]; }
    double operator[](std::size_t k) const { return values[k]; }

    void check_nonnegative() const {
        for (double v : values)
            if (v < 0.0) throw value_error("vorticity field has a negative cell value");
    }
};

using SectorField = Field<SectorGrid>;
using PlaneField = Field<CartesianGrid>;

// M(omega) = integral of omega
template <class Grid>
double total_vorticity(const Field<Grid>& f) {
    double acc = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k)
        acc += f.values[k] * f.grid.measure_flat(k);
    return acc;
}

// L(omega) = integral of |x|^2 omega
template <class Grid>
double angular_momentum(const Field<Grid>& f) {
    double acc = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k)
        acc += f.values[k] * f.grid.center_flat(k).norm2() * f.grid.measure_flat(k);
    return acc;
}

// P(omega) = integral of x1 omega (half-plane convention: single copy)
inline double impulse(const PlaneField& f) {
    double acc = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k)
        acc += f.values[k] * f.grid.center_flat(k).x1 * f.grid.measure_flat(k);
    return acc;
}

// Free-form cell cloud produced by rescaling; positions (x - center)/eps,
// values eps^2 * omega, measures A/eps^2, so all cell sums are preserved.
struct ScatterField {
    std::vector<Vec2> pos;
    std::vector<double> value;
    std::vector<double> measure;
    double cell_width = 0.0;  // h/eps, the rescaled grid spacing
};

template <class Grid>
ScatterField rescale(const Field<Grid>& f, Vec2 center) {
    if (!(f.epsilon > 0.0)) throw value_error("rescale requires epsilon > 0");
    const double e = f.epsilon, e2 = e * e;
    ScatterField z;
    z.pos.reserve(f.values.size());
    z.value.reserve(f.values.size());
    z.measure.reserve(f.values.size());
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        const Vec2 x = f.grid.center_flat(k);
        z.pos.push_back({(x.x1 - center.x1) / e, (x.x2 - center.x2) / e});
        z.value.push_back(e2 * f.values[k]);
        z.measure.push_back(f.grid.measure_flat(k) / e2);
    }
    if constexpr (std::is_same_v<Grid, CartesianGrid>)
        z.cell_width = f.grid.h() / e;
    else
        z.cell_width = f.grid.dr() / e;
    return z;
}

inline double total_vorticity(const ScatterField& z) {
    double acc = 0.0;
    for (std::size_t k = 0; k < z.value.size(); ++k) acc += z.value[k] * z.measure[k];
    return acc;
}

struct SupportMetrics {
    bool empty = true;
    double diameter = 0.0;
    Vec2 centroid{0.0, 0.0};
    // (distance from centroid, cell mass) sorted by distance; total mass last
    std::vector<std::pair<double, double>> radial_mass;
    double total_mass = 0.0;

    // fraction of total mass within distance R of the centroid
    double mass_fraction(double R) const {
        if (total_mass <= 0.0) return 0.0;
        double acc = 0.0;
        for (const auto& [dist, m] : radial_mass) {
            if (dist > R) break;
            acc += m;
        }
        return acc / total_mass;
    }
};

template <class Grid>
SupportMetrics support_metrics(const Field<Grid>& f, double threshold) {
    if (threshold < 0.0) throw value_error("support threshold must be >= 0");
    SupportMetrics m;
    std::vector<Vec2> sup;
    double mass = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        const double v = f.values[k];
        if (v > threshold) sup.push_back(f.grid.center_flat(k));
        const double w = v * f.grid.measure_flat(k);
        const Vec2 x = f.grid.center_flat(k);
        mass += w;
        m1 += w * x.x1;
        m2 += w * x.x2;
    }
    if (sup.empty()) return m;
    m.empty = false;
    m.total_mass = mass;
    m.centroid = mass > 0.0 ? Vec2{m1 / mass, m2 / mass} : Vec2{0.0, 0.0};
    double d2max = 0.0;
    for (std::size_t a = 0; a < sup.size(); ++a)
        for (std::size_t b = a + 1; b < sup.size(); ++b)
            d2max = std::max(d2max, (sup[a] - sup[b]).norm2());
    m.diameter = std::sqrt(d2max);
    m.radial_mass.reserve(f.values.size());
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        const double w = f.values[k] * f.grid.measure_flat(k);
        if (w != 0.0) m.radial_mass.emplace_back((f.grid.center_flat(k) - m.centroid).norm(), w);
    }
    std::sort(m.radial_mass.begin(), m.radial_mass.end());
    return m;
}

}  // namespace gsqg
