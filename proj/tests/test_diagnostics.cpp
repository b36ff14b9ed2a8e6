#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gsqg/diagnostics.hpp"

using namespace gsqg;
using Catch::Approx;

namespace {

// bump-times-monomial value, for differencing against TestFunction::gradient
double phi_value(const detail::TestFunction& tf, Vec2 x) {
    const Vec2 y = x - tf.center;
    const double rho2 = y.norm2() / (tf.radius * tf.radius);
    if (rho2 >= 1.0) return 0.0;
    const double q = 1.0 - rho2;
    double m = 1.0;
    switch (tf.monomial) {
        case 0: break;
        case 1: m = x.x1; break;
        case 2: m = x.x2; break;
        case 3: m = x.x1 * x.x2; break;
        default: m = x.x1 * x.x1 - x.x2 * x.x2; break;
    }
    return q * q * q * m;
}

ScatterField lcg_scatter(int count) {
    ScatterField z;
    z.cell_width = 0.1;
    unsigned state = 12345u;
    const auto next = [&state] {
        state = 1664525u * state + 1013904223u;
        return (state >> 8) * (1.0 / 16777216.0);
    };
    for (int k = 0; k < count; ++k) {
        const double r = 2.0 * std::sqrt(next());  // area-uniform
        const double th = 2.0 * pi * next();
        z.pos.push_back({r * std::cos(th), r * std::sin(th)});
        z.value.push_back(next());
        z.measure.push_back(0.01);
    }
    return z;
}

}  // namespace

TEST_CASE("test catalogue: layout, support, and gradients") {
    REQUIRE_THROWS_AS(detail::test_catalogue({1.0, 0.0}, 0.75, 0), value_error);

    const auto cat = detail::test_catalogue({1.0, 0.0}, 0.75, 10);
    REQUIRE(cat.size() == 10);
    for (int t = 0; t < 10; ++t) {
        CHECK(cat[t].monomial == t % 5);
        CHECK(cat[t].radius == Approx(0.75 * (1.0 + 0.5 * (t / 5))));
    }

    // compact support: gradient vanishes outside the bump disk
    CHECK(cat[3].gradient({1.0 + 0.76, 0.0}).norm() == 0.0);
    CHECK(cat[3].gradient({1.0, -0.8}).norm() == 0.0);

    // gradient matches a central difference of the bump-monomial product
    for (int t : {1, 3, 4}) {
        const Vec2 x{1.0 + 0.3 * cat[t].radius, 0.4 * cat[t].radius};
        const double d = 1e-6;
        const Vec2 fd{(phi_value(cat[t], {x.x1 + d, x.x2}) - phi_value(cat[t], {x.x1 - d, x.x2})) /
                          (2.0 * d),
                      (phi_value(cat[t], {x.x1, x.x2 + d}) - phi_value(cat[t], {x.x1, x.x2 - d})) /
                          (2.0 * d)};
        const Vec2 g = cat[t].gradient(x);
        CHECK(g.x1 == Approx(fd.x1).margin(1e-7));
        CHECK(g.x2 == Approx(fd.x2).margin(1e-7));
    }

    CHECK(cat[0].gradient_max() > 0.0);
}

TEST_CASE("quadrature cloud: unit node weights and mass bookkeeping") {
    SectorField f(SectorGrid{3, 6, 6});
    for (std::size_t k = 0; k < f.values.size(); ++k) f.values[k] = 1.0 + 0.1 * k;
    const auto qc = detail::quad_cloud(f, 0.0);
    REQUIRE(qc.x.size() == f.values.size());
    double mass = 0.0;
    for (std::size_t i = 0; i < qc.w.size(); ++i) {
        mass += qc.w[i];
        double nodesum = 0.0;
        for (double w : qc.nodew[i]) nodesum += w;
        CHECK(nodesum == Approx(1.0).epsilon(1e-13));
    }
    CHECK(mass == Approx(total_vorticity(f)).epsilon(1e-13));

    PlaneField p(CartesianGrid::for_travelling(1.0, 8));
    for (std::size_t k = 0; k < p.values.size(); ++k)
        if (p.grid.active_flat(k)) p[k] = 0.5;
    const auto qp = detail::quad_cloud(p, 0.0);
    REQUIRE(!qp.x.empty());
    double pm = 0.0;
    for (std::size_t i = 0; i < qp.w.size(); ++i) {
        pm += qp.w[i];
        double nodesum = 0.0;
        for (double w : qp.nodew[i]) nodesum += w;
        CHECK(nodesum == Approx(1.0).epsilon(1e-13));
    }
    CHECK(pm == Approx(total_vorticity(p)).epsilon(1e-13));
}

TEST_CASE("weak residual: radial fields on the free plane are stationary") {
    CartesianGrid g{{0.0, 0.0}, 1.0, 48};
    PlaneField f(g);
    for (std::size_t k = 0; k < f.values.size(); ++k)
        if (g.center_flat(k).norm() < 0.5) f.values[k] = 1.0;

    CHECK(weak_residual(f, {0.5, KernelMode::FreePlane, 0}, 0.0, 10) < 1e-12);
    REQUIRE_THROWS_AS(weak_residual(f, {0.3, KernelMode::FreePlane, 0}, 0.0, 10), config_error);
}

TEST_CASE("rotating solution diagnostics: residual scale, sensitivity, reports") {
    SolverConfig cfg;
    cfg.mode = SolverMode::Rotating;
    cfg.s = 0.5;
    cfg.nfold = 3;
    cfg.epsilon = 0.15;
    cfg.resolution = 32;
    cfg.max_iters = 2000;
    const RotatingSolution sol = solve_rotating(cfg);

    const double w = weak_residual(sol, 10);
    const double h = sol.field.grid.dr();
    CHECK(w > 1e-4);       // not trivially zero
    CHECK(w / h < 0.5);    // a small multiple of the cell size
    CHECK(w < 5.0 * h);

    // doubling the rotation rate must unbalance the linear observables hard
    RotatingSolution off = sol;
    off.multipliers.alpha *= 2.0;
    CHECK(weak_residual(off, 10) / w > 10.0);

    const ConcentrationReport rep = concentration_report(sol);
    CHECK(rep.target_distance < 5e-3);
    CHECK(rep.mass_fraction[0] > 0.95);
    for (std::size_t k = 1; k < rep.mass_fraction.size(); ++k)
        CHECK(rep.mass_fraction[k] >= rep.mass_fraction[k - 1]);
    CHECK(rep.mass_fraction[3] >= 0.99);

    CHECK(radial_shape_check(sol) < 0.01);
}

TEST_CASE("travelling solution diagnostics") {
    SolverConfig cfg;
    cfg.mode = SolverMode::Travelling;
    cfg.s = 0.5;
    cfg.speed = pair_speed(1.0, 0.5);
    cfg.epsilon = 0.10;
    cfg.resolution = 48;
    cfg.max_iters = 2500;
    const TravellingSolution sol = solve_travelling(cfg);

    const double h = sol.field.grid.h();
    const double w = weak_residual(sol, 10);
    CHECK(w > 1e-3);
    CHECK(w < 5.0 * h);

    CHECK(concentration_report(sol).target_distance < 1e-3);
    CHECK(radial_shape_check(sol) < 0.01);
}

TEST_CASE("scaling summary: ordering, brackets, and validation") {
    ScalingReport rep;
    rep.rows = {{0.02, 0.091, 0.40, 0.9, 1e-3, 0.01},
                {0.08, 0.093, 0.30, 1.2, 2e-3, 0.04},
                {0.04, 0.092, 0.35, 1.1, 1e-3, 0.02}};
    detail::scaling_summary(rep);
    CHECK(rep.rows.front().epsilon == 0.08);
    CHECK(rep.rows.back().epsilon == 0.02);
    CHECK(rep.mu_bracket_ratio == Approx(0.40 / 0.30));
    CHECK(rep.diameter_bracket_ratio == Approx(1.2 / 0.9));
    CHECK(rep.alpha_gap_final == Approx(0.01));

    ScalingReport two;
    two.rows = {{0.08, 0, 1, 1, 0, 0}, {0.02, 0, 1, 1, 0, 0}};
    CHECK_THROWS_AS(detail::scaling_summary(two), config_error);

    ScalingReport narrow;
    narrow.rows = {{0.08, 0, 1, 1, 0, 0}, {0.06, 0, 1, 1, 0, 0}, {0.04, 0, 1, 1, 0, 0}};
    CHECK_THROWS_AS(detail::scaling_summary(narrow), config_error);
}

TEST_CASE("radial monotonicity defect") {
    REQUIRE_THROWS_AS(radial_monotonicity_defect(ScatterField{}), value_error);

    // radially nonincreasing rings: defect zero
    ScatterField rings;
    rings.cell_width = 0.1;
    for (int k = 0; k < 8; ++k) {
        const double r = 0.1 * (k + 0.5);
        const int nth = 8 * (k + 1);
        for (int j = 0; j < nth; ++j) {
            const double th = 2.0 * pi * j / nth;
            rings.pos.push_back({r * std::cos(th), r * std::sin(th)});
            rings.value.push_back(1.0 / (1.0 + k));
            rings.measure.push_back(2.0 * pi * r * 0.1 / nth);
        }
    }
    CHECK(radial_monotonicity_defect(rings) < 1e-12);

    // scrambled field: badly non-monotone
    CHECK(radial_monotonicity_defect(lcg_scatter(400)) > 0.5);
}
