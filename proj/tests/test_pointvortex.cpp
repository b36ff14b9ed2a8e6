#include <catch2/catch_amalgamated.hpp>

#include "gsqg/pointvortex.hpp"

using namespace gsqg;
using Catch::Approx;

// Closed-form reference values from 30-digit arithmetic.
namespace {
constexpr double kThomson[4][2] = {
    // N = 2..5, s = 0.5 / 0.75
    {0.0397887357729738339422209408431, 0.0588609712777343090827742588642},
    {0.0918881492369653415852210830522, 0.126500459785964831240497249718},
    {0.152328275292612092636620839719, 0.198856742956639201224269933113},
    {0.219057986225303236344396324185, 0.274262442977447209555584955482},
};
constexpr double kPairW_d1_s05 = 0.0397887357729738339422209408431;  // 1/(8 pi)
constexpr double kPairW_d13_s075 = 0.039711143756413530555025506312;
}  // namespace

TEST_CASE("thomson_angular_velocity matches the closed-form table") {
    for (int N = 2; N <= 5; ++N) {
        CHECK(thomson_angular_velocity(N, 0.5) == Approx(kThomson[N - 2][0]).epsilon(1e-13));
        CHECK(thomson_angular_velocity(N, 0.75) == Approx(kThomson[N - 2][1]).epsilon(1e-13));
    }
    CHECK_THROWS_AS(thomson_angular_velocity(1, 0.5), value_error);
}

TEST_CASE("induced velocity: equal pair co-rotates counterclockwise") {
    const PointVortexConfiguration c{{{1.0, 0.0}, {-1.0, 0.0}}, {1.0, 1.0}, 0.5};
    const Vec2 v0 = induced_velocity(c, 0);
    // at (1,0): purely vertical, positive (counterclockwise), magnitude alpha_T(2)
    CHECK(v0.x1 == Approx(0.0).margin(1e-15));
    CHECK(v0.x2 == Approx(kThomson[0][0]).epsilon(1e-13));
    const Vec2 v1 = induced_velocity(c, 1);
    CHECK(v1.x2 == Approx(-v0.x2).epsilon(1e-14));

    const PointVortexConfiguration lone{{{0.3, 0.2}}, {2.0}, 0.6};
    const Vec2 vz = induced_velocity(lone, 0);
    CHECK(vz.x1 == 0.0);
    CHECK(vz.x2 == 0.0);
    CHECK_THROWS_AS(induced_velocity(lone, 3), value_error);
}

TEST_CASE("induced velocity on the polygon equals the Thomson rate") {
    for (int N : {2, 3, 4, 5})
        for (double s : {0.5, 0.75}) {
            const PointVortexConfiguration c = thomson_polygon(N, s);
            for (std::size_t j = 0; j < c.positions.size(); ++j) {
                const Vec2 v = induced_velocity(c, j);
                // rigid rotation: v = alpha * x^perp with counterclockwise sense
                CHECK(v.norm() == Approx(thomson_angular_velocity(N, s)).epsilon(1e-12));
                CHECK(v.dot(c.positions[j]) == Approx(0.0).margin(1e-13));
                const double cross =
                    c.positions[j].x1 * v.x2 - c.positions[j].x2 * v.x1;
                CHECK(cross > 0.0);
            }
        }
}

TEST_CASE("opposite pair translates downward at speed W") {
    for (double s : {0.5, 0.75}) {
        const double d = 0.65;
        const PointVortexConfiguration c = opposite_pair(d, s);
        const Vec2 v0 = induced_velocity(c, 0), v1 = induced_velocity(c, 1);
        CHECK(v0.x1 == Approx(0.0).margin(1e-15));
        CHECK(v0.x2 == Approx(v1.x2).epsilon(1e-14));
        CHECK(v0.x2 == Approx(-pair_speed(d, s)).epsilon(1e-12));
    }
}

TEST_CASE("pair speed and distance closed forms") {
    CHECK(pair_speed(1.0, 0.5) == Approx(kPairW_d1_s05).epsilon(1e-13));
    CHECK(pair_speed(1.3, 0.75) == Approx(kPairW_d13_s075).epsilon(1e-13));
    for (double s : {0.5, 0.7}) {
        CHECK(pair_speed(2.0, s) ==
              Approx(pair_speed(1.0, s) / std::pow(2.0, 3.0 - 2.0 * s)).epsilon(1e-13));
        for (double W : {0.01, 0.04, 0.2})
            CHECK(pair_speed(pair_distance(W, s), s) == Approx(W).epsilon(1e-12));
    }
    CHECK_THROWS_AS(pair_speed(0.0, 0.5), value_error);
    CHECK_THROWS_AS(pair_distance(-1.0, 0.5), value_error);

    // d minimizes tau -> G_s(2 tau)/2 + W tau
    const double s = 0.6, W = 0.05;
    const double d = pair_distance(W, s);
    const auto obj = [&](double tau) {
        return 0.5 * green_riesz(s, {2.0 * tau, 0.0}) + W * tau;
    };
    double best_tau = 0.0, best = infinity;
    for (int i = 1; i <= 4000; ++i) {
        const double tau = 3.0 * i / 4000.0;
        if (obj(tau) < best) {
            best = obj(tau);
            best_tau = tau;
        }
    }
    CHECK(best_tau == Approx(d).margin(3.0 / 4000.0 + 1e-12));
}

TEST_CASE("rk4 reproduces rigid polygon rotation") {
    const int N = 3;
    const double s = 0.5, T = 0.5, dt = 1e-3;
    const PointVortexConfiguration c0 = thomson_polygon(N, s);
    const Trajectory tr = simulate(c0, T, dt);
    const double phi = thomson_angular_velocity(N, s) * T;
    for (int k = 0; k < N; ++k) {
        const Vec2 expect = rotate(phi, c0.positions[static_cast<std::size_t>(k)]);
        const Vec2 got = tr.positions.back()[static_cast<std::size_t>(k)];
        CHECK((got - expect).norm() < 1e-8);
    }
}

TEST_CASE("rk4 reproduces pair translation with the paper's sign") {
    const double d = 1.0, s = 0.5, T = 0.5, dt = 1e-3;
    const Trajectory tr = simulate(opposite_pair(d, s), T, dt);
    const double W = pair_speed(d, s);
    const Vec2 p0 = tr.positions.back()[0], p1 = tr.positions.back()[1];
    CHECK(p0.x1 == Approx(d).margin(1e-8));
    CHECK(p0.x2 == Approx(-W * T).margin(1e-8));
    CHECK(p1.x1 == Approx(-d).margin(1e-8));
    CHECK(p1.x2 == Approx(-W * T).margin(1e-8));
}

TEST_CASE("rk4 is fourth order in dt") {
    const PointVortexConfiguration c0 = thomson_polygon(4, 0.7);
    const double T = 0.25;
    const double phi = thomson_angular_velocity(4, 0.7) * T;
    const auto err = [&](double dt) {
        const Trajectory tr = simulate(c0, T, dt);
        double e = 0.0;
        for (int k = 0; k < 4; ++k)
            e = std::max(e, (tr.positions.back()[static_cast<std::size_t>(k)] -
                             rotate(phi, c0.positions[static_cast<std::size_t>(k)]))
                                .norm());
        return e;
    };
    const double e1 = err(0.05), e2 = err(0.025);
    CHECK(e2 < e1 / 12.0);  // ~16x for a 4th-order scheme
}

TEST_CASE("conserved quantities along the flow") {
    PointVortexConfiguration c{{{1.0, 0.1}, {-0.4, 0.8}, {-0.6, -0.9}},
                               {1.0, 0.7, 1.3},
                               0.6};
    const double h0 = hamiltonian(c);
    double imp10 = 0.0, imp20 = 0.0, ang0 = 0.0;
    for (std::size_t k = 0; k < c.positions.size(); ++k) {
        imp10 += c.circulations[k] * c.positions[k].x1;
        imp20 += c.circulations[k] * c.positions[k].x2;
        ang0 += c.circulations[k] * c.positions[k].norm2();
    }
    for (int n = 0; n < 500; ++n) c = step_rk4(c, 1e-3);
    double imp1 = 0.0, imp2 = 0.0, ang = 0.0;
    for (std::size_t k = 0; k < c.positions.size(); ++k) {
        imp1 += c.circulations[k] * c.positions[k].x1;
        imp2 += c.circulations[k] * c.positions[k].x2;
        ang += c.circulations[k] * c.positions[k].norm2();
    }
    CHECK(imp1 == Approx(imp10).margin(1e-8));
    CHECK(imp2 == Approx(imp20).margin(1e-8));
    CHECK(ang == Approx(ang0).margin(1e-8));
    CHECK(hamiltonian(c) == Approx(h0).margin(1e-8));
}

TEST_CASE("rotational equivariance of the flow") {
    const double phi = 0.77;
    PointVortexConfiguration a{{{1.0, 0.0}, {-0.5, 0.3}}, {1.0, 0.8}, 0.55};
    PointVortexConfiguration b = a;
    for (auto& p : b.positions) p = rotate(phi, p);
    for (int n = 0; n < 200; ++n) {
        a = step_rk4(a, 2e-3);
        b = step_rk4(b, 2e-3);
    }
    for (std::size_t k = 0; k < a.positions.size(); ++k)
        CHECK((rotate(phi, a.positions[k]) - b.positions[k]).norm() < 1e-10);
}

TEST_CASE("collisions and invalid configurations are rejected") {
    PointVortexConfiguration c{{{0.0, 0.0}, {1e-9, 0.0}}, {1.0, 1.0}, 0.5};
    CHECK_THROWS_AS(step_rk4(c, 1e-3), collision_error);
    PointVortexConfiguration dup{{{0.1, 0.2}, {0.1, 0.2}}, {1.0, 1.0}, 0.5};
    CHECK_THROWS_AS(dup.validate(), config_error);
    PointVortexConfiguration mism{{{0.1, 0.2}}, {1.0, 1.0}, 0.5};
    CHECK_THROWS_AS(mism.validate(), config_error);
}
