#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gsqg/kernels.hpp"

using namespace gsqg;
using Catch::Approx;

// Reference values computed independently with 30-digit arithmetic.
namespace {
constexpr double kC05 = 0.159154943091895335768883763373;  // 1/(2*pi)
constexpr double kC075 = 0.332967935501700261955760871273;
constexpr double kC09 = 0.813785550748526377873449387369;
constexpr double kPolar_s07_N3 = 0.995502983484693380273320112881;  // r=1.1 r'=0.9 tau=0.2
constexpr double kHalf_a = 0.106103295394596890512589175582;        // 1/(3*pi)
constexpr double kHalf_b = 0.098444986734829758863225360165;
}  // namespace

TEST_CASE("riesz_constant matches high-precision gamma evaluation") {
    CHECK(riesz_constant(0.5) == Approx(kC05).epsilon(1e-14));
    CHECK(riesz_constant(0.75) == Approx(kC075).epsilon(1e-13));
    CHECK(riesz_constant(0.9) == Approx(kC09).epsilon(1e-13));
    CHECK_THROWS_AS(riesz_constant(0.0), value_error);
    CHECK_THROWS_AS(riesz_constant(1.0), value_error);
    CHECK_THROWS_AS(riesz_constant(-0.2), value_error);
}

TEST_CASE("green_riesz values, homogeneity, singularity") {
    CHECK(green_riesz(0.5, {1.0, 0.0}) == Approx(kC05).epsilon(1e-14));
    CHECK(green_riesz(0.5, {0.0, 2.0}) == Approx(kC05 / 2.0).epsilon(1e-14));
    CHECK(green_riesz(0.75, {0.6, 0.8}) == Approx(kC075).epsilon(1e-13));

    for (double s : {0.5, 0.6, 0.9}) {
        const Vec2 z{0.3, -0.7};
        const double lam = 2.5;
        CHECK(green_riesz(s, lam * z) ==
              Approx(std::pow(lam, 2.0 * s - 2.0) * green_riesz(s, z)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(green_riesz(0.5, {0.0, 0.0}), singularity_error);
}

TEST_CASE("grad_green_riesz is the radial derivative of green_riesz") {
    for (double s : {0.5, 0.75}) {
        const Vec2 z{0.8, -0.45};
        const Vec2 g = grad_green_riesz(s, z);
        const double h = 1e-6;
        const double dx = (green_riesz(s, {z.x1 + h, z.x2}) - green_riesz(s, {z.x1 - h, z.x2})) /
                          (2.0 * h);
        const double dy = (green_riesz(s, {z.x1, z.x2 + h}) - green_riesz(s, {z.x1, z.x2 - h})) /
                          (2.0 * h);
        CHECK(g.x1 == Approx(dx).epsilon(1e-6));
        CHECK(g.x2 == Approx(dy).epsilon(1e-6));
    }
    CHECK_THROWS_AS(grad_green_riesz(0.5, {0.0, 0.0}), singularity_error);
}

TEST_CASE("rotate is counterclockwise") {
    const Vec2 a = rotate(0.0, {1.0, 0.0});
    CHECK(a.x1 == Approx(1.0));
    CHECK(a.x2 == Approx(0.0).margin(1e-15));
    const Vec2 b = rotate(pi / 2.0, {1.0, 0.0});
    CHECK(b.x1 == Approx(0.0).margin(1e-15));
    CHECK(b.x2 == Approx(1.0));
    const Vec2 c = rotate(2.0 * pi / 3.0, {1.0, 0.0});
    CHECK(c.x1 == Approx(-0.5).epsilon(1e-14));
    CHECK(c.x2 == Approx(std::sqrt(3.0) / 2.0).epsilon(1e-14));
}

TEST_CASE("nfold_kernel hand values and degeneracies") {
    // N=1 is the plain Green function
    CHECK(nfold_kernel(0.5, 1, {1.0, 0.2}, {0.3, -0.4}) ==
          Approx(green_riesz(0.5, Vec2{0.7, 0.6})).epsilon(1e-15));
    // N=2, s=1/2, both on the axis: distances 0.1 and 1.9
    CHECK(nfold_kernel(0.5, 2, {1.0, 0.0}, {0.9, 0.0}) ==
          Approx(kC05 * (1.0 / 0.1 + 1.0 / 1.9)).epsilon(1e-13));
    CHECK_THROWS_AS(nfold_kernel(0.5, 2, {1.0, 0.0}, {1.0, 0.0}), singularity_error);
    // coincidence with a *rotated* image must also be caught
    const Vec2 x{0.7, 0.3};
    CHECK_THROWS_AS(nfold_kernel(0.5, 3, x, rotate(-2.0 * pi / 3.0, x)), singularity_error);
}

TEST_CASE("nfold_kernel symmetry and joint-rotation invariance") {
    const double s = 0.75;
    const int N = 4;
    const Vec2 x{1.1, 0.15}, xp{0.8, -0.2};
    CHECK(nfold_kernel(s, N, x, xp) == Approx(nfold_kernel(s, N, xp, x)).epsilon(1e-13));
    const double phi = 2.0 * pi / N;
    CHECK(nfold_kernel(s, N, rotate(phi, x), rotate(phi, xp)) ==
          Approx(nfold_kernel(s, N, x, xp)).epsilon(1e-12));
}

TEST_CASE("halfplane_kernel hand values, positivity, axis limit") {
    CHECK(halfplane_kernel(0.5, {1.0, 0.0}, {2.0, 0.0}) == Approx(kHalf_a).epsilon(1e-13));
    CHECK(halfplane_kernel(0.5, {0.6, 0.4}, {1.1, -0.3}) == Approx(kHalf_b).epsilon(1e-13));
    // symmetric pair: compose from green_riesz directly
    const double direct = green_riesz(0.5, {0.0, 2.0}) - green_riesz(0.5, {-2.0, 2.0});
    CHECK(halfplane_kernel(0.5, {1.0, 1.0}, {1.0, -1.0}) == Approx(direct).epsilon(1e-14));

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.05, 3.0), v(-3.0, 3.0);
    for (int i = 0; i < 50; ++i) {
        const Vec2 a{u(rng), v(rng)}, b{u(rng), v(rng)};
        CHECK(halfplane_kernel(0.6, a, b) > 0.0);
    }
    // value -> 0 as x1 -> 0+
    CHECK(std::abs(halfplane_kernel(0.5, {1e-9, 0.7}, {0.9, -0.1})) < 1e-8);
    CHECK_THROWS_AS(halfplane_kernel(0.5, {1.0, 0.5}, {1.0, 0.5}), singularity_error);
}

TEST_CASE("polar_kernel delegates to nfold_kernel and is exactly even in tau") {
    CHECK(polar_kernel(0.7, 3, 1.1, 0.9, 0.2) == Approx(kPolar_s07_N3).epsilon(1e-13));
    // tau = 0 aligns the angles
    CHECK(polar_kernel(0.5, 4, 1.2, 0.8, 0.0) ==
          Approx(nfold_kernel(0.5, 4, {1.2, 0.0}, {0.8, 0.0})).epsilon(1e-15));

    for (int N : {2, 3, 5}) {
        for (double tau : {0.05, 0.21, 0.9 * pi / N}) {
            const double vp = polar_kernel(0.8, N, 1.3, 0.7, tau);
            const double vm = polar_kernel(0.8, N, 1.3, 0.7, -tau);
            CHECK(vp == vm);  // bit-exact by construction of the rotation table
        }
    }
}

TEST_CASE("polar_kernel decreases strictly in tau on (0, pi/N)") {
    for (int N : {2, 3, 4}) {
        const double s = 0.6, r = 1.05, rp = 0.95;
        double prev = polar_kernel(s, N, r, rp, 1e-3);
        for (int j = 1; j <= 12; ++j) {
            const double tau = 1e-3 + (pi / N - 2e-3) * j / 12.0;
            const double val = polar_kernel(s, N, r, rp, tau);
            CHECK(val < prev);
            prev = val;
        }
    }
}

TEST_CASE("KernelSpec validation and dispatch") {
    CHECK_THROWS_AS((KernelSpec{1.2, KernelMode::FreePlane, 1}).validate(), config_error);
    CHECK_THROWS_AS((KernelSpec{0.5, KernelMode::NFold, 1}).validate(), config_error);
    KernelSpec ok{0.5, KernelMode::NFold, 3};
    ok.validate();
    CHECK(evaluate_kernel(ok, {1.0, 0.1}, {0.9, -0.1}) ==
          Approx(nfold_kernel(0.5, 3, {1.0, 0.1}, {0.9, -0.1})).epsilon(1e-15));
    CHECK(energy_prefactor(ok) == Approx(1.5));
    CHECK(energy_prefactor(KernelSpec{0.5, KernelMode::FreePlane, 1}) == Approx(1.0));
    CHECK(energy_prefactor(KernelSpec{0.5, KernelMode::HalfPlaneOdd, 1}) == Approx(0.5));
}
