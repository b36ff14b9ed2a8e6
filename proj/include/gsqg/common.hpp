#pragma once

// Shared basics: plane vectors, error taxonomy, deterministic helpers.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gsqg {

inline constexpr double pi = std::numbers::pi;
inline constexpr double infinity = std::numeric_limits<double>::infinity();

struct Vec2 {
    double x1 = 0.0;
    double x2 = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x1 + o.x1, x2 + o.x2}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x1 - o.x1, x2 - o.x2}; }
    constexpr Vec2 operator*(double c) const { return {c * x1, c * x2}; }
    constexpr Vec2 operator-() const { return {-x1, -x2}; }
    constexpr double dot(Vec2 o) const { return x1 * o.x1 + x2 * o.x2; }
    double norm() const { return std::hypot(x1, x2); }
    constexpr double norm2() const { return x1 * x1 + x2 * x2; }

    // (a1,a2)^perp = (a2,-a1)
    constexpr Vec2 perp() const { return {x2, -x1}; }

    Vec2 rotated(double angle) const {
        const double c = std::cos(angle), s = std::sin(angle);
        return {c * x1 - s * x2, s * x1 + c * x2};
    }

    // reflection across the vertical axis, (x1,x2) -> (-x1,x2)
    constexpr Vec2 mirrored() const { return {-x1, x2}; }
};

constexpr Vec2 operator*(double c, Vec2 v) { return {c * v.x1, c * v.x2}; }

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct config_error : error {
    using error::error;
};
struct value_error : error {
    using error::error;
};
// evaluation at (numerically) coincident points of a singular kernel
struct singularity_error : error {
    using error::error;
};
struct collision_error : error {
    using error::error;
};
struct convergence_error : error {
    using error::error;
};
struct io_error : error {
    using error::error;
};

// Round-trip exact decimal formatting used by every writer, so outputs are
// byte-identical across runs and thread counts.
inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline int env_thread_count() {
    if (const char* e = std::getenv("GSQG_THREADS")) {
        const int n = std::atoi(e);
        if (n >= 1) return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

// Static partition of [0,n); each index writes only its own slots, so the
// result does not depend on the worker count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const int nt = env_thread_count();
    if (nt <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const std::size_t chunk = std::max<std::size_t>(1, n / (4 * static_cast<std::size_t>(nt)));
    auto worker = [&] {
        for (;;) {
            const std::size_t begin = next.fetch_add(chunk);
            if (begin >= n) return;
            const std::size_t end = std::min(n, begin + chunk);
            for (std::size_t i = begin; i < end; ++i) body(i);
        }
    };
    pool.reserve(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace gsqg
