#pragma once

// Potential and interaction-energy quadrature. Midpoint rule off the
// diagonal; the cell containing the evaluation point contributes through the
// equivalent-disk rule (exact for a disk, O(h^{2s}) consistent):
//
//   contribution = value * c_s * (pi/s) * (A/pi)^s,   A = cell area.
//
// Midpoint alone is far too crude right next to the singularity: for a blob
// a few cells wide the relative error of neighbouring-cell terms is percent
// level, which the multiplier solve amplifies into garbage rotation rates.
// Polar source cells within near_field_reach cell widths of the target
// therefore contribute the Gauss average of the direct Green over the cell
// instead of its midpoint value (image and mirror terms stay midpoint: their
// distances are O(1)). This is the exact potential of the cellwise-constant
// density up to Gauss error. Cartesian cells keep plain midpoint everywhere:
// the masked indicator fields that live on those grids have an O(h^{3/2})
// jagged-boundary error that center sampling largely cancels, and the exact
// cell average would faithfully reproduce it instead.
//
// potential_at_cells reorganizes the very same sum through distance tables
// (kernel values depend only on index offsets), so it must agree with the
// point-by-point path to rounding error; a test pins 1e-12.

#include <array>
#include <vector>

#include "gsqg/fields.hpp"
#include "gsqg/kernels.hpp"

namespace gsqg {

// integral of G_s over the disk of area A, evaluated at its center
inline double disk_rule(double s, double area) {
    return riesz_constant(s) * (pi / s) * std::pow(area / pi, s);
}

namespace detail {

// sum over k >= 1 of G_s(x - Q_{2k pi/N} xc): the nonsingular images of a
// point's own cell under the N-fold symmetrization
inline double image_sum(double s, int N, Vec2 x, Vec2 xc) {
    if (N <= 1) return 0.0;
    const double c_s = riesz_constant(s);
    const double scale2 = std::max(x.norm2(), xc.norm2());
    const auto cs = nfold_table(N);
    const auto term = [&](int k) {
        const Vec2 rot{cs[static_cast<std::size_t>(k)].x1 * xc.x1 -
                           cs[static_cast<std::size_t>(k)].x2 * xc.x2,
                       cs[static_cast<std::size_t>(k)].x2 * xc.x1 +
                           cs[static_cast<std::size_t>(k)].x1 * xc.x2};
        const double dx = x.x1 - rot.x1, dy = x.x2 - rot.x2;
        const double d2 = dx * dx + dy * dy;
        if (singular_dist2(d2, scale2))
            throw singularity_error("image_sum: coincident rotated image");
        return green_from_dist2_c(d2, s, c_s);
    };
    double total = 0.0;
    for (int k = 1; 2 * k < N; ++k) total += term(k) + term(N - k);
    if (N % 2 == 0) total += term(N / 2);
    return total;
}

// how far (in units of the largest cell extent) the cell-averaged near-field
// rule reaches; beyond it plain midpoint is used
inline constexpr double near_field_reach = 4.5;

// 8-point Gauss-Legendre rule on [-1/2, 1/2] with unit total weight, nodes
// found by Newton iteration on P_8 (no tabulated constants to mistype)
struct GaussUnit {
    std::array<double, 8> node{}, weight{};
};

inline const GaussUnit& gauss_unit() {
    static const GaussUnit rule = [] {
        GaussUnit out{};
        constexpr int n = 8;
        for (int i = 0; i < n; ++i) {
            double x = std::cos(pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 64; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double step = p1 / dp;
                x -= step;
                if (std::abs(step) < 1e-15) break;
            }
            out.node[i] = 0.5 * x;
            out.weight[i] = 1.0 / ((1.0 - x * x) * dp * dp);
        }
        return out;
    }();
    return rule;
}

// average of G_s(x - y) over the polar cell centred at (r_c, th_c); the area
// element r dr dtheta makes the weight r/r_c (the cell measure is exactly
// r_c dr dtheta)
inline double averaged_green_polar(double s, Vec2 x, double r_c, double th_c, double dr,
                                   double dth) {
    const auto& g = gauss_unit();
    const double c_s = riesz_constant(s);
    double acc = 0.0;
    for (int a = 0; a < 8; ++a) {
        const double r = r_c + dr * g.node[a];
        const double wr = g.weight[a] * r / r_c;
        for (int b = 0; b < 8; ++b) {
            const double th = th_c + dth * g.node[b];
            const double dx = x.x1 - r * std::cos(th);
            const double dy = x.x2 - r * std::sin(th);
            acc += wr * g.weight[b] * green_from_dist2_c(dx * dx + dy * dy, s, c_s);
        }
    }
    return acc;
}

// effective kernel between the target point x and the source cell: the full
// midpoint kernel, with the direct term swapped for its cell average when the
// source cell is near
inline double pair_kernel(const KernelSpec& spec, Vec2 x, const SectorGrid& g,
                          std::size_t cell) {
    const int p = static_cast<int>(cell) / g.n_theta;
    const int q = static_cast<int>(cell) % g.n_theta;
    const double rc = g.r(p), thc = g.theta(q);
    const Vec2 yc{rc * std::cos(thc), rc * std::sin(thc)};
    const double full = evaluate_kernel(spec, x, yc);
    const double reach = near_field_reach * std::max(g.dr(), g.r_max * g.dtheta());
    if ((x - yc).norm2() > reach * reach) return full;
    return full - green_riesz(spec.s, x - yc) +
           averaged_green_polar(spec.s, x, rc, thc, g.dr(), g.dtheta());
}

inline double pair_kernel(const KernelSpec& spec, Vec2 x, const CartesianGrid& g,
                          std::size_t cell) {
    return evaluate_kernel(spec, x, g.center_flat(cell));
}

// index of the cell containing p, or -1
inline long containing_cell(const SectorGrid& g, Vec2 p) {
    const double r = p.norm();
    const double rlo = SectorGrid::r_min + g.r_shift;
    if (r < rlo || r > SectorGrid::r_max + g.r_shift) return -1;
    const double th = std::atan2(p.x2, p.x1);
    if (std::abs(th) > g.theta_half()) return -1;
    int i = static_cast<int>((r - rlo) / g.dr());
    int j = static_cast<int>((th + g.theta_half()) / g.dtheta());
    i = std::clamp(i, 0, g.n_r - 1);
    j = std::clamp(j, 0, g.n_theta - 1);
    return static_cast<long>(g.index(i, j));
}

inline long containing_cell(const CartesianGrid& g, Vec2 p) {
    const double h = g.h();
    const double u = (p.x1 - g.center.x1 + g.radius) / h;
    const double v = (p.x2 - g.center.x2 + g.radius) / h;
    if (u < 0.0 || v < 0.0 || u >= g.n || v >= g.n) return -1;
    const int i = std::clamp(static_cast<int>(u), 0, g.n - 1);
    const int j = std::clamp(static_cast<int>(v), 0, g.n - 1);
    if (!g.inside(i, j)) return -1;
    return static_cast<long>(g.index(i, j));
}

}  // namespace detail

// Quadrature of the kernel integral at arbitrary points. The cell containing
// a point gets the disk rule for its singular k=0 term; its image/mirror
// terms stay midpoint. Everything else is plain midpoint.
template <class Grid>
std::vector<double> riesz_potential(const Field<Grid>& f, const KernelSpec& spec,
                                    const std::vector<Vec2>& points) {
    spec.validate();
    std::vector<double> out(points.size(), 0.0);
    parallel_for(points.size(), [&](std::size_t pi) {
        const Vec2 p = points[pi];
        const long self = detail::containing_cell(f.grid, p);
        double acc = 0.0;
        for (std::size_t k = 0; k < f.values.size(); ++k) {
            const double v = f.values[k];
            if (v == 0.0) continue;
            const Vec2 xc = f.grid.center_flat(k);
            const double A = f.grid.measure_flat(k);
            if (static_cast<long>(k) == self) {
                acc += v * disk_rule(spec.s, A);
                if (spec.mode == KernelMode::NFold)
                    acc += v * A * detail::image_sum(spec.s, spec.nfold, p, xc);
                else if (spec.mode == KernelMode::HalfPlaneOdd)
                    acc -= v * A * green_riesz(spec.s, p.mirrored() - xc);
            } else {
                acc += v * A * detail::pair_kernel(spec, p, f.grid, k);
            }
        }
        out[pi] = acc;
    });
    return out;
}

// --- table-based evaluation at every cell center ---------------------------

// Sector: kernel value between cells depends on (ring, ring', |j-j'|) only.
// The (p,p,0) slot stores just the k>=1 image terms; the singular k=0 term is
// added per ring through the disk rule.
class SectorPotentialTable {
  public:
    SectorPotentialTable(const SectorGrid& grid, const KernelSpec& spec) : grid_(grid) {
        spec.validate();
        grid.validate();
        if (spec.mode != KernelMode::NFold || spec.nfold != grid.nfold)
            throw config_error("sector potential table requires the matching N-fold kernel");
        const int nr = grid.n_r, nt = grid.n_theta;
        table_.resize(static_cast<std::size_t>(nr) * nr * nt);
        selfdisk_.resize(static_cast<std::size_t>(nr));
        for (int p = 0; p < nr; ++p)
            selfdisk_[static_cast<std::size_t>(p)] = disk_rule(spec.s, grid.measure(p));
        const double c_s = riesz_constant(spec.s);
        const double reach = detail::near_field_reach * std::max(grid.dr(), grid.r_max * grid.dtheta());
        const double reach2 = reach * reach;
        parallel_for(static_cast<std::size_t>(nr) * nr, [&](std::size_t pq) {
            const int p = static_cast<int>(pq) / nr, q = static_cast<int>(pq) % nr;
            const double rp = grid.r(p), rq = grid.r(q);
            double* row = &table_[pq * static_cast<std::size_t>(nt)];
            for (int d = 0; d < nt; ++d) {
                if (p == q && d == 0) {
                    row[d] = detail::image_sum(spec.s, spec.nfold, {rp, 0.0}, {rp, 0.0});
                    continue;
                }
                const double dth = d * grid.dtheta();
                double val = polar_kernel(spec.s, spec.nfold, rp, rq, dth);
                const double dx = rp - rq * std::cos(dth), dy = rq * std::sin(dth);
                const double d2 = dx * dx + dy * dy;
                if (d2 <= reach2)
                    val += detail::averaged_green_polar(spec.s, {rp, 0.0}, rq, dth, grid.dr(),
                                                        grid.dtheta()) -
                           detail::green_from_dist2_c(d2, spec.s, c_s);
                row[d] = val;
            }
        });
    }

    const SectorGrid& grid() const { return grid_; }

    std::vector<double> apply(const std::vector<double>& values) const {
        const int nr = grid_.n_r, nt = grid_.n_theta;
        if (values.size() != grid_.size())
            throw value_error("potential table size mismatch");
        // weight rows by cell measure once and record each ring's span of
        // nonzero entries; cells outside it contribute exact zeros, so
        // skipping them leaves the sums bit-identical
        std::vector<double> wa(values.size());
        std::vector<int> qlo(static_cast<std::size_t>(nr), nt), qhi(static_cast<std::size_t>(nr), -1);
        for (int p = 0; p < nr; ++p) {
            const double A = grid_.measure(p);
            for (int q = 0; q < nt; ++q) {
                const double w = values[grid_.index(p, q)] * A;
                wa[grid_.index(p, q)] = w;
                if (w != 0.0) {
                    qlo[static_cast<std::size_t>(p)] = std::min(qlo[static_cast<std::size_t>(p)], q);
                    qhi[static_cast<std::size_t>(p)] = std::max(qhi[static_cast<std::size_t>(p)], q);
                }
            }
        }
        std::vector<double> phi(values.size(), 0.0);
        parallel_for(static_cast<std::size_t>(nr), [&](std::size_t iu) {
            const int i = static_cast<int>(iu);
            double* out = &phi[grid_.index(i, 0)];
            for (int p = 0; p < nr; ++p) {
                const int lo = qlo[static_cast<std::size_t>(p)], hi = qhi[static_cast<std::size_t>(p)];
                if (hi < lo) continue;
                const double* row =
                    &table_[(static_cast<std::size_t>(i) * nr + p) * static_cast<std::size_t>(nt)];
                const double* w = &wa[grid_.index(p, 0)];
                for (int j = 0; j < nt; ++j) {
                    double acc = 0.0;
                    for (int q = lo; q <= hi; ++q) acc += w[q] * row[std::abs(j - q)];
                    out[j] += acc;
                }
            }
            const double disk = selfdisk_[iu];
            for (int j = 0; j < nt; ++j) out[j] += disk * values[grid_.index(i, j)];
        });
        return phi;
    }

  private:
    SectorGrid grid_;
    std::vector<double> table_;     // (p*nr + q)*nt + d
    std::vector<double> selfdisk_;  // per ring
};

// Cartesian: direct-distance table D[|di|][|dj|] plus, in half-plane mode,
// the mirror table R[i+i'+1][|dj|] (the image distance depends on i+i').
class PlanePotentialTable {
  public:
    PlanePotentialTable(const CartesianGrid& grid, const KernelSpec& spec)
        : grid_(grid), mirror_(spec.mode == KernelMode::HalfPlaneOdd) {
        spec.validate();
        grid.validate();
        if (spec.mode == KernelMode::NFold)
            throw config_error("plane potential table supports FreePlane or HalfPlaneOdd");
        const int n = grid.n;
        const double h = grid.h();
        const double c_s = riesz_constant(spec.s);
        selfdisk_ = disk_rule(spec.s, h * h);
        direct_.assign(static_cast<std::size_t>(n) * n, 0.0);
        for (int di = 0; di < n; ++di)
            for (int dj = 0; dj < n; ++dj) {
                if (di == 0 && dj == 0) continue;  // self term handled by the disk rule
                const double d2 = (di * di + dj * dj) * h * h;
                direct_[static_cast<std::size_t>(di) * n + dj] =
                    detail::green_from_dist2_c(d2, spec.s, c_s);
            }
        if (mirror_) {
            if (grid.center.x1 < grid.radius)
                throw config_error("half-plane grid crosses the symmetry axis");
            // x1(i) + x1(i') = 2*center.x1 + (m - (n-1)) * h with m = i + i'
            mirror_tab_.assign(static_cast<std::size_t>(2 * n) * n, 0.0);
            for (int m = 0; m < 2 * n - 1; ++m)
                for (int dj = 0; dj < n; ++dj) {
                    const double sx = 2.0 * grid.center.x1 + (m - (n - 1)) * h;
                    const double d2 = sx * sx + dj * dj * h * h;
                    mirror_tab_[static_cast<std::size_t>(m) * n + dj] =
                        detail::green_from_dist2_c(d2, spec.s, c_s);
                }
        }
    }

    const CartesianGrid& grid() const { return grid_; }

    std::vector<double> apply(const std::vector<double>& values) const {
        const int n = grid_.n;
        if (values.size() != grid_.size()) throw value_error("potential table size mismatch");
        const double A = grid_.h() * grid_.h();
        std::vector<double> phi(values.size(), 0.0);
        parallel_for(static_cast<std::size_t>(n), [&](std::size_t iu) {
            const int i = static_cast<int>(iu);
            for (int j = 0; j < n; ++j) {
                double acc = 0.0;
                for (int ip = 0; ip < n; ++ip) {
                    const double* drow = &direct_[static_cast<std::size_t>(std::abs(i - ip)) * n];
                    const double* mrow =
                        mirror_ ? &mirror_tab_[static_cast<std::size_t>(i + ip) * n] : nullptr;
                    const double* w = &values[grid_.index(ip, 0)];
                    for (int jp = 0; jp < n; ++jp) {
                        if (w[jp] == 0.0) continue;
                        const int dj = std::abs(j - jp);
                        double kern = drow[dj];
                        if (mirror_) kern -= mrow[dj];
                        acc += w[jp] * kern;
                    }
                }
                double out = acc * A + selfdisk_ * values[grid_.index(i, j)];
                phi[grid_.index(i, j)] = out;
            }
        });
        return phi;
    }

  private:
    CartesianGrid grid_;
    bool mirror_;
    double selfdisk_ = 0.0;
    std::vector<double> direct_;      // di*n + dj
    std::vector<double> mirror_tab_;  // (i+i'+1)*n + dj
};

inline std::vector<double> potential_at_cells(const SectorField& f, const KernelSpec& spec) {
    return SectorPotentialTable(f.grid, spec).apply(f.values);
}

inline std::vector<double> potential_at_cells(const PlaneField& f, const KernelSpec& spec) {
    return PlanePotentialTable(f.grid, spec).apply(f.values);
}

// prefactor * double-sum; the diagonal uses the same disk rule as the
// potential so the two organizations are mutually consistent
template <class Grid>
double interaction_energy(const Field<Grid>& f, const KernelSpec& spec) {
    const std::vector<double> phi = potential_at_cells(f, spec);
    double acc = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k)
        acc += f.values[k] * phi[k] * f.grid.measure_flat(k);
    return energy_prefactor(spec) * acc;
}

}  // namespace gsqg
