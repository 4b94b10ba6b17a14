#pragma once

// Backstepping boundary feedback for y_t = D y_zz + p y, y(t,1) = 0, actuated
// at z = 0. The transform x = y + int_z^1 k(z,s) y(s) ds maps the plant to the
// target x_t = D x_zz - c x; its inverse is y = x + int_z^1 l(z,s) x(s) ds.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "issgain/disturbance.hpp"
#include "issgain/error.hpp"
#include "issgain/gains.hpp"
#include "issgain/grid.hpp"
#include "issgain/pde_sim.hpp"
#include "issgain/sturm_liouville.hpp"
#include "issgain/tridiagonal.hpp"

namespace issgain {

enum class KernelDirection { forward, inverse };

/// Kernel samples on the triangle z_i <= s_j of a uniform grid.
struct Kernel {
    Grid grid;
    KernelDirection direction = KernelDirection::forward;
    double lambda_bar = 0.0;  // (p + c)/D
    std::vector<double> values;  // row-major (M+1)^2, entries with j < i unused
    double norm = 0.0;           // sqrt(int_0^1 int_z^1 k^2 ds dz)
    std::size_t iterations = 0;

    double operator()(std::size_t i, std::size_t j) const { return values[i * grid.size() + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * grid.size() + j]; }
};

struct ClosedLoopConfig {
    double D = 1.0;
    double p = 0.0;  // plant reaction rate
    double c = 0.0;  // target damping, c >= 0
    Disturbance d = Disturbance::constant(0.0);

    double lambda_bar() const { return (p + c) / D; }

    void validate() const {
        require(D > 0.0, ErrorKind::InvalidArgument, "D must be positive");
        require(c >= 0.0, ErrorKind::InvalidArgument, "c must be >= 0");
    }
};

namespace detail {

/// int_{z_i}^{z_j} a(t) b(t) dt for spans of at most three intervals. Each
/// factor is interpolated by the cubic through four consecutive samples inside
/// its valid index range [lo, hi] and the product is integrated by 4-point
/// Gauss-Legendre. Composite Simpson degrades to the trapezoid on such spans.
template <class A, class B>
double short_span_integral(std::size_t i, std::size_t j, double h, A&& a, std::size_t a_lo, std::size_t a_hi,
                           B&& b, std::size_t b_lo, std::size_t b_hi) {
    if (j == i) return 0.0;
    auto interpolant = [&](auto&& f, std::size_t lo, std::size_t hi) {
        const std::size_t count = std::min<std::size_t>(4, hi - lo + 1);
        std::size_t start = i > lo ? i - 1 : lo;
        start = std::min(start, hi + 1 - count);
        std::array<double, 4> x{}, y{};
        for (std::size_t q = 0; q < count; ++q) {
            x[q] = static_cast<double>(start + q) * h;
            y[q] = f(start + q);
        }
        return [x, y, count](double t) {
            double s = 0.0;
            for (std::size_t q = 0; q < count; ++q) {
                double w = y[q];
                for (std::size_t r = 0; r < count; ++r)
                    if (r != q) w *= (t - x[r]) / (x[q] - x[r]);
                s += w;
            }
            return s;
        };
    };
    const auto pa = interpolant(a, a_lo, a_hi);
    const auto pb = interpolant(b, b_lo, b_hi);
    static constexpr std::array<double, 4> node{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                                0.8611363115940526};
    static constexpr std::array<double, 4> weight{0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                                  0.3478548451374538};
    const double lo = static_cast<double>(i) * h, hi = static_cast<double>(j) * h;
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double s = 0.0;
    for (std::size_t q = 0; q < 4; ++q) {
        const double t = mid + half * node[q];
        s += weight[q] * pa(t) * pb(t);
    }
    return half * s;
}

/// int_{z_i}^{z_j} a b with Simpson on long spans and the local rule on short ones.
template <class A, class B>
double span_integral(std::size_t i, std::size_t j, double h, A&& a, std::size_t a_lo, std::size_t a_hi, B&& b,
                     std::size_t b_lo, std::size_t b_hi) {
    if (j - i <= 3) return short_span_integral(i, j, h, a, a_lo, a_hi, b, b_lo, b_hi);
    const auto w = quadrature::simpson_weights(j - i, h);
    double s = 0.0;
    for (std::size_t t = i; t <= j; ++t) s += w[t - i] * a(t) * b(t);
    return s;
}

/// Solves G(a,b) = (lam/4)(a - b) + (lam/4) int_b^a int_0^b G(t, s) ds dt on
/// [0,2] x [0,1] with spacing h = 1/m by successive approximation, using
/// cumulative trapezoid sums. Here a = (1-z) + (1-s), b = s - z.
inline std::vector<double> kernel_characteristic(double lam, std::size_t m, std::size_t& iterations) {
    const std::size_t na = 2 * m + 1, nb = m + 1;
    const double h = 1.0 / static_cast<double>(m);
    std::vector<double> base(na * nb), G(na * nb), H(na * nb), C(na * nb);
    for (std::size_t a = 0; a < na; ++a)
        for (std::size_t b = 0; b < nb; ++b)
            base[a * nb + b] = 0.25 * lam * (static_cast<double>(a) - static_cast<double>(b)) * h;
    G = base;
    iterations = 0;
    if (lam == 0.0) return G;

    constexpr std::size_t max_iter = 500;
    for (;;) {
        // H(a,b) = int_0^b G(a,s) ds
        for (std::size_t a = 0; a < na; ++a) {
            H[a * nb] = 0.0;
            for (std::size_t b = 1; b < nb; ++b)
                H[a * nb + b] = H[a * nb + b - 1] + 0.5 * h * (G[a * nb + b - 1] + G[a * nb + b]);
        }
        // C(a,b) = int_0^a H(t,b) dt
        for (std::size_t b = 0; b < nb; ++b) C[b] = 0.0;
        for (std::size_t a = 1; a < na; ++a)
            for (std::size_t b = 0; b < nb; ++b)
                C[a * nb + b] = C[(a - 1) * nb + b] + 0.5 * h * (H[(a - 1) * nb + b] + H[a * nb + b]);

        double change = 0.0, size = 1.0;
        for (std::size_t a = 0; a < na; ++a)
            for (std::size_t b = 0; b < nb; ++b) {
                const double next = base[a * nb + b] + 0.25 * lam * (C[a * nb + b] - C[b * nb + b]);
                change = std::max(change, std::abs(next - G[a * nb + b]));
                size = std::max(size, std::abs(next));
                G[a * nb + b] = next;
            }
        ++iterations;
        require(std::isfinite(change) && iterations < max_iter, ErrorKind::FixedPointDivergence,
                "kernel iteration did not settle after " + std::to_string(iterations) + " sweeps");
        if (change <= 1e-10 * size) break;
    }
    return G;
}

inline double triangle_norm(const Kernel& k) {
    const std::size_t m = k.grid.intervals();
    const double h = k.grid.spacing();
    std::vector<double> inner(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        auto row = [&](std::size_t j) { return k(i, j); };
        inner[i] = span_integral(i, m, h, row, i, m, row, i, m);
    }
    return std::sqrt(std::max(0.0, quadrature::simpson(inner, h)));
}

inline Kernel build_kernel(double lam, std::size_t resolution, KernelDirection dir) {
    require(resolution >= 32, ErrorKind::InvalidArgument, "kernel resolution must be >= 32");
    const std::size_t m = resolution;
    std::size_t it_c = 0, it_f = 0;
    const auto gc = kernel_characteristic(lam, m, it_c);
    const auto gf = kernel_characteristic(lam, 2 * m, it_f);
    const std::size_t nbc = m + 1, nbf = 2 * m + 1;

    Kernel k;
    k.grid = Grid(m);
    k.direction = dir;
    k.lambda_bar = dir == KernelDirection::forward ? lam : -lam;
    k.values.assign((m + 1) * (m + 1), 0.0);
    k.iterations = std::max(it_c, it_f);
    for (std::size_t i = 0; i <= m; ++i)
        for (std::size_t j = i; j <= m; ++j) {
            const std::size_t a = 2 * m - i - j, b = j - i;
            // Richardson over h and h/2 removes the trapezoid O(h^2) term.
            k.at(i, j) = (4.0 * gf[(2 * a) * nbf + 2 * b] - gc[a * nbc + b]) / 3.0;
        }
    k.norm = triangle_norm(k);
    return k;
}

}  // namespace detail

/// Forward kernel: k_zz - k_ss = lambda_bar k on z < s < 1, k(z,1) = 0,
/// k(z,z) = lambda_bar (1-z)/2.
inline Kernel solve_kernel(const ClosedLoopConfig& cfg, std::size_t resolution = 256) {
    cfg.validate();
    return detail::build_kernel(cfg.lambda_bar(), resolution, KernelDirection::forward);
}

/// Inverse kernel: same problem with -lambda_bar, so l(z,z) = -lambda_bar (1-z)/2.
inline Kernel solve_inverse_kernel(const ClosedLoopConfig& cfg, std::size_t resolution = 256) {
    cfg.validate();
    auto l = detail::build_kernel(-cfg.lambda_bar(), resolution, KernelDirection::inverse);
    l.lambda_bar = cfg.lambda_bar();
    return l;
}

/// f(z) + int_z^1 kernel(z,s) f(s) ds by composite Simpson per node.
inline GridFunction apply_transform(const Kernel& kernel, const GridFunction& f) {
    require_same_grid(f.grid, kernel.grid);
    const std::size_t m = kernel.grid.intervals();
    const double h = kernel.grid.spacing();
    GridFunction out = f;
    for (std::size_t i = 0; i < m; ++i)
        out[i] += detail::span_integral(
            i, m, h, [&](std::size_t j) { return kernel(i, j); }, i, m, [&](std::size_t j) { return f[j]; }, 0, m);
    return out;
}

/// max over the triangle of |l + k + int_z^s k(z,t) l(t,s) dt|; zero for an
/// exact transform pair under the x = y + K y, y = x + L x conventions.
inline double reciprocity_residual(const Kernel& k, const Kernel& l) {
    require_same_grid(k.grid, l.grid);
    const std::size_t m = k.grid.intervals();
    const double h = k.grid.spacing();
    double worst = 0.0;
    for (std::size_t i = 0; i <= m; ++i)
        for (std::size_t j = i; j <= m; ++j) {
            const double s = detail::span_integral(
                i, j, h, [&](std::size_t t) { return k(i, t); }, i, m, [&](std::size_t t) { return l(t, j); }, 0, j);
            worst = std::max(worst, std::abs(l(i, j) + k(i, j) + s));
        }
    return worst;
}

/// u = d - int_0^1 k(0,s) y(s) ds.
inline double feedback_control(const Kernel& kernel, const GridFunction& y, double d_value) {
    require_same_grid(y.grid, kernel.grid);
    const auto w = quadrature::simpson_weights(kernel.grid.intervals(), kernel.grid.spacing());
    double s = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) s += w[j] * kernel(0, j) * y[j];
    return d_value - s;
}

/// Adds a multiple of (1 - z) to `shape` (with shape(1) = 0) so that
/// y0(0) = d0 - int k(0,s) y0(s) ds.
inline GridFunction compatible_initial_state(const Kernel& kernel, GridFunction shape, double d0) {
    require_same_grid(shape.grid, kernel.grid);
    const auto ramp = GridFunction::sample(shape.grid, [](double z) { return 1.0 - z; });
    const double mismatch = shape.front() - feedback_control(kernel, shape, d0);
    const double slope = 1.0 - feedback_control(kernel, ramp, 0.0);
    for (std::size_t i = 0; i < shape.size(); ++i) shape[i] -= mismatch / slope * ramp[i];
    return shape;
}

struct ClosedLoopResult {
    Trajectory plant;   // y, with the applied control in plant.control
    Trajectory target;  // x = y + int k y
    Kernel kernel;
    Kernel inverse;
};

/// Plant as a Sturm-Liouville problem: p = D, q = -p_plant, r = 1, Dirichlet ends.
inline SLProblem plant_problem(const ClosedLoopConfig& cfg, std::size_t resolution) {
    return constant_problem(cfg.D, -cfg.p, 1.0, {1.0, 0.0, 1.0, 0.0}, resolution);
}

/// Target problem x_t = D x_zz - c x with Dirichlet ends.
inline SLProblem target_problem(const ClosedLoopConfig& cfg, std::size_t resolution) {
    return constant_problem(cfg.D, cfg.c, 1.0, {1.0, 0.0, 1.0, 0.0}, resolution);
}

/// Crank-Nicolson for the plant with y(t,0) = u(t) = d(t) - int k(0,s) y(t,s) ds
/// imposed implicitly at each new time level (rank-one coupling solved by
/// Sherman-Morrison).
inline ClosedLoopResult simulate_closed_loop(const ClosedLoopConfig& cfg, const GridFunction& y0, double dt,
                                             double T, std::size_t store_every = 1) {
    cfg.validate();
    const std::size_t m = y0.grid.intervals();
    ClosedLoopResult res{{}, {}, solve_kernel(cfg, m), solve_inverse_kernel(cfg, m)};
    const auto& k = res.kernel;
    const auto prob = plant_problem(cfg, m);
    const auto& d = cfg.d;

    const double exit_mismatch = std::abs(y0.back());
    const double inlet_mismatch = std::abs(y0.front() - feedback_control(k, y0, d(0.0)));
    require(exit_mismatch <= 1e-10 && inlet_mismatch <= 1e-8 * std::max(1.0, std::abs(d(0.0))),
            ErrorKind::IncompatibleInitialCondition,
            "need y0(1) = 0 and y0(0) = d(0) - int k(0,s) y0 ds (mismatch " +
                std::to_string(std::max(exit_mismatch, inlet_mismatch)) + ")");
    const std::size_t steps = detail::step_count(dt, T);

    const auto disc = detail::discretize(prob, m);
    const std::size_t n = disc.unknowns();  // nodes 1..m-1
    const double h = 1.0 / static_cast<double>(m);
    Tridiagonal lhs = disc.stiffness, rhs_op = disc.stiffness;
    for (std::size_t i = 0; i < n; ++i) {
        lhs.lower[i] *= 0.5 * dt, lhs.upper[i] *= 0.5 * dt;
        lhs.diag[i] = disc.weight[i] + 0.5 * dt * disc.stiffness.diag[i];
        rhs_op.lower[i] *= -0.5 * dt, rhs_op.upper[i] *= -0.5 * dt;
        rhs_op.diag[i] = disc.weight[i] - 0.5 * dt * disc.stiffness.diag[i];
    }
    const auto w = quadrature::simpson_weights(m, h);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = w[i + 1] * k(0, i + 1);
    const double self = 1.0 + w[0] * k(0, 0);
    const double couple = 0.5 * dt * cfg.D / h;  // row-1 coefficient of the inlet node
    const double cc = couple / self;
    std::vector<double> e1(n, 0.0);
    e1[0] = 1.0;
    const auto z2 = solve_tridiagonal(lhs, e1);
    double gz2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) gz2 += g[i] * z2[i];

    auto init = [&](Trajectory& tr, const char* method) {
        tr.method = method;
        tr.dt = dt;
        tr.dz = h;
        tr.grid = y0.grid;
        tr.disturbance = d;
    };
    init(res.plant, "closed-loop-fd");
    init(res.target, "closed-loop-target");
    const auto target = target_problem(cfg, m);
    auto store = [&](double t, const GridFunction& y, double u) {
        detail::record(res.plant, prob, t, y, d);
        res.plant.boundary_residual.back() = std::abs(y.front() - u);
        res.plant.control.push_back(u);
        detail::record(res.target, target, t, apply_transform(k, y), d);
        res.target.control.push_back(u);
    };

    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = y0[i + 1];
    double u = y0.front();
    GridFunction state = y0;
    store(0.0, state, u);
    for (std::size_t step = 1; step <= steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        auto b = rhs_op.multiply(y);
        b[0] += couple * u + cc * d(t);
        auto z1 = solve_tridiagonal(lhs, b);
        double gz1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) gz1 += g[i] * z1[i];
        const double factor = cc * gz1 / (1.0 + cc * gz2);
        for (std::size_t i = 0; i < n; ++i) y[i] = z1[i] - factor * z2[i];
        double gy = 0.0;
        for (std::size_t i = 0; i < n; ++i) gy += g[i] * y[i];
        u = (d(t) - gy) / self;
        if (step % store_every == 0 || step == steps) {
            state[0] = u;
            for (std::size_t i = 0; i < n; ++i) state[i + 1] = y[i];
            state[m] = 0.0;
            store(t, state, u);
        }
    }
    return res;
}

/// Envelope for the plant state:
///   overshoot sqrt(1+eps)(1+||l||)(1+||k||), decay c + D pi^2,
///   gain (1+||l||) sqrt(1+1/eps) G with G the target's gain.
inline IssBound closed_loop_bound(const ClosedLoopConfig& cfg, double k_norm, double l_norm, double eps) {
    require(eps > 0.0, ErrorKind::InvalidArgument, "epsilon must be positive");
    const double G = backstepping_gain(cfg.c, cfg.D).route(GainRoute::closed_form).gain_C;
    return {std::sqrt(1.0 + eps) * (1.0 + l_norm) * (1.0 + k_norm),
            cfg.c + cfg.D * std::numbers::pi * std::numbers::pi,
            (1.0 + l_norm) * std::sqrt(1.0 + 1.0 / eps) * G};
}

inline EnvelopeFamily closed_loop_envelope(const ClosedLoopConfig& cfg, const Kernel& k, const Kernel& l) {
    const double kn = k.norm, ln = l.norm;
    return [cfg, kn, ln](double eps) { return closed_loop_bound(cfg, kn, ln, eps); };
}

/// Envelope for the target state x: sqrt(1+eps) e^{-(c + D pi^2) t} ||x0|| + sqrt(1+1/eps) G max|d|.
inline EnvelopeFamily target_envelope(const ClosedLoopConfig& cfg) {
    const double G = backstepping_gain(cfg.c, cfg.D).route(GainRoute::closed_form).gain_C;
    const double decay = cfg.c + cfg.D * std::numbers::pi * std::numbers::pi;
    return [=](double eps) { return IssBound{std::sqrt(1.0 + eps), decay, std::sqrt(1.0 + 1.0 / eps) * G}; };
}

struct NormSandwich {
    double worst_y_over_x = 0.0;  // max ||y|| / ((1+||l||) ||x||)
    double worst_x_over_y = 0.0;  // max ||x|| / ((1+||k||) ||y||)
    bool holds() const { return worst_y_over_x <= 1.0 && worst_x_over_y <= 1.0; }
};

inline NormSandwich norm_sandwich(const ClosedLoopResult& r) {
    NormSandwich s;
    for (std::size_t i = 0; i < r.plant.size(); ++i) {
        const double y = r.plant.norms[i], x = r.target.norms[i];
        if (x > 0.0) s.worst_y_over_x = std::max(s.worst_y_over_x, y / ((1.0 + r.inverse.norm) * x));
        if (y > 0.0) s.worst_x_over_y = std::max(s.worst_x_over_y, x / ((1.0 + r.kernel.norm) * y));
    }
    return s;
}

/// Largest interior residual of x_t - D x_zz + c x along the transformed
/// trajectory (consecutive stored states, midpoint in time), relative to the
/// largest of |x_t| and |D x_zz|.
inline double target_residual(const ClosedLoopResult& r, const ClosedLoopConfig& cfg) {
    const auto& tr = r.target;
    const double h = tr.dz;
    double worst = 0.0, scale = 0.0;
    for (std::size_t k = 1; k < tr.size(); ++k) {
        const double dt = tr.times[k] - tr.times[k - 1];
        const auto& a = tr.states[k - 1];
        const auto& b = tr.states[k];
        for (std::size_t i = 1; i + 1 < a.size(); ++i) {
            const double xt = (b[i] - a[i]) / dt;
            const double xzz = 0.5 * ((a[i - 1] - 2 * a[i] + a[i + 1]) + (b[i - 1] - 2 * b[i] + b[i + 1])) / (h * h);
            const double x = 0.5 * (a[i] + b[i]);
            worst = std::max(worst, std::abs(xt - cfg.D * xzz + cfg.c * x));
            scale = std::max({scale, std::abs(xt), std::abs(cfg.D * xzz)});
        }
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

}  // namespace issgain
