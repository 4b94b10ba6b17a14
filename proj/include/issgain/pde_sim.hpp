#pragma once

// Simulators for r x_t = (p x_z)_z - q x with inlet data b1 x(t,0) + b2 x_z(t,0) = d(t):
// Crank-Nicolson finite differences, the modal exponential integrator, the
// lifted (distributed forcing) modal route, the exact advection solution,
// and the check of ISS envelopes along trajectories.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "issgain/disturbance.hpp"
#include "issgain/error.hpp"
#include "issgain/gains.hpp"
#include "issgain/grid.hpp"
#include "issgain/sturm_liouville.hpp"
#include "issgain/tridiagonal.hpp"

namespace issgain {

struct Trajectory {
    std::string method;
    double dt = 0.0;
    double dz = 0.0;
    Grid grid;
    std::vector<double> times;
    std::vector<GridFunction> states;
    std::vector<double> norms;
    std::vector<double> d_values;
    std::vector<double> boundary_residual;  // |b1 x(t,0) + b2 x_z(t,0) - d(t)|
    std::vector<double> control;            // closed loop only: applied u(t)
    std::optional<Disturbance> disturbance;
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return times.size(); }
};

enum class CompatibilityPolicy { project, strict };

/// Lifting x = y + d~(t) g(z) with g(z) = b1 + b2 z + c1 z^2 + c2 z^3 for
/// normalized (b1, b2), which moves the inlet disturbance into the forcing
/// f(t,z) = d~(t) F1(z) - d~'(t) g(z), F1 = ((p g')' - q g)/r.
struct Lifting {
    double b1 = 1.0, b2 = 0.0;  // normalized inlet constants
    double c1 = 0.0, c2 = 0.0;
    double inlet_norm = 1.0;

    double g(double z) const { return b1 + b2 * z + c1 * z * z + c2 * z * z * z; }
    double dg(double z) const { return b2 + 2.0 * c1 * z + 3.0 * c2 * z * z; }
    double d2g(double z) const { return 2.0 * c1 + 6.0 * c2 * z; }

    GridFunction shape(const Grid& grid) const {
        return GridFunction::sample(grid, [this](double z) { return g(z); });
    }
    GridFunction source(const SLProblem& prob, const Grid& grid) const {
        return GridFunction::sample(grid, [&](double z) {
            return (prob.p.derivative(z) * dg(z) + prob.p(z) * d2g(z) - prob.q(z) * g(z)) / prob.r(z);
        });
    }
};

/// Minimum-norm (c1, c2) solving (a1+2a2) c1 + (a1+3a2) c2 = -a1 b1 - (a1+a2) b2.
inline Lifting lifting_cubic(const BoundaryConstants& bc) {
    require(std::abs(bc.a1) + std::abs(bc.a2) > 0.0, ErrorKind::DegenerateBoundary,
            "|a1| + |a2| must be positive");
    const double nb = bc.inlet_norm();
    require(nb > 0.0, ErrorKind::DegenerateBoundary, "|b1| + |b2| must be positive");
    Lifting L;
    L.inlet_norm = nb;
    L.b1 = bc.b1 / nb;
    L.b2 = bc.b2 / nb;
    const double alpha = bc.a1 + 2.0 * bc.a2, beta = bc.a1 + 3.0 * bc.a2;
    const double gamma = -bc.a1 * L.b1 - (bc.a1 + bc.a2) * L.b2;
    const double nn = alpha * alpha + beta * beta;
    require(nn > 0.0, ErrorKind::DegenerateBoundary, "lifting constraint is degenerate");
    L.c1 = gamma * alpha / nn;
    L.c2 = gamma * beta / nn;
    return L;
}

/// A forcing of the form sum_j s_j(t) F_j(z).
struct SeparableForcing {
    struct Term {
        Disturbance signal;
        GridFunction shape;
    };
    std::vector<Term> terms;
};

struct LiftedDisturbance {
    Lifting lifting;
    Disturbance normalized;  // d~ = d / sqrt(b1^2 + b2^2)
    SeparableForcing forcing;

    double forcing_at(double t, double z) const {
        double s = 0.0;
        for (const auto& term : forcing.terms) s += term.signal(t) * term.shape.at(z);
        return s;
    }
};

inline LiftedDisturbance lift_disturbance(const SLProblem& prob, const Disturbance& d) {
    LiftedDisturbance out{lifting_cubic(prob.bc), d.scaled(1.0 / prob.bc.inlet_norm()), {}};
    const Grid grid = prob.grid();
    out.forcing.terms.push_back({out.normalized, out.lifting.source(prob, grid)});
    out.forcing.terms.push_back({out.normalized.derivative(1).scaled(-1.0), out.lifting.shape(grid)});
    return out;
}

namespace detail {

inline double inlet_residual(const SLProblem& prob, const GridFunction& x, double d) {
    return std::abs(prob.bc.b1 * x.front() + prob.bc.b2 * x.derivative_at_0() - d);
}

inline void record(Trajectory& tr, const SLProblem& prob, double t, GridFunction x, const Disturbance& d,
                   std::optional<double> norm = std::nullopt) {
    tr.times.push_back(t);
    tr.norms.push_back(norm ? *norm : weighted_norm(x, prob));
    tr.d_values.push_back(d(t));
    tr.boundary_residual.push_back(inlet_residual(prob, x, d(t)));
    tr.states.push_back(std::move(x));
}

inline std::size_t step_count(double dt, double T) {
    require(dt > 0.0 && T >= 0.0, ErrorKind::InvalidArgument, "need dt > 0 and T >= 0");
    return static_cast<std::size_t>(std::llround(T / dt));
}

inline void frequency_warning(Trajectory& tr, const Disturbance& d, double dt) {
    if (d.frequency() * dt > 0.5)
        tr.warnings.push_back("StabilityWarning: dt = " + std::to_string(dt) +
                              " is coarse for disturbance frequency " + std::to_string(d.frequency()));
    if (!d.smoothness_warning().empty()) tr.warnings.push_back(d.smoothness_warning());
}

}  // namespace detail

/// Checks b1 x0(0) + b2 x0'(0) = d(0); under `project` the mismatch is
/// removed by adding a multiple of the lifting cubic and a warning is recorded.
inline GridFunction make_compatible(const SLProblem& prob, GridFunction x0, double d0,
                                    CompatibilityPolicy policy, std::vector<std::string>& warnings) {
    const double mismatch = prob.bc.b1 * x0.front() + prob.bc.b2 * x0.derivative_at_0() - d0;
    if (std::abs(mismatch) <= 1e-8 * std::max(1.0, std::abs(d0))) return x0;
    require(policy == CompatibilityPolicy::project, ErrorKind::IncompatibleInitialCondition,
            "b1 x0(0) + b2 x0'(0) - d(0) = " + std::to_string(mismatch));
    const auto L = lifting_cubic(prob.bc);
    const double delta = -mismatch / L.inlet_norm;
    for (std::size_t i = 0; i < x0.size(); ++i) x0[i] += delta * L.g(x0.grid.node(i));
    warnings.push_back("IncompatibleInitialCondition: x0 projected by the lifting cubic (mismatch " +
                       std::to_string(mismatch) + ")");
    return x0;
}

/// Crank-Nicolson on the symmetric discretization W x' = -K x + F(t); the
/// inlet data enters through the trapezoidal average of F, and a Dirichlet
/// inlet node carries d(t)/b1 exactly.
inline Trajectory simulate_fd(const SLProblem& prob, const Disturbance& d, GridFunction x0, double dt,
                              double T, std::size_t store_every = 1,
                              CompatibilityPolicy policy = CompatibilityPolicy::project) {
    require_same_grid(x0.grid, prob.grid());
    require(store_every >= 1, ErrorKind::InvalidArgument, "store_every must be >= 1");
    const std::size_t steps = detail::step_count(dt, T);
    Trajectory tr;
    tr.method = "fd-crank-nicolson";
    tr.dt = dt;
    tr.dz = prob.grid().spacing();
    tr.grid = prob.grid();
    tr.disturbance = d;
    detail::frequency_warning(tr, d, dt);
    x0 = make_compatible(prob, std::move(x0), d(0.0), policy, tr.warnings);

    const auto disc = detail::discretize(prob, prob.resolution());
    const std::size_t n = disc.unknowns();
    Tridiagonal lhs = disc.stiffness, rhs_op = disc.stiffness;
    for (std::size_t k = 0; k < n; ++k) {
        lhs.lower[k] *= 0.5 * dt, lhs.upper[k] *= 0.5 * dt;
        lhs.diag[k] = disc.weight[k] + 0.5 * dt * disc.stiffness.diag[k];
        rhs_op.lower[k] *= -0.5 * dt, rhs_op.upper[k] *= -0.5 * dt;
        rhs_op.diag[k] = disc.weight[k] - 0.5 * dt * disc.stiffness.diag[k];
    }

    std::vector<double> u(n);
    for (std::size_t k = 0; k < n; ++k) u[k] = x0[disc.first + k];
    GridFunction state = x0;
    detail::record(tr, prob, 0.0, state, d);

    auto forcing = detail::inlet_forcing(prob, disc.grid, d(0.0));
    for (std::size_t step = 1; step <= steps; ++step) {
        const double t = static_cast<double>(step) * dt;
        const auto next = detail::inlet_forcing(prob, disc.grid, d(t));
        auto b = rhs_op.multiply(u);
        b[0] += 0.5 * dt * (forcing.first_row + next.first_row);
        u = solve_tridiagonal(lhs, b);
        forcing = next;
        if (step % store_every == 0 || step == steps) {
            for (std::size_t k = 0; k < n; ++k) state[disc.first + k] = u[k];
            if (prob.bc.dirichlet_inlet()) state[0] = next.node_value;
            if (prob.bc.dirichlet_exit()) state[prob.resolution()] = 0.0;
            detail::record(tr, prob, t, state, d);
        }
    }
    return tr;
}

namespace detail {

/// Reconstruction sum_n c_n phi_n on the spectrum grid.
inline GridFunction synthesize(const Spectrum& s, const std::vector<double>& c) {
    GridFunction out = GridFunction::zeros(s.grid);
    for (std::size_t n = 0; n < c.size(); ++n)
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[n] * s.eigenfunctions[n][i];
    return out;
}

inline void require_hypothesis(const Spectrum& s, const SLProblem& prob) {
    const auto h = check_hypothesis_H(s, prob);
    require(h.satisfied(), ErrorKind::UncertifiedHypothesis,
            "lambda1 = " + std::to_string(h.lambda1) + "; " + h.note);
}

}  // namespace detail

/// Modal solution c_n(t) = e^{-lambda_n t} c_n(0) + kappa_n int_0^t e^{-lambda_n (t-s)} d~(s) ds,
/// kappa_n = p(0)(b1~ phi_n'(0) - b2~ phi_n(0)), d~ = d/sqrt(b1^2+b2^2), advanced
/// step by step with exact exponential weights. Norms use Parseval over the N
/// retained modes plus the quasi-static remainder d~(t)^2 sum_{n>N} (kappa_n/lambda_n)^2,
/// whose sum is C^2 minus the retained part.
inline Trajectory simulate_spectral(const SLProblem& prob, const Spectrum& spectrum, const Disturbance& d,
                                    GridFunction x0, double dt, double T, std::size_t N = 64,
                                    std::size_t store_every = 1,
                                    CompatibilityPolicy policy = CompatibilityPolicy::project) {
    require_same_grid(x0.grid, prob.grid());
    require_same_grid(spectrum.grid, prob.grid());
    require(N >= 1 && N <= spectrum.size(), ErrorKind::InvalidArgument, "N must be in [1, modes]");
    detail::require_hypothesis(spectrum, prob);
    const std::size_t steps = detail::step_count(dt, T);

    Trajectory tr;
    tr.method = "spectral";
    tr.dt = dt;
    tr.dz = prob.grid().spacing();
    tr.grid = prob.grid();
    tr.disturbance = d;
    detail::frequency_warning(tr, d, dt);
    x0 = make_compatible(prob, std::move(x0), d(0.0), policy, tr.warnings);

    const double nb = prob.bc.inlet_norm();
    const Disturbance dn = d.scaled(1.0 / nb);
    const double p0 = prob.p(0.0);
    std::vector<double> kappa(N), lambda(N), decay(N);
    double retained = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
        kappa[n] = p0 * (prob.bc.b1 * spectrum.derivatives_at_0[n] - prob.bc.b2 * spectrum.values_at_0[n]) / nb;
        lambda[n] = spectrum.eigenvalues[n];
        decay[n] = std::exp(-lambda[n] * dt);
        retained += kappa[n] * kappa[n] / (lambda[n] * lambda[n]);
    }
    const double gain = gain_bvp(prob).gain_C;
    const double remainder = std::max(0.0, gain * gain - retained);

    auto c = fourier_coefficients(x0, spectrum, prob).coefficients;
    c.resize(N);
    detail::record(tr, prob, 0.0, x0, d);
    bool warned = false;
    const double dscale = std::max(1e-300, d.max_abs(0.0, T));
    for (std::size_t step = 1; step <= steps; ++step) {
        const double t0 = static_cast<double>(step - 1) * dt, t1 = t0 + dt;
        for (std::size_t n = 0; n < N; ++n)
            c[n] = decay[n] * c[n] + kappa[n] * dn.exp_convolve(lambda[n], t0, t1, std::min(dt, 1e-3));
        if (step % store_every == 0 || step == steps) {
            double sq = 0.0;
            for (double v : c) sq += v * v;
            const double dv = dn(t1);
            auto x = detail::synthesize(spectrum, c);
            detail::record(tr, prob, t1, std::move(x), d, std::sqrt(sq + dv * dv * remainder));
            if (!warned && tr.boundary_residual.back() > 1e-3 * dscale) {
                tr.warnings.push_back("TruncationWarning: reconstructed inlet value misses d(t) by " +
                                      std::to_string(tr.boundary_residual.back()) +
                                      " (modal series converges in L2_r, not pointwise at z = 0)");
                warned = true;
            }
        }
    }
    return tr;
}

/// Modal solution of r y_t = (p y_z)_z - q y + r f with homogeneous boundary
/// conditions, in integrated-by-parts form
///   y_n(t) = e^{-l t} y_n(0) + (theta_n(t) - e^{-l t} theta_n(0))/l - (1/l) int_0^t e^{-l(t-s)} theta_n'(s) ds,
/// theta_n(t) = <phi_n, f(t,.)>_r.
inline Trajectory simulate_forced_spectral(const SLProblem& prob, const Spectrum& spectrum,
                                           const SeparableForcing& f, const GridFunction& y0, double dt,
                                           double T, std::size_t N = 64, std::size_t store_every = 1) {
    require_same_grid(y0.grid, prob.grid());
    require_same_grid(spectrum.grid, prob.grid());
    require(N >= 1 && N <= spectrum.size(), ErrorKind::InvalidArgument, "N must be in [1, modes]");
    detail::require_hypothesis(spectrum, prob);
    const std::size_t steps = detail::step_count(dt, T);

    // Projections of each forcing shape onto the retained modes.
    std::vector<std::vector<double>> proj;
    std::vector<Disturbance> rates;
    for (const auto& term : f.terms) {
        require_same_grid(term.shape.grid, prob.grid());
        auto pc = fourier_coefficients(term.shape, spectrum, prob).coefficients;
        pc.resize(N);
        proj.push_back(std::move(pc));
        rates.push_back(term.signal.derivative(1));
    }
    auto theta = [&](std::size_t n, double t) {
        double s = 0.0;
        for (std::size_t j = 0; j < proj.size(); ++j) s += f.terms[j].signal(t) * proj[j][n];
        return s;
    };

    Trajectory tr;
    tr.method = "forced-spectral";
    tr.dt = dt;
    tr.dz = prob.grid().spacing();
    tr.grid = prob.grid();
    auto c = fourier_coefficients(y0, spectrum, prob).coefficients;
    c.resize(N);
    const Disturbance zero = Disturbance::constant(0.0);
    detail::record(tr, prob, 0.0, y0, zero);

    // Homogeneous part and the convolution of theta' are advanced separately.
    std::vector<double> hom = c, conv(N, 0.0), lambda(N), decay(N), theta0(N);
    for (std::size_t n = 0; n < N; ++n) {
        lambda[n] = spectrum.eigenvalues[n];
        decay[n] = std::exp(-lambda[n] * dt);
        theta0[n] = theta(n, 0.0);
    }
    const double hq = std::min(dt, 1e-3);
    for (std::size_t step = 1; step <= steps; ++step) {
        const double t0 = static_cast<double>(step - 1) * dt, t1 = t0 + dt;
        for (std::size_t n = 0; n < N; ++n) {
            hom[n] *= decay[n];
            double inc = 0.0;
            for (std::size_t j = 0; j < rates.size(); ++j)
                inc += proj[j][n] * rates[j].exp_convolve(lambda[n], t0, t1, hq);
            conv[n] = decay[n] * conv[n] + inc;
        }
        if (step % store_every == 0 || step == steps) {
            for (std::size_t n = 0; n < N; ++n) {
                const double e = std::exp(-lambda[n] * t1);
                c[n] = hom[n] + (theta(n, t1) - e * theta0[n]) / lambda[n] - conv[n] / lambda[n];
            }
            detail::record(tr, prob, t1, detail::synthesize(spectrum, c), zero);
        }
    }
    return tr;
}

/// Boundary-disturbed solution through the lifting: y solves the forced
/// problem from y0 = x0 - d~(0) g, then x = y + d~(t) g.
inline Trajectory simulate_lifted(const SLProblem& prob, const Spectrum& spectrum, const Disturbance& d,
                                  GridFunction x0, double dt, double T, std::size_t N = 64,
                                  std::size_t store_every = 1,
                                  CompatibilityPolicy policy = CompatibilityPolicy::project) {
    require_same_grid(x0.grid, prob.grid());
    std::vector<std::string> warnings;
    x0 = make_compatible(prob, std::move(x0), d(0.0), policy, warnings);
    const auto lifted = lift_disturbance(prob, d);
    const auto g = lifted.lifting.shape(prob.grid());
    GridFunction y0 = x0;
    for (std::size_t i = 0; i < y0.size(); ++i) y0[i] -= lifted.normalized(0.0) * g[i];

    auto tr = simulate_forced_spectral(prob, spectrum, lifted.forcing, y0, dt, T, N, store_every);
    tr.method = "lifted-spectral";
    tr.disturbance = d;
    tr.warnings.insert(tr.warnings.begin(), warnings.begin(), warnings.end());
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const double t = tr.times[k], dn = lifted.normalized(t);
        for (std::size_t i = 0; i < g.size(); ++i) tr.states[k][i] += dn * g[i];
        tr.norms[k] = weighted_norm(tr.states[k], prob);
        tr.d_values[k] = d(t);
        tr.boundary_residual[k] = detail::inlet_residual(prob, tr.states[k], d(t));
    }
    return tr;
}

/// Exact solution of y_t + v y_z = -k y, y(t,0) = d(t):
///   y = e^{-kt} y0(z - vt) for vt < z, e^{-kz/v} d(t - z/v) otherwise.
/// Norms use the weight e^{-vz/D}.
inline Trajectory advection_exact(double v, double k, const Disturbance& d,
                                  const std::function<double(double)>& y0, Grid grid, double dt, double T,
                                  double weight_D, std::size_t store_every = 1) {
    require(v > 0.0 && weight_D > 0.0, ErrorKind::InvalidArgument, "need v > 0 and D > 0");
    const std::size_t steps = detail::step_count(dt, T);
    Trajectory tr;
    tr.method = "advection-exact";
    tr.dt = dt;
    tr.dz = grid.spacing();
    tr.grid = grid;
    tr.disturbance = d;

    constexpr double h = 1e-6;
    const double dy0 = (y0(h) - y0(0.0)) / h;
    const double c0 = std::abs(y0(0.0) - d(0.0)), c1 = std::abs(d.d1(0.0) + v * dy0 + k * d(0.0));
    if (c0 > 1e-8 || c1 > 1e-4 * std::max(1.0, std::abs(d.d1(0.0))))
        tr.warnings.push_back("IncompatibleInitialCondition: y0(0) - d(0) = " + std::to_string(c0) +
                              ", d'(0) + v y0'(0) + k d(0) = " + std::to_string(c1));

    const auto w = quadrature::simpson_weights(grid.intervals(), grid.spacing());
    for (std::size_t step = 0; step <= steps; ++step) {
        if (step % store_every != 0 && step != steps) continue;
        const double t = static_cast<double>(step) * dt;
        auto y = GridFunction::sample(grid, [&](double z) {
            return v * t < z ? std::exp(-k * t) * y0(z - v * t) : std::exp(-k * z / v) * d(t - z / v);
        });
        double sq = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) sq += w[i] * std::exp(-v * grid.node(i) / weight_D) * y[i] * y[i];
        tr.times.push_back(t);
        tr.norms.push_back(std::sqrt(sq));
        tr.d_values.push_back(d(t));
        tr.boundary_residual.push_back(std::abs(y.front() - d(t)));
        tr.states.push_back(std::move(y));
    }
    return tr;
}

/// Envelope ||x[t]|| <= overshoot e^{-decay t} ||x[0]|| + gain max_{t - window <= s <= t} |d(s)|.
struct IssBound {
    double overshoot = 0.0;
    double decay_rate = 0.0;
    double gain = 0.0;
    double window = std::numeric_limits<double>::infinity();
};

using EnvelopeFamily = std::function<IssBound(double epsilon)>;

/// Envelope of the general theorem for a gain report:
/// sqrt(1+eps) e^{-lambda1 t} ||x0|| + C sqrt((1+1/eps)/(b1^2+b2^2)) max|d|.
inline EnvelopeFamily theorem_envelope(const GainReport& g) {
    return [g](double eps) {
        GainReport r = g;
        r.at_epsilon(eps);
        return IssBound{r.iss_overshoot, r.iss_decay_rate, r.iss_gain};
    };
}

/// Advection envelope with decay k + v^2/(2D), gain advection_gain and the
/// disturbance window 1/v. Independent of epsilon.
inline EnvelopeFamily advection_envelope(double v, double D, double k,
                                         AdvectionForm form = AdvectionForm::derived) {
    const double gain = form == AdvectionForm::derived ? advection_gain(v, D, k) : advection_gain_literal(v, D, k);
    return [=](double) { return IssBound{1.0, k + v * v / (2.0 * D), gain, 1.0 / v}; };
}

struct ISSCheckReport {
    std::vector<double> epsilons;
    std::vector<std::vector<double>> margins;  // [eps][time] RHS - LHS
    std::vector<double> min_margin;
    std::vector<double> argmin_t;
    std::vector<double> worst_relative_violation;
    std::vector<bool> passed;
    double slack = 1e-3;
    bool pass = true;
};

inline ISSCheckReport verify_iss(const Trajectory& tr, const EnvelopeFamily& envelope,
                                 const std::vector<double>& epsilons, double slack = 1e-3) {
    require(static_cast<bool>(envelope), ErrorKind::MissingEnvelopeParameters, "no envelope supplied");
    require(tr.disturbance.has_value(), ErrorKind::MissingEnvelopeParameters,
            "trajectory carries no disturbance signal");
    require(!tr.norms.empty(), ErrorKind::MissingEnvelopeParameters, "trajectory has no norms");
    ISSCheckReport rep;
    rep.epsilons = epsilons;
    rep.slack = slack;
    const auto& d = *tr.disturbance;
    const double x0 = tr.norms.front();

    // Running maxima over the stored times (refined between them by max_abs).
    std::vector<double> running(tr.size());
    double acc = std::abs(d(0.0));
    for (std::size_t k = 0; k < tr.size(); ++k) {
        if (k > 0) acc = std::max(acc, d.max_abs(tr.times[k - 1], tr.times[k]));
        running[k] = acc;
    }

    for (double eps : epsilons) {
        const IssBound b = envelope(eps);
        require(std::isfinite(b.overshoot) && std::isfinite(b.decay_rate) && std::isfinite(b.gain) &&
                    b.overshoot >= 0.0 && b.gain >= 0.0,
                ErrorKind::MissingEnvelopeParameters, "envelope parameters must be finite and non-negative");
        std::vector<double> m(tr.size());
        double scale = 0.0, worst = std::numeric_limits<double>::infinity(), at = 0.0;
        for (std::size_t k = 0; k < tr.size(); ++k) {
            const double t = tr.times[k];
            const double dmax = std::isinf(b.window) ? running[k] : d.max_abs(std::max(0.0, t - b.window), t);
            const double rhs = b.overshoot * std::exp(-b.decay_rate * t) * x0 + b.gain * dmax;
            m[k] = rhs - tr.norms[k];
            scale = std::max(scale, rhs);
            if (m[k] < worst) worst = m[k], at = t;
        }
        const double violation = scale > 0.0 ? std::max(0.0, -worst) / scale : (worst < 0.0 ? 1.0 : 0.0);
        rep.margins.push_back(std::move(m));
        rep.min_margin.push_back(worst);
        rep.argmin_t.push_back(at);
        rep.worst_relative_violation.push_back(violation);
        rep.passed.push_back(violation <= slack);
        rep.pass = rep.pass && rep.passed.back();
    }
    return rep;
}

/// L2_r distance between two trajectories at a shared time index, restricted
/// to the coarser grid when the grids are nested.
inline double state_distance(const SLProblem& coarse_prob, const GridFunction& a, const GridFunction& b) {
    const Grid g = coarse_prob.grid();
    const auto ra = a.grid == g ? a : a.restrict_to(g);
    const auto rb = b.grid == g ? b : b.restrict_to(g);
    GridFunction diff = ra;
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= rb[i];
    return weighted_norm(diff, coarse_prob);
}

}  // namespace issgain
