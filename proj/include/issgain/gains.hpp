#pragma once

// ISS gain constants for boundary disturbances, computed by independent routes:
// the modal series, the L2_r norm of the steady state driven by unit inlet
// data, and closed forms for the constant-coefficient transport family.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "issgain/error.hpp"
#include "issgain/grid.hpp"
#include "issgain/sturm_liouville.hpp"

namespace issgain {

enum class GainRoute { series, bvp_integral, closed_form };

constexpr std::string_view to_string(GainRoute r) {
    switch (r) {
        case GainRoute::series: return "series";
        case GainRoute::bvp_integral: return "bvp_integral";
        case GainRoute::closed_form: return "closed_form";
    }
    return "unknown";
}

/// Gain constant C with the ISS envelope it induces for a given epsilon:
///   ||x[t]||_r <= sqrt(1+eps) e^{-lambda1 t} ||x[0]||_r + C sqrt((1+1/eps)/(b1^2+b2^2)) max|d|.
struct GainReport {
    double gain_C = 0.0;
    GainRoute route = GainRoute::series;
    std::size_t truncation_N = 0;
    double partial_gain = 0.0;   // series only: sqrt of the truncated sum
    double tail_estimate = 0.0;  // gain_C - partial_gain (series only)
    double inlet_norm = 1.0;     // sqrt(b1^2 + b2^2)
    double epsilon = 1.0;
    double iss_overshoot = std::sqrt(2.0);
    double iss_decay_rate = 0.0;
    double iss_gain = 0.0;

    GainReport& at_epsilon(double eps) {
        require(eps > 0.0, ErrorKind::InvalidArgument, "epsilon must be positive");
        epsilon = eps;
        iss_overshoot = std::sqrt(1.0 + eps);
        iss_gain = gain_C * std::sqrt((1.0 + 1.0 / eps)) / inlet_norm;
        return *this;
    }
};

namespace detail {

/// sum_{n>N} 2R w_n^2 / (s pi^2 + w_n^2)^2 with w_n = (n - mu) pi, by the
/// midpoint rule in n (error O(N^-3)).
inline double modal_tail(std::size_t N, double mu_inf, double s, double R) {
    using std::numbers::pi;
    const double x = static_cast<double>(N) + 0.5 - mu_inf;
    return 2.0 * R / (pi * pi) * (1.0 / x - 2.0 * s / (3.0 * x * x * x));
}

/// Terms p(0)^2/(b1^2+b2^2) lambda_n^{-2} |b1 phi_n'(0) - b2 phi_n(0)|^2.
inline std::vector<double> gain_terms(const SLProblem& prob, const Spectrum& s, std::size_t count) {
    const auto& bc = prob.bc;
    const double p0 = prob.p(0.0);
    const double bn2 = bc.b1 * bc.b1 + bc.b2 * bc.b2;
    std::vector<double> t(count);
    for (std::size_t n = 0; n < count; ++n) {
        const double flux = bc.b1 * s.derivatives_at_0[n] - bc.b2 * s.values_at_0[n];
        t[n] = p0 * p0 / bn2 * flux * flux / (s.eigenvalues[n] * s.eigenvalues[n]);
    }
    return t;
}

/// Constant coefficients, Dirichlet inlet, exit parameter a1/a2 >= 0.
inline bool transport_family(const SLProblem& prob) {
    const auto& bc = prob.bc;
    return prob.constant_coefficients() && bc.dirichlet_inlet() &&
           (bc.dirichlet_exit() || bc.a1 / bc.a2 >= 0.0);
}

}  // namespace detail

/// Modal route: C^2 = p(0)^2/(b1^2+b2^2) sum lambda_n^{-2} |b1 phi_n'(0) - b2 phi_n(0)|^2,
/// truncated at N with the remainder estimated from modes N+1..size() of the
/// spectrum plus an asymptotic tail (analytic for the constant-coefficient
/// transport family, power-law fit otherwise).
inline GainReport gain_series(const SLProblem& prob, const Spectrum& spectrum, std::size_t N) {
    require(N <= spectrum.size(), ErrorKind::InvalidArgument, "N exceeds available modes");
    const auto hyp = check_hypothesis_H(spectrum, prob);
    require(hyp.satisfied(), ErrorKind::UncertifiedHypothesis,
            "lambda1 = " + std::to_string(hyp.lambda1) + ", " + hyp.note);

    const std::size_t total = spectrum.size();
    const auto terms = detail::gain_terms(prob, spectrum, total);
    double partial = 0.0, known_tail = 0.0;
    for (std::size_t n = 0; n < N; ++n) partial += terms[n];
    for (std::size_t n = N; n < total; ++n) known_tail += terms[n];

    double far_tail = 0.0;
    if (detail::transport_family(prob)) {
        const double P = *prob.p.constant_value(), Q = *prob.q.constant_value(),
                     R = *prob.r.constant_value();
        const double mu_inf = prob.bc.dirichlet_exit() ? 0.0 : 0.5;
        far_tail = detail::modal_tail(total, mu_inf, Q / (P * std::numbers::pi * std::numbers::pi), R);
    } else {
        // t_n ~ A n^-beta over the upper half of the available modes.
        double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
        for (std::size_t n = total / 2; n < total; ++n) {
            if (terms[n] <= 0.0) continue;
            const double x = std::log(static_cast<double>(n + 1)), y = std::log(terms[n]);
            sx += x, sy += y, sxx += x * x, sxy += x * y, cnt += 1;
        }
        if (cnt >= 2) {
            const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
            const double beta = -slope;
            const double amp = std::exp((sy - slope * sx) / cnt);
            far_tail = beta > 1.0 ? amp * std::pow(static_cast<double>(total) + 0.5, 1.0 - beta) / (beta - 1.0)
                                  : std::numeric_limits<double>::infinity();
        }
    }

    GainReport rep;
    rep.route = GainRoute::series;
    rep.truncation_N = N;
    rep.partial_gain = std::sqrt(partial);
    rep.gain_C = std::sqrt(partial + known_tail + far_tail);
    rep.tail_estimate = rep.gain_C - rep.partial_gain;
    rep.inlet_norm = prob.bc.inlet_norm();
    rep.iss_decay_rate = spectrum.eigenvalues.front();
    rep.at_epsilon(1.0);
    return rep;
}

/// Steady-state route: C = ||x~||_r with x~ driven by inlet data sqrt(b1^2+b2^2).
inline GainReport gain_bvp(const SLProblem& prob) {
    const auto probe = solve_spectrum(prob, 1);
    require(probe.eigenvalues.front() > 0.0, ErrorKind::UncertifiedHypothesis,
            "lambda1 = " + std::to_string(probe.eigenvalues.front()) + " is not positive");
    const auto steady = solve_steady_bvp(prob, prob.bc.inlet_norm());
    GainReport rep;
    rep.route = GainRoute::bvp_integral;
    rep.gain_C = weighted_norm(steady.profile, prob);
    rep.inlet_norm = prob.bc.inlet_norm();
    rep.iss_decay_rate = probe.eigenvalues.front();
    rep.at_epsilon(1.0);
    return rep;
}

/// Exit parameter a in [0, inf]; infinity (Dirichlet exit) is a distinct state.
class ExitParameter {
public:
    static ExitParameter dirichlet() { return ExitParameter(true, 0.0); }
    static ExitParameter robin(double a) {
        require(a >= 0.0 && std::isfinite(a), ErrorKind::InvalidArgument,
                "exit parameter must be finite and >= 0 (use dirichlet() for a = inf)");
        return ExitParameter(false, a);
    }

    bool infinite() const noexcept { return infinite_; }
    double value() const noexcept {
        return infinite_ ? std::numeric_limits<double>::infinity() : value_;
    }
    std::string label() const { return infinite_ ? "inf" : std::to_string(value_); }

private:
    ExitParameter(bool inf, double v) : infinite_(inf), value_(v) {}
    bool infinite_;
    double value_;
};

/// mu_n(a) in [0, 1/2]: 0 for a = inf, 1/2 for a = 0, otherwise the root of
/// tan(mu pi) + mu pi / a = n pi / a. Solved for theta = (1/2 - mu) pi from
/// a cos(theta) = ((n - 1/2) pi + theta) sin(theta), which stays well
/// conditioned for large n.
inline double mu_theta(std::size_t n, double a) {
    using std::numbers::pi;
    const double c = (static_cast<double>(n) - 0.5) * pi;
    auto g = [&](double t) { return a * std::cos(t) - (c + t) * std::sin(t); };
    auto dg = [&](double t) { return -(a + 1.0) * std::sin(t) - (c + t) * std::cos(t); };
    double lo = 0.0, hi = 0.5 * pi;
    double t = std::min(a / c, 0.25 * pi);
    for (int it = 0; it < 200; ++it) {
        const double gv = g(t);
        if (gv > 0.0) lo = t; else hi = t;
        if (gv == 0.0 || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
        double next = t - gv / dg(t);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - t) <= 1e-17 + 1e-16 * std::abs(t)) {
            t = next;
            break;
        }
        t = next;
    }
    return t;
}

inline double mu_root(std::size_t n, const ExitParameter& a) {
    require(n >= 1, ErrorKind::InvalidArgument, "mode index starts at 1");
    if (a.infinite()) return 0.0;
    if (a.value() == 0.0) return 0.5;
    return 0.5 - mu_theta(n, a.value()) / std::numbers::pi;
}

/// omega_n = (n - mu_n(a)) pi, computed without cancellation.
inline double transport_omega(std::size_t n, const ExitParameter& a) {
    using std::numbers::pi;
    if (a.infinite()) return static_cast<double>(n) * pi;
    if (a.value() == 0.0) return (static_cast<double>(n) - 0.5) * pi;
    return (static_cast<double>(n) - 0.5) * pi + mu_theta(n, a.value());
}

/// y_t = D y_zz - v y_z - k y with inlet y(0) = d and exit condition set by a.
struct TransportCase {
    double D = 1.0;
    double v = 0.0;
    double k = 0.0;
    ExitParameter a = ExitParameter::dirichlet();

    /// zeta^2 = (v^2 + 4kD)/(4 D^2); negative when the case is inadmissible.
    double zeta_squared() const { return (v * v + 4.0 * k * D) / (4.0 * D * D); }

    double zeta() const {
        const double z2 = zeta_squared();
        require(z2 >= 0.0, ErrorKind::InadmissibleCase,
                "k = " + std::to_string(k) + " violates k > -v^2/4D");
        return std::sqrt(z2);
    }

    /// D = 1, k = 0, v = 2 zeta.
    static TransportCase from_zeta(double zeta, ExitParameter a) {
        require(zeta >= 0.0, ErrorKind::InadmissibleCase, "zeta must be >= 0");
        return {1.0, 2.0 * zeta, 0.0, a};
    }
};

inline BoundaryConstants transport_boundary(const ExitParameter& a) {
    if (a.infinite()) return {1.0, 0.0, 1.0, 0.0};
    return {a.value(), 1.0, 1.0, 0.0};
}

/// Problem in the x = e^{-vz/2D} y variable: p = D, r = 1, q = k + v^2/4D.
inline SLProblem transport_problem(const TransportCase& tc, std::size_t resolution = 256) {
    require(tc.D > 0.0 && tc.v >= 0.0, ErrorKind::InvalidArgument, "need D > 0 and v >= 0");
    return constant_problem(tc.D, tc.k + tc.v * tc.v / (4.0 * tc.D), 1.0, transport_boundary(tc.a),
                            resolution);
}

/// Problem in the original y variable: p = D e^{-vz/D}, r = e^{-vz/D},
/// q = k e^{-vz/D}, exit y'(1) = (v/2D - a) y(1).
inline SLProblem transport_problem_y(const TransportCase& tc, std::size_t resolution = 256) {
    require(tc.D > 0.0 && tc.v >= 0.0, ErrorKind::InvalidArgument, "need D > 0 and v >= 0");
    const double D = tc.D, rate = tc.v / tc.D, k = tc.k;
    auto w = [rate](double z) { return std::exp(-rate * z); };
    auto p = Coefficient::function([w, D](double z) { return D * w(z); },
                                   [w, D, rate](double z) { return -rate * D * w(z); });
    auto q = Coefficient::function([w, k](double z) { return k * w(z); },
                                   [w, k, rate](double z) { return -rate * k * w(z); });
    auto r = Coefficient::function(w, [w, rate](double z) { return -rate * w(z); });
    BoundaryConstants bc{1.0, 0.0, 1.0, 0.0};
    if (!tc.a.infinite()) bc = {tc.a.value() - tc.v / (2.0 * tc.D), 1.0, 1.0, 0.0};
    return build_problem(p, q, r, bc, resolution);
}

/// Exact eigen-data of the transport problem sampled on `grid`:
/// lambda_n = k + v^2/4D + D w_n^2, phi_n = sqrt(2/(1 - sin(2w)/(2w))) sin(w z).
inline Spectrum transport_spectrum(const TransportCase& tc, std::size_t n_modes, Grid grid) {
    Spectrum s;
    s.grid = grid;
    s.method = "analytic";
    const double shift = tc.k + tc.v * tc.v / (4.0 * tc.D);
    for (std::size_t n = 1; n <= n_modes; ++n) {
        const double w = transport_omega(n, tc.a);
        const double scale = std::sqrt(2.0 / (1.0 - std::sin(2.0 * w) / (2.0 * w)));
        s.eigenvalues.push_back(shift + tc.D * w * w);
        s.eigenfunctions.push_back(
            GridFunction::sample(grid, [&](double z) { return scale * std::sin(w * z); }));
        s.values_at_0.push_back(0.0);
        s.derivatives_at_0.push_back(scale * w);
    }
    return s;
}

namespace detail {

/// sinh(x) - x without cancellation.
inline double sinh_minus_x(double x) {
    if (std::abs(x) > 0.5) return std::sinh(x) - x;
    const double x2 = x * x;
    double term = x * x2 / 6.0, sum = term;
    for (int k = 2; k < 12; ++k) {
        term *= x2 / ((2.0 * k) * (2.0 * k + 1.0));
        sum += term;
    }
    return sum;
}

}  // namespace detail

/// Squared closed-form transport gain, G(zeta, a)^2 = int_0^1 x~^2 dz.
/// Uses the printed c1, c2 form with e^{2 zeta} factored out for zeta >= 0.5
/// and the equivalent hyperbolic form (cancellation-free) below that.
inline double transport_gain_squared_closed(double zeta, const ExitParameter& a) {
    require(zeta >= 0.0, ErrorKind::InadmissibleCase, "zeta must be real");
    if (zeta >= 0.5) {
        const double E = std::exp(-2.0 * zeta);
        if (a.infinite()) {
            const double one_m = -std::expm1(-2.0 * zeta);
            return ((1.0 - E * E - 4.0 * zeta * E) / (2.0 * zeta)) / (one_m * one_m);
        }
        const double av = a.value();
        const double den = (zeta + av) + (zeta - av) * E;
        const double num = (zeta - av) * (zeta - av) * E * (1.0 - E) / (2.0 * zeta) +
                           (zeta + av) * (zeta + av) * (1.0 - E) / (2.0 * zeta) +
                           2.0 * (zeta - av) * (zeta + av) * E;
        return num / (den * den);
    }
    // Hyperbolic form: x~(z) = (zeta cosh(zeta u) + a sinh(zeta u)) / (zeta cosh zeta + a sinh zeta), u = 1 - z.
    const double sx = zeta > 0.0 ? std::sinh(zeta) / zeta : 1.0;
    const double cubic = zeta > 0.0 ? detail::sinh_minus_x(2.0 * zeta) / (4.0 * zeta * zeta * zeta) : 1.0 / 3.0;
    const double S = 0.5 + zeta * zeta * cubic;  // sinh(2 zeta)/(4 zeta)
    if (a.infinite()) return cubic / (sx * sx);
    const double av = a.value();
    const double num = 0.5 + S + av * sx * sx + av * av * cubic;
    const double den = std::cosh(zeta) + av * sx;
    return num / (den * den);
}

/// Series form of G(zeta, a)^2, truncated at N, plus the asymptotic remainder.
struct SeriesValue {
    double partial = 0.0;
    double tail = 0.0;
};

inline SeriesValue transport_gain_squared_series(double zeta, const ExitParameter& a, std::size_t N) {
    using std::numbers::pi;
    SeriesValue out;
    const double s = zeta * zeta / (pi * pi);
    // Summed from the smallest term upward.
    for (std::size_t n = N; n >= 1; --n) {
        double term;
        if (a.infinite()) {
            const double nn = static_cast<double>(n);
            term = nn * nn / ((s + nn * nn) * (s + nn * nn));
        } else {
            const double w = transport_omega(n, a) / pi;  // n - mu_n
            const double mu = static_cast<double>(n) - w;
            term = w * w * w / ((w + std::sin(2.0 * mu * pi) / (2.0 * pi)) * (s + w * w) * (s + w * w));
        }
        out.partial += term;
    }
    out.partial *= 2.0 / (pi * pi);
    const double mu_inf = a.infinite() ? 0.0 : 0.5;
    out.tail = detail::modal_tail(N, mu_inf, s, 1.0);
    return out;
}

struct GainComparison {
    std::vector<GainReport> routes;

    const GainReport& route(GainRoute r) const {
        for (const auto& g : routes)
            if (g.route == r) return g;
        throw Error(ErrorKind::InvalidArgument, "route not computed");
    }
    double max_discrepancy() const {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& g : routes) lo = std::min(lo, g.gain_C), hi = std::max(hi, g.gain_C);
        return routes.empty() ? 0.0 : hi - lo;
    }
};

namespace detail {

inline GainReport make_report(double value, GainRoute route, double decay, std::size_t N = 0,
                              double partial = 0.0) {
    GainReport r;
    r.gain_C = value;
    r.route = route;
    r.truncation_N = N;
    r.partial_gain = partial;
    r.tail_estimate = route == GainRoute::series ? value - partial : 0.0;
    r.iss_decay_rate = decay;
    r.at_epsilon(1.0);
    return r;
}

}  // namespace detail

/// Transport gain G(zeta, a) by series (mu_n from mu_root) and closed form.
inline GainComparison transport_gain(const TransportCase& tc, std::size_t N = 10000) {
    const double zeta = tc.zeta();
    const double w1 = transport_omega(1, tc.a);
    const double decay = tc.D * (zeta * zeta + w1 * w1);
    const auto series = transport_gain_squared_series(zeta, tc.a, N);
    GainComparison out;
    out.routes.push_back(detail::make_report(std::sqrt(series.partial + series.tail), GainRoute::series,
                                             decay, N, std::sqrt(series.partial)));
    out.routes.push_back(detail::make_report(std::sqrt(transport_gain_squared_closed(zeta, tc.a)),
                                             GainRoute::closed_form, decay));
    return out;
}

/// Weighted-L2 gain of pure advection y_t + v y_z = -k y, measured with weight
/// e^{-vz/D}: sqrt((1 - e^{-x})/x), x = v/D + 2k/v.
inline double advection_gain(double v, double D, double k) {
    require(v > 0.0 && D > 0.0, ErrorKind::InvalidArgument, "need v > 0 and D > 0");
    const double x = v / D + 2.0 * k / v;
    require(x > 0.0, ErrorKind::InadmissibleCase, "v/D + 2k/v must be positive");
    return std::sqrt(-std::expm1(-x) / x);
}

/// Same expression with the exponent as typeset in the published estimate,
/// l pi^-1 zeta^2 + pi l^-1 with l = 2D/(v pi^2). Kept for comparison only.
inline double advection_gain_literal(double v, double D, double k) {
    using std::numbers::pi;
    require(v > 0.0 && D > 0.0, ErrorKind::InvalidArgument, "need v > 0 and D > 0");
    const double zeta = TransportCase{D, v, k, ExitParameter::dirichlet()}.zeta();
    const double l = 2.0 * D / (v * pi * pi);
    const double x = l * zeta * zeta / pi + pi / l;
    return std::sqrt(-std::expm1(-x) / x);
}

enum class AdvectionForm { derived, literal };

struct Figure1Row {
    double zeta = 0.0;
    double g_a0 = 0.0, g_a1 = 0.0, g_ainf = 0.0, g_advection = 0.0;
};

struct Figure1Table {
    std::vector<Figure1Row> rows;
    bool ordering_holds = true;               // G(.,0) > G(.,1) > G(.,inf) on every row
    bool columns_nonincreasing = true;        // over rows with zeta >= 0.1
    std::vector<std::pair<double, double>> crossovers;  // zeta brackets of sign changes of adv - G(.,inf)
    double max_route_discrepancy = 0.0;       // series vs closed form over the sweep
};

/// Gains of the transport family for a = 0, 1, inf and the advection gain,
/// with k = 0 (D = 1, v = 2 zeta).
inline Figure1Table sweep_figure1(const std::vector<double>& zeta_grid,
                                  AdvectionForm form = AdvectionForm::derived, std::size_t N = 10000) {
    Figure1Table t;
    for (double zeta : zeta_grid) {
        require(zeta > 0.0, ErrorKind::InvalidArgument, "zeta grid must be positive");
        Figure1Row row;
        row.zeta = zeta;
        const ExitParameter as[3] = {ExitParameter::robin(0.0), ExitParameter::robin(1.0),
                                     ExitParameter::dirichlet()};
        double* cols[3] = {&row.g_a0, &row.g_a1, &row.g_ainf};
        for (int j = 0; j < 3; ++j) {
            const auto cmp = transport_gain(TransportCase::from_zeta(zeta, as[j]), N);
            *cols[j] = cmp.route(GainRoute::closed_form).gain_C;
            t.max_route_discrepancy = std::max(t.max_route_discrepancy, cmp.max_discrepancy());
        }
        const double v = 2.0 * zeta;
        row.g_advection = form == AdvectionForm::derived ? advection_gain(v, 1.0, 0.0)
                                                         : advection_gain_literal(v, 1.0, 0.0);
        t.rows.push_back(row);
    }
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        if (!(r.g_a0 > r.g_a1 && r.g_a1 > r.g_ainf)) t.ordering_holds = false;
        if (i == 0) continue;
        const auto& p = t.rows[i - 1];
        if (p.zeta >= 0.1 && r.zeta > p.zeta &&
            (r.g_a0 > p.g_a0 || r.g_a1 > p.g_a1 || r.g_ainf > p.g_ainf || r.g_advection > p.g_advection))
            t.columns_nonincreasing = false;
        const double s0 = p.g_advection - p.g_ainf, s1 = r.g_advection - r.g_ainf;
        if ((s0 > 0.0) != (s1 > 0.0)) t.crossovers.emplace_back(p.zeta, r.zeta);
    }
    return t;
}

/// Gain G of the backstepping target x_t = D x_zz - c x with Dirichlet ends:
/// 1/sqrt(3) for c = 0, otherwise G(zeta, inf) with zeta = sqrt(c/D).
inline GainComparison backstepping_gain(double c, double D, std::size_t N = 10000) {
    using std::numbers::pi;
    require(c >= 0.0 && D > 0.0, ErrorKind::InvalidArgument, "need c >= 0 and D > 0");
    const double zeta = std::sqrt(c / D);
    const double decay = c + D * pi * pi;
    const auto series = transport_gain_squared_series(zeta, ExitParameter::dirichlet(), N);
    GainComparison out;
    out.routes.push_back(detail::make_report(std::sqrt(series.partial + series.tail), GainRoute::series,
                                             decay, N, std::sqrt(series.partial)));
    const double closed = c == 0.0 ? 1.0 / std::sqrt(3.0)
                                   : std::sqrt(transport_gain_squared_closed(zeta, ExitParameter::dirichlet()));
    out.routes.push_back(detail::make_report(closed, GainRoute::closed_form, decay));
    return out;
}

}  // namespace issgain
