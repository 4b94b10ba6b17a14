#pragma once

// Sturm-Liouville operator
//
//   (A f)(z) = -(1/r) (p f')' + (q/r) f,   b1 f(0) + b2 f'(0) = 0,  a1 f(1) + a2 f'(1) = 0,
//
// its leading eigenpairs, the summability hypothesis on them, and the steady
// problem driven by unit boundary data at z = 0.

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "issgain/coefficient.hpp"
#include "issgain/error.hpp"
#include "issgain/grid.hpp"
#include "issgain/tridiagonal.hpp"

namespace issgain {

/// Separated boundary constants: b1 f(0) + b2 f'(0) (inlet), a1 f(1) + a2 f'(1) (exit).
struct BoundaryConstants {
    double a1 = 1.0, a2 = 0.0;
    double b1 = 1.0, b2 = 0.0;

    double inlet_norm() const { return std::hypot(b1, b2); }
    bool dirichlet_inlet() const { return b2 == 0.0; }
    bool dirichlet_exit() const { return a2 == 0.0; }
};

class SLProblem {
public:
    Coefficient p, q, r;
    BoundaryConstants bc;

    std::size_t resolution() const noexcept { return resolution_; }
    Grid grid() const { return Grid(resolution_); }

    bool constant_coefficients() const {
        return p.is_constant() && q.is_constant() && r.is_constant();
    }

    SLProblem with_resolution(std::size_t m) const;

private:
    friend SLProblem build_problem(Coefficient, Coefficient, Coefficient, BoundaryConstants,
                                   std::size_t);
    std::size_t resolution_ = 256;
};

/// Validates coefficients and boundary constants. The resolution must be even
/// and at least 64; positivity of p and r is checked on the doubled grid that
/// the eigen-solver also uses.
inline SLProblem build_problem(Coefficient p, Coefficient q, Coefficient r, BoundaryConstants bc,
                               std::size_t resolution = 256) {
    require(resolution >= 64 && resolution % 2 == 0, ErrorKind::InvalidArgument,
            "resolution must be even and >= 64");
    require(std::abs(bc.a1) + std::abs(bc.a2) > 0.0, ErrorKind::DegenerateBoundary,
            "|a1| + |a2| must be positive");
    require(std::abs(bc.b1) + std::abs(bc.b2) > 0.0, ErrorKind::DegenerateBoundary,
            "|b1| + |b2| must be positive");
    const std::size_t fine = 2 * resolution;
    for (std::size_t i = 0; i <= 2 * fine; ++i) {
        const double z = static_cast<double>(i) / static_cast<double>(2 * fine);
        const double pv = p(z), rv = r(z), qv = q(z);
        require(std::isfinite(pv) && std::isfinite(rv) && std::isfinite(qv),
                ErrorKind::NonPositiveCoefficient, "coefficient not finite at z=" + std::to_string(z));
        require(pv > 0.0, ErrorKind::NonPositiveCoefficient, "p <= 0 at z=" + std::to_string(z));
        require(rv > 0.0, ErrorKind::NonPositiveCoefficient, "r <= 0 at z=" + std::to_string(z));
    }
    SLProblem prob;
    prob.p = std::move(p);
    prob.q = std::move(q);
    prob.r = std::move(r);
    prob.bc = bc;
    prob.resolution_ = resolution;
    return prob;
}

inline SLProblem SLProblem::with_resolution(std::size_t m) const {
    return build_problem(p, q, r, bc, m);
}

/// Constant-coefficient convenience constructor.
inline SLProblem constant_problem(double p, double q, double r, BoundaryConstants bc,
                                  std::size_t resolution = 256) {
    return build_problem(Coefficient::constant(p), Coefficient::constant(q),
                         Coefficient::constant(r), bc, resolution);
}

/// Dirichlet Laplacian on [0,1]: p = r = 1, q = 0, f(0) = f(1) = 0.
inline SLProblem dirichlet_laplacian(std::size_t resolution = 256) {
    return constant_problem(1.0, 0.0, 1.0, {1.0, 0.0, 1.0, 0.0}, resolution);
}

inline double weighted_norm(const GridFunction& f, const SLProblem& problem) {
    require_same_grid(f.grid, problem.grid());
    std::vector<double> g(f.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = problem.r(f.grid.node(i)) * f[i] * f[i];
    return std::sqrt(std::max(0.0, quadrature::simpson(g, f.grid.spacing())));
}

inline double weighted_inner(const GridFunction& f, const GridFunction& g, const SLProblem& problem) {
    require_same_grid(f.grid, problem.grid());
    require_same_grid(g.grid, problem.grid());
    std::vector<double> w(f.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = problem.r(f.grid.node(i)) * f[i] * g[i];
    return quadrature::simpson(w, f.grid.spacing());
}

namespace detail {

/// Conservative second-order discretization of -(p u')' + q u on M intervals.
/// Rows are scaled by h so the stiffness K is symmetric; W is the lumped
/// weight (h r_i inside, h r/2 at Robin end nodes). Dirichlet end nodes are
/// eliminated: the unknowns are nodes first..last.
struct Discretization {
    Grid grid;
    std::size_t first = 0, last = 0;
    Tridiagonal stiffness;
    std::vector<double> weight;

    std::size_t unknowns() const { return last - first + 1; }
};

inline Discretization discretize(const SLProblem& prob, std::size_t m) {
    Discretization d;
    d.grid = Grid(m);
    const double h = d.grid.spacing();
    const auto& bc = prob.bc;
    d.first = bc.dirichlet_inlet() ? 1 : 0;
    d.last = bc.dirichlet_exit() ? m - 1 : m;
    const std::size_t n = d.unknowns();
    d.stiffness = Tridiagonal(n);
    d.weight.assign(n, 0.0);

    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = d.first + k;
        const double z = d.grid.node(i);
        double diag = 0.0, w = 0.0;
        if (i > 0) {
            const double pm = prob.p(z - 0.5 * h) / h;
            diag += pm;
            if (k > 0) d.stiffness.lower[k] = -pm;
            w += 0.5 * h;
        } else {
            diag -= prob.p(0.0) * bc.b1 / bc.b2;
        }
        if (i < m) {
            const double pp = prob.p(z + 0.5 * h) / h;
            diag += pp;
            if (k + 1 < n) d.stiffness.upper[k] = -pp;
            w += 0.5 * h;
        } else {
            diag += prob.p(1.0) * bc.a1 / bc.a2;
        }
        d.stiffness.diag[k] = diag + w * prob.q(z);
        d.weight[k] = w * prob.r(z);
    }
    return d;
}

/// Contribution of inlet data `value` (b1 x(0) + b2 x'(0) = value) to the
/// right-hand side of K x = F over the unknowns, and the Dirichlet node value.
struct InletForcing {
    double first_row = 0.0;
    double node_value = 0.0;
};

inline InletForcing inlet_forcing(const SLProblem& prob, const Grid& grid, double value) {
    const auto& bc = prob.bc;
    if (bc.dirichlet_inlet()) {
        const double x0 = value / bc.b1;
        return {prob.p(0.5 * grid.spacing()) / grid.spacing() * x0, x0};
    }
    return {-prob.p(0.0) * value / bc.b2, 0.0};
}

struct RawModes {
    std::vector<double> eigenvalues;
    std::vector<std::vector<double>> vectors;  // full grid, W-normalized
};

inline RawModes raw_modes(const SLProblem& prob, std::size_t m, std::size_t count) {
    const auto disc = discretize(prob, m);
    const auto n = static_cast<lapack_int>(disc.unknowns());
    require(count <= static_cast<std::size_t>(n), ErrorKind::InvalidArgument,
            "more modes requested than grid unknowns");
    std::vector<double> d(n), e(std::max<lapack_int>(n, 1), 0.0);
    std::vector<double> isq(n);
    for (lapack_int k = 0; k < n; ++k) isq[k] = 1.0 / std::sqrt(disc.weight[k]);
    for (lapack_int k = 0; k < n; ++k) {
        d[k] = disc.stiffness.diag[k] * isq[k] * isq[k];
        if (k + 1 < n) e[k] = disc.stiffness.upper[k] * isq[k] * isq[k + 1];
    }
    lapack_int found = 0;
    std::vector<double> w(n), z(static_cast<std::size_t>(n) * count);
    std::vector<lapack_int> support(2 * count);
    const lapack_int info = LAPACKE_dstevr(
        LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0, 1,
        static_cast<lapack_int>(count), 0.0, &found, w.data(), z.data(), n, support.data());
    require(info == 0 && found == static_cast<lapack_int>(count), ErrorKind::ConvergenceFailure,
            "tridiagonal eigen-solver failed (info=" + std::to_string(info) + ")");

    RawModes out;
    out.eigenvalues.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(count));
    for (std::size_t j = 0; j < count; ++j) {
        std::vector<double> v(disc.grid.size(), 0.0);
        for (lapack_int k = 0; k < n; ++k)
            v[disc.first + static_cast<std::size_t>(k)] =
                z[j * static_cast<std::size_t>(n) + static_cast<std::size_t>(k)] * isq[k];
        out.vectors.push_back(std::move(v));
    }
    return out;
}

/// Sign convention: first nonzero of (phi(0), phi'(0)) positive.
inline void fix_sign(std::vector<double>& v, const BoundaryConstants& bc) {
    const double probe = bc.dirichlet_inlet() ? v[1] : v[0];
    if (probe < 0.0)
        for (auto& x : v) x = -x;
}

}  // namespace detail

/// Leading eigenpairs with eigenfunctions sampled on `grid`, normalized so
/// that ||phi_n||_r = 1 under composite Simpson quadrature.
struct Spectrum {
    Grid grid;
    std::vector<double> eigenvalues;
    std::vector<GridFunction> eigenfunctions;
    std::vector<double> values_at_0;
    std::vector<double> derivatives_at_0;
    std::string method;         // "fd-richardson" or "analytic"
    std::string normalization = "r-weighted L2, composite Simpson";

    std::size_t size() const noexcept { return eigenvalues.size(); }

    double max_abs(std::size_t n) const {
        double m = 0.0;
        for (double v : eigenfunctions[n].values) m = std::max(m, std::abs(v));
        return m;
    }
};

/// phi'(0) for an eigenfunction vanishing at z = 0, from the weak form with
/// test function psi(z) = (1-z)^2 (psi(1) = psi'(1) = 0):
///   p(0) phi'(0) = int (p psi')' phi dz - int psi (q - lambda r) phi dz.
inline double dirichlet_flux_derivative(const SLProblem& prob, const GridFunction& phi, double lambda) {
    std::vector<double> f(phi.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double z = phi.grid.node(i);
        const double psi = (1.0 - z) * (1.0 - z);
        const double dpsi_flux = -2.0 * (1.0 - z) * prob.p.derivative(z) + 2.0 * prob.p(z);
        f[i] = (dpsi_flux - psi * (prob.q(z) - lambda * prob.r(z))) * phi[i];
    }
    return quadrature::simpson(f, phi.grid.spacing()) / prob.p(0.0);
}

/// Fills values_at_0 / derivatives_at_0 from the sampled eigenfunctions.
inline void attach_boundary_data(Spectrum& s, const SLProblem& prob) {
    s.values_at_0.clear();
    s.derivatives_at_0.clear();
    for (std::size_t n = 0; n < s.size(); ++n) {
        const auto& phi = s.eigenfunctions[n];
        if (prob.bc.dirichlet_inlet()) {
            s.values_at_0.push_back(0.0);
            s.derivatives_at_0.push_back(dirichlet_flux_derivative(prob, phi, s.eigenvalues[n]));
        } else {
            s.values_at_0.push_back(phi[0]);
            s.derivatives_at_0.push_back(-prob.bc.b1 * phi[0] / prob.bc.b2);
        }
    }
}

/// First `n_modes` eigenpairs. The discrete problem is solved on M and 2M
/// intervals and both eigenvalues and eigenfunctions (at the M-grid nodes)
/// are Richardson-extrapolated to remove the O(h^2) term.
inline Spectrum solve_spectrum(const SLProblem& prob, std::size_t n_modes) {
    require(n_modes >= 1, ErrorKind::InvalidArgument, "need at least one mode");
    const std::size_t m = prob.resolution();
    require(n_modes <= m / 4, ErrorKind::InvalidArgument,
            "n_modes must not exceed resolution/4 (" + std::to_string(m / 4) + ")");
    auto coarse = detail::raw_modes(prob, m, n_modes);
    auto fine = detail::raw_modes(prob, 2 * m, n_modes);

    Spectrum s;
    s.grid = prob.grid();
    s.method = "fd-richardson";
    for (std::size_t n = 0; n < n_modes; ++n) {
        const double lc = coarse.eigenvalues[n], lf = fine.eigenvalues[n];
        if (std::abs(lf - lc) > 0.1 * std::max(1.0, std::abs(lc)))
            throw Error(ErrorKind::ConvergenceFailure,
                        "mode " + std::to_string(n + 1) + " not resolved: " + std::to_string(lc) +
                            " vs " + std::to_string(lf));
        s.eigenvalues.push_back((4.0 * lf - lc) / 3.0);

        auto& vc = coarse.vectors[n];
        auto& vf = fine.vectors[n];
        detail::fix_sign(vc, prob.bc);
        detail::fix_sign(vf, prob.bc);
        std::vector<double> v(s.grid.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = (4.0 * vf[2 * i] - vc[i]) / 3.0;
        GridFunction phi(s.grid, std::move(v));
        const double norm = weighted_norm(phi, prob);
        for (auto& x : phi.values) x /= norm;
        s.eigenfunctions.push_back(std::move(phi));
    }
    for (std::size_t n = 1; n < n_modes; ++n)
        require(s.eigenvalues[n] > s.eigenvalues[n - 1], ErrorKind::ConvergenceFailure,
                "extrapolated eigenvalues not strictly increasing at mode " + std::to_string(n + 1));
    attach_boundary_data(s, prob);
    return s;
}

/// Second-order interior evaluation of A f; endpoint entries are zero.
inline GridFunction apply_operator(const SLProblem& prob, const GridFunction& f) {
    require_same_grid(f.grid, prob.grid());
    const double h = f.grid.spacing();
    GridFunction out = GridFunction::zeros(f.grid);
    for (std::size_t i = 1; i + 1 < f.size(); ++i) {
        const double z = f.grid.node(i);
        const double flux = prob.p(z + 0.5 * h) * (f[i + 1] - f[i]) -
                            prob.p(z - 0.5 * h) * (f[i] - f[i - 1]);
        out[i] = (-flux / (h * h) + prob.q(z) * f[i]) / prob.r(z);
    }
    return out;
}

struct HypothesisReport {
    double lambda1 = 0.0;
    bool positive = false;
    double partial_sum = 0.0;
    double tail_bound = std::numeric_limits<double>::infinity();
    bool heuristic_tail = false;
    bool certified = false;
    std::string note;

    /// Positivity plus a finite (possibly heuristic) bound on the summability series.
    bool satisfied() const { return positive && std::isfinite(partial_sum + tail_bound); }
};

namespace detail {

/// Power-law fit lambda_n ~ A n^beta over the upper half of the modes.
struct PowerFit {
    double amplitude = 0.0, exponent = 0.0;
};

inline PowerFit fit_growth(const std::vector<double>& lambdas) {
    const std::size_t n = lambdas.size();
    const std::size_t start = n / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
    for (std::size_t k = start; k < n; ++k) {
        if (lambdas[k] <= 0.0) continue;
        const double x = std::log(static_cast<double>(k + 1)), y = std::log(lambdas[k]);
        sx += x, sy += y, sxx += x * x, sxy += x * y, cnt += 1;
    }
    if (cnt < 2) return {};
    const double beta = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    return {std::exp((sy - beta * sx) / cnt), beta};
}

}  // namespace detail

/// Checks lambda_1 > 0 and summability of lambda_n^{-1} max|phi_n|. The tail
/// is bounded analytically for constant coefficients with a Dirichlet inlet
/// and a non-negative exit parameter, where lambda_n >= Q/R + (P/R) pi^2 (n-1/2)^2
/// and max|phi_n| <= sqrt(2 pi / (pi - 1)) / sqrt(R). Otherwise the tail is
/// estimated from a power-law fit and the report stays uncertified.
inline HypothesisReport check_hypothesis_H(const Spectrum& spectrum, const SLProblem& prob) {
    using std::numbers::pi;
    require(spectrum.size() >= 10, ErrorKind::InvalidArgument, "need at least 10 modes");
    HypothesisReport rep;
    rep.lambda1 = spectrum.eigenvalues.front();
    rep.positive = rep.lambda1 > 0.0;
    const std::size_t n = spectrum.size();
    for (std::size_t k = 0; k < n; ++k)
        rep.partial_sum += spectrum.max_abs(k) / std::abs(spectrum.eigenvalues[k]);

    const auto& bc = prob.bc;
    const bool exit_ok = bc.dirichlet_exit() || bc.a1 / bc.a2 >= 0.0;
    if (prob.constant_coefficients() && bc.dirichlet_inlet() && exit_ok) {
        const double P = *prob.p.constant_value(), Q = *prob.q.constant_value(),
                     R = *prob.r.constant_value();
        const double alpha = Q / R, beta = P * pi * pi / R;
        const double shift = static_cast<double>(n) - 0.5;
        const double phimax = std::sqrt(2.0 * pi / (pi - 1.0)) / std::sqrt(R);
        if (alpha >= 0.0) {
            rep.tail_bound = phimax / (beta * shift);
        } else if (beta * shift * shift > 2.0 * -alpha) {
            rep.tail_bound = 2.0 * phimax / (beta * shift);
        }
        rep.certified = rep.positive && std::isfinite(rep.tail_bound);
        rep.note = "analytic tail (constant coefficients)";
    } else {
        const auto fit = detail::fit_growth(spectrum.eigenvalues);
        double phimax = 0.0;
        for (std::size_t k = n / 2; k < n; ++k) phimax = std::max(phimax, spectrum.max_abs(k));
        if (fit.exponent > 1.05 && fit.amplitude > 0.0) {
            const double x = static_cast<double>(n) + 0.5;
            rep.tail_bound = phimax / fit.amplitude * std::pow(x, 1.0 - fit.exponent) /
                             (fit.exponent - 1.0);
        }
        rep.heuristic_tail = true;
        rep.certified = false;
        rep.note = "heuristic tail: power-law fit lambda_n ~ " + std::to_string(fit.amplitude) +
                   " n^" + std::to_string(fit.exponent) + " (uncertified)";
    }
    return rep;
}

struct SteadyState {
    GridFunction profile;
    double residual = 0.0;  // relative interior residual of (p x')' - q x
};

namespace detail {

inline std::vector<double> steady_raw(const SLProblem& prob, std::size_t m, double value) {
    auto disc = discretize(prob, m);
    const auto inlet = inlet_forcing(prob, disc.grid, value);
    std::vector<double> rhs(disc.unknowns(), 0.0);
    rhs[0] += inlet.first_row;
    const auto x = solve_tridiagonal(disc.stiffness, rhs);
    std::vector<double> full(disc.grid.size(), 0.0);
    if (prob.bc.dirichlet_inlet()) full[0] = inlet.node_value;
    for (std::size_t k = 0; k < x.size(); ++k) full[disc.first + k] = x[k];
    return full;
}

}  // namespace detail

/// Fourth-order interior residual of (p x')' - q x = 0 relative to the size
/// of its terms and of the flux p x'.
inline double steady_residual(const SLProblem& prob, const GridFunction& x) {
    const double h = x.grid.spacing();
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 2; i + 2 < x.size(); ++i) {
        const double z = x.grid.node(i);
        const double d1 = (x[i - 2] - 8 * x[i - 1] + 8 * x[i + 1] - x[i + 2]) / (12 * h);
        const double d2 = (-x[i - 2] + 16 * x[i - 1] - 30 * x[i] + 16 * x[i + 1] - x[i + 2]) / (12 * h * h);
        const double a = prob.p(z) * d2, b = prob.p.derivative(z) * d1, c = prob.q(z) * x[i];
        worst = std::max(worst, std::abs(a + b - c));
        scale = std::max({scale, std::abs(a), std::abs(b), std::abs(c), std::abs(prob.p(z) * d1)});
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

/// Solves (p x')' - q x = 0, b1 x(0) + b2 x'(0) = boundary_value,
/// a1 x(1) + a2 x'(1) = 0, Richardson-extrapolated from M and 2M intervals.
inline SteadyState solve_steady_bvp(const SLProblem& prob, double boundary_value) {
    const std::size_t m = prob.resolution();
    const auto xc = detail::steady_raw(prob, m, boundary_value);
    const auto xf = detail::steady_raw(prob, 2 * m, boundary_value);
    std::vector<double> v(m + 1);
    for (std::size_t i = 0; i <= m; ++i) v[i] = (4.0 * xf[2 * i] - xc[i]) / 3.0;
    SteadyState out{GridFunction(prob.grid(), std::move(v)), 0.0};
    out.residual = steady_residual(prob, out.profile);
    return out;
}

struct FourierCoefficients {
    std::vector<double> coefficients;
    double norm_squared = 0.0;  // ||f||_r^2
    double parseval_defect = 0.0;  // ||f||_r^2 - sum c_n^2
};

inline FourierCoefficients fourier_coefficients(const GridFunction& f, const Spectrum& spectrum,
                                                const SLProblem& prob) {
    require_same_grid(f.grid, spectrum.grid);
    require_same_grid(f.grid, prob.grid());
    const auto w = quadrature::simpson_weights(f.grid.intervals(), f.grid.spacing());
    std::vector<double> rf(f.size());
    for (std::size_t i = 0; i < rf.size(); ++i) rf[i] = w[i] * prob.r(f.grid.node(i)) * f[i];

    FourierCoefficients out;
    double sum = 0.0;
    for (const auto& phi : spectrum.eigenfunctions) {
        double c = 0.0;
        for (std::size_t i = 0; i < rf.size(); ++i) c += rf[i] * phi[i];
        out.coefficients.push_back(c);
        sum += c * c;
    }
    const double nrm = weighted_norm(f, prob);
    out.norm_squared = nrm * nrm;
    out.parseval_defect = out.norm_squared - sum;
    return out;
}

}  // namespace issgain
