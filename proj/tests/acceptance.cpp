// Acceptance checks. `acceptance` runs every criterion; `acceptance N` runs
// one. Each prints a single PASS/FAIL line; the exit status is nonzero when
// any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "issgain/backstepping.hpp"
#include "issgain/gains.hpp"
#include "issgain/pde_sim.hpp"
#include "issgain/sturm_liouville.hpp"

using namespace issgain;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double worst_violation(const ISSCheckReport& rep) {
    return *std::max_element(rep.worst_relative_violation.begin(), rep.worst_relative_violation.end());
}

const double inv_sqrt3 = 1.0 / std::sqrt(3.0);

// Closed-form forward kernel of the reaction-diffusion backstepping transform,
// x = 1 - z, y = 1 - s, lam = (p + c)/D.
double bessel_kernel(double lam, double z, double s) {
    const double x = 1.0 - z, y = 1.0 - s;
    const double arg2 = std::abs(lam) * (x * x - y * y);
    if (arg2 < 1e-12) return 0.5 * lam * y;
    const double a = std::sqrt(arg2);
    return lam > 0 ? lam * y * std::cyl_bessel_i(1.0, a) / a : lam * y * std::cyl_bessel_j(1.0, a) / a;
}

Outcome gain_triple() {
    Stopwatch sw;
    const auto prob = dirichlet_laplacian();
    const TransportCase lap{1.0, 0.0, 0.0, ExitParameter::dirichlet()};
    const auto spec = transport_spectrum(lap, 10000, prob.grid());
    const double series = gain_series(prob, spec, 10000).gain_C;
    const double bvp = gain_bvp(prob).gain_C;
    const double err = std::max({std::abs(series - inv_sqrt3), std::abs(bvp - inv_sqrt3), std::abs(series - bvp)});
    const double t = sw.seconds();
    return {err <= 1e-6 && t < 1.0,
            fmt("series %.10f bvp %.10f closed %.10f max diff %.2e (tol 1e-6), %.2f s (limit 1 s)", series, bvp,
                inv_sqrt3, err, t)};
}

Outcome series_vs_bvp() {
    Stopwatch sw;
    double worst = 0.0;
    for (double zeta : {0.5, 1.0, 2.0}) {
        for (auto a : {ExitParameter::robin(0.0), ExitParameter::robin(1.0), ExitParameter::dirichlet()}) {
            const auto tc = TransportCase::from_zeta(zeta, a);
            const auto prob = transport_problem(tc);
            const auto spec = transport_spectrum(tc, 10000, prob.grid());
            const double series = gain_series(prob, spec, 10000).gain_C;
            const double bvp = gain_bvp(prob).gain_C;
            worst = std::max(worst, std::abs(series - bvp));
        }
    }
    const double t = sw.seconds();
    return {worst <= 1e-6 && t < 5.0, fmt("max |series - bvp| %.2e over 9 cases (tol 1e-6), %.2f s (limit 5 s)", worst, t)};
}

Outcome series_vs_closed() {
    double worst = 0.0, at = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double zeta = 0.1 + 4.9 * i / 49.0;
        const auto g = transport_gain(TransportCase::from_zeta(zeta, ExitParameter::dirichlet()));
        if (g.max_discrepancy() > worst) worst = g.max_discrepancy(), at = zeta;
    }
    return {worst <= 1e-8, fmt("max |series - closed| %.2e at zeta %.3f over 50 points (tol 1e-8)", worst, at)};
}

Outcome eigensolver() {
    const auto prob = dirichlet_laplacian();
    const auto spec = solve_spectrum(prob, 10);
    double rel = 0.0, gram = 0.0;
    for (std::size_t n = 0; n < 10; ++n) {
        const double exact = std::pow((n + 1) * std::numbers::pi, 2);
        rel = std::max(rel, std::abs(spec.eigenvalues[n] - exact) / exact);
        for (std::size_t m = 0; m < 10; ++m)
            gram = std::max(gram, std::abs(weighted_inner(spec.eigenfunctions[n], spec.eigenfunctions[m], prob) -
                                           (n == m ? 1.0 : 0.0)));
    }
    return {rel <= 1e-6 && gram <= 1e-6,
            fmt("max relative eigenvalue error %.2e, Gram defect %.2e (tol 1e-6)", rel, gram)};
}

Outcome transport_envelope() {
    Stopwatch sw;
    const TransportCase tc{1.0, 1.0, 0.0, ExitParameter::dirichlet()};
    const auto prob = transport_problem(tc);
    const auto spec = solve_spectrum(prob, 64);
    const auto envelope = theorem_envelope(gain_bvp(prob));
    const auto x0 = GridFunction::sample(prob.grid(), [](double z) { return 2.0 * std::sin(std::numbers::pi * z); });
    const std::vector<double> eps{0.1, 1.0, 10.0};
    bool pass = true;
    double worst = -1.0;
    std::string which;
    const std::vector<std::pair<const char*, Disturbance>> signals{
        {"constant", Disturbance::constant(1.0)}, {"sinusoid", Disturbance::sinusoid(0.5, 1.0, 3.0)}};
    for (const auto& [name, d] : signals) {
        const auto fd = simulate_fd(prob, d, x0, 1e-3, 4.0, 10);
        const auto sp = simulate_spectral(prob, spec, d, x0, 1e-3, 4.0, 64, 10);
        for (const auto* tr : {&fd, &sp}) {
            const auto rep = verify_iss(*tr, envelope, eps, 1e-3);
            pass = pass && rep.pass;
            if (worst_violation(rep) > worst) worst = worst_violation(rep), which = name + (" " + tr->method);
        }
    }
    const double t = sw.seconds();
    return {pass && t < 30.0, fmt("4 trajectories x 3 epsilons; worst relative violation %.2e (%s; slack 1e-3), %.2f s (limit 30 s)",
                                  worst, which.c_str(), t)};
}

Outcome tightness() {
    const auto prob = dirichlet_laplacian();
    const double lambda1 = solve_spectrum(prob, 1).eigenvalues[0];
    const double C = gain_bvp(prob).gain_C;
    const double T = 10.0 / lambda1;
    const auto d = Disturbance::constant(prob.bc.inlet_norm());
    const auto tr = simulate_fd(prob, d, GridFunction::zeros(prob.grid()), 1e-3, T, 100000);
    const double gap = std::abs(tr.norms.back() - C);
    return {gap <= 1e-3, fmt("||x[T]|| %.8f vs C %.8f at T = %.4f, gap %.2e (tol 1e-3)", tr.norms.back(), C, T, gap)};
}

Outcome cross_route() {
    const TransportCase tc{1.0, 1.0, 0.0, ExitParameter::dirichlet()};
    const auto d = Disturbance::sinusoid(1.0, 1.0, 3.0, -0.5 * std::numbers::pi);
    const double T = 1.0;
    const auto fine = transport_problem(tc, 1024);
    const auto spec = transport_spectrum(tc, 256, fine.grid());
    const auto ref = simulate_lifted(fine, spec, d, GridFunction::zeros(fine.grid()), 1e-3, T, 256, 1000);
    std::vector<double> err;
    for (std::size_t m : {64u, 128u}) {
        const auto prob = transport_problem(tc, m);
        const double dt = 0.064 / static_cast<double>(m);
        const auto fd = simulate_fd(prob, d, GridFunction::zeros(prob.grid()), dt, T, 1u << 30);
        err.push_back(state_distance(prob, fd.states.back(), ref.states.back()));
    }
    const double ratio = err[0] / err[1];
    return {ratio >= 3.0 && ratio <= 5.0,
            fmt("L2 error %.3e (M=64, dt=1e-3) -> %.3e (M=128, dt=5e-4), ratio %.3f (need [3, 5])", err[0], err[1], ratio)};
}

Outcome figure1() {
    std::vector<double> grid;
    for (int i = 0; i < 80; ++i) grid.push_back(0.05 * std::pow(80.0, i / 79.0));
    const auto table = sweep_figure1(grid);

    // zeta -> 0+ limits, read from the closed forms at a small zeta.
    const double small = 1e-6;
    double pde_gap = 0.0;
    for (auto a : {ExitParameter::robin(0.0), ExitParameter::robin(1.0), ExitParameter::dirichlet()})
        pde_gap = std::max(pde_gap, std::abs(std::sqrt(transport_gain_squared_closed(small, a)) - inv_sqrt3));
    const double adv_gap = std::abs(advection_gain(2.0 * small, 1.0, 0.0) - 1.0);
    const bool limits = pde_gap <= 1e-4 && adv_gap <= 1e-4;
    const bool one_crossover = table.crossovers.size() == 1;

    return {table.ordering_holds && limits && one_crossover,
            fmt("(a) ordering %s; (b) max |G(0+,a) - 1/sqrt3| %.3e, |adv(0+) - 1| %.2e -> %s; (c) crossovers %zu -> %s",
                table.ordering_holds ? "holds" : "violated", pde_gap, adv_gap, limits ? "ok" : "fail",
                table.crossovers.size(), one_crossover ? "ok" : "fail")};
}

Outcome advection() {
    const double v = 1.0, k = 0.0, D = 1.0;
    const auto d = Disturbance::sinusoid(0.0, 1.0, 2.0);
    auto y0 = [&](double z) { return std::exp(-k * z / v) * d(-z / v); };
    const auto tr = advection_exact(v, k, d, y0, Grid(512), 1e-3, 5.0, D, 10);
    const auto rep = verify_iss(tr, advection_envelope(v, D, k, AdvectionForm::derived), {0.1, 1.0, 10.0}, 1e-3);
    return {rep.pass, fmt("worst relative violation %.2e over %zu stored times (slack 1e-3)", worst_violation(rep),
                          tr.size())};
}

Outcome backstepping() {
    Stopwatch sw;
    const ClosedLoopConfig probe{1.0, 5.0, 0.0, Disturbance::constant(0.0)};
    const auto k = solve_kernel(probe);
    const auto l = solve_inverse_kernel(probe);
    double kernel_err = 0.0;
    const std::size_t m = k.grid.intervals();
    for (std::size_t i = 0; i <= m; ++i)
        for (std::size_t j = i; j <= m; ++j)
            kernel_err = std::max(kernel_err, std::abs(k(i, j) - bessel_kernel(5.0, k.grid.node(i), k.grid.node(j))));
    const auto f = GridFunction::sample(k.grid, [](double z) { return std::sin(3.0 * z) + z * z; });
    const auto back = apply_transform(l, apply_transform(k, f));
    double round_trip = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) round_trip = std::max(round_trip, std::abs(back[i] - f[i]));

    bool loops = true, sandwich = true;
    double worst = -1.0;
    for (double c : {0.0, 1.0}) {
        const ClosedLoopConfig cfg{1.0, 3.0, c, Disturbance::sinusoid(0.0, 1.0, 2.0)};
        const auto kernel = solve_kernel(cfg);
        const auto y0 = compatible_initial_state(
            kernel, GridFunction::sample(kernel.grid, [](double z) { return std::sin(std::numbers::pi * z); }), cfg.d(0.0));
        const auto res = simulate_closed_loop(cfg, y0, 1e-3, 3.0, 10);
        const auto rep = verify_iss(res.plant, closed_loop_envelope(cfg, res.kernel, res.inverse), {0.1, 1.0, 10.0}, 1e-3);
        loops = loops && rep.pass;
        worst = std::max(worst, worst_violation(rep));
        sandwich = sandwich && norm_sandwich(res).holds();
    }
    const double t = sw.seconds();
    const bool pass = round_trip <= 1e-8 && kernel_err <= 1e-6 && sandwich && loops && t < 60.0;
    return {pass, fmt("round trip %.2e (tol 1e-8), kernel vs Bessel %.2e (tol 1e-6), norm sandwich %s, "
                      "closed-loop worst violation %.2e (slack 1e-3), %.2f s (limit 60 s)",
                      round_trip, kernel_err, sandwich ? "holds" : "violated", worst, t)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"gain triple agreement (Dirichlet Laplacian)", gain_triple},
        {"series vs steady-state integral (transport cases)", series_vs_bvp},
        {"series vs closed form (a = inf)", series_vs_closed},
        {"eigensolver accuracy and orthonormality", eigensolver},
        {"ISS envelope for transport trajectories", transport_envelope},
        {"gain tightness under constant disturbance", tightness},
        {"lifted spectral vs finite differences convergence", cross_route},
        {"gain sweep qualitative properties", figure1},
        {"advection exact solution vs derived bound", advection},
        {"backstepping pipeline", backstepping},
    };
    std::vector<std::size_t> selected;
    for (int i = 1; i < argc; ++i) {
        const int n = std::atoi(argv[i]);
        if (n < 1 || n > static_cast<int>(criteria.size())) {
            std::fprintf(stderr, "criterion must be in 1..%zu\n", criteria.size());
            return 2;
        }
        selected.push_back(static_cast<std::size_t>(n));
    }
    if (selected.empty())
        for (std::size_t n = 1; n <= criteria.size(); ++n) selected.push_back(n);

    bool all = true;
    for (std::size_t n : selected) {
        Outcome o;
        try {
            o = criteria[n - 1].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all = all && o.pass;
        std::printf("criterion %2zu %s  %s: %s\n", n, o.pass ? "PASS" : "FAIL", criteria[n - 1].first, o.detail.c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
