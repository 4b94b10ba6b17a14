#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "issgain/sturm_liouville.hpp"

using namespace issgain;
using std::numbers::pi;

namespace {

// Root of f on [lo, hi] by bisection; f(lo) and f(hi) must differ in sign.
double bisect(auto f, double lo, double hi) {
    double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) lo = mid, flo = fm;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Fine composite Simpson of g on [0,1].
double integrate(auto g, int n = 20000) {
    double s = g(0.0) + g(1.0);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * g(static_cast<double>(i) / n);
    return s / (3.0 * n);
}

}  // namespace

TEST(Eigenproblem, DirichletLaplacianMatchesSquaresOfMultiplesOfPi) {
    const auto prob = dirichlet_laplacian();
    const auto s = solve_spectrum(prob, 12);
    for (std::size_t n = 1; n <= 12; ++n) {
        const double exact = n * n * pi * pi;
        EXPECT_NEAR(s.eigenvalues[n - 1], exact, 1e-6 * exact) << "n = " << n;
        EXPECT_NEAR(s.derivatives_at_0[n - 1], std::sqrt(2.0) * n * pi, 1e-5 * n * pi);
        EXPECT_NEAR(s.max_abs(n - 1), std::sqrt(2.0), 1e-6);
    }
    EXPECT_NEAR(s.eigenvalues[0], 9.8696044011, 1e-8);
    EXPECT_NEAR(s.eigenvalues[1], 39.4784176044, 1e-6);
    EXPECT_NEAR(s.eigenvalues[2], 88.8264396099, 1e-5);
}

TEST(Eigenproblem, EigenfunctionsMatchSineModes) {
    const auto prob = dirichlet_laplacian();
    const auto s = solve_spectrum(prob, 5);
    for (std::size_t n = 1; n <= 5; ++n) {
        const auto& phi = s.eigenfunctions[n - 1];
        double err = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i)
            err = std::max(err, std::abs(phi[i] - std::sqrt(2.0) * std::sin(n * pi * phi.grid.node(i))));
        EXPECT_LT(err, 1e-5) << "n = " << n;
    }
}

TEST(Eigenproblem, GramMatrixIsIdentity) {
    const auto prob = constant_problem(1.0, 0.0, 1.0, {1.0, 1.0, 1.0, 0.0});
    const auto s = solve_spectrum(prob, 10);
    for (std::size_t m = 0; m < 10; ++m)
        for (std::size_t n = 0; n < 10; ++n)
            EXPECT_NEAR(weighted_inner(s.eigenfunctions[m], s.eigenfunctions[n], prob), m == n ? 1.0 : 0.0, 1e-6);
}

TEST(Eigenproblem, NeumannExitGivesQuarterWaves) {
    const auto prob = constant_problem(1.0, 0.0, 1.0, {0.0, 1.0, 1.0, 0.0});
    const auto s = solve_spectrum(prob, 5);
    for (std::size_t n = 1; n <= 5; ++n) {
        const double w = (n - 0.5) * pi;
        EXPECT_NEAR(s.eigenvalues[n - 1], w * w, 1e-6 * w * w);
    }
}

TEST(Eigenproblem, RobinExitMatchesTranscendentalRoot) {
    // x(1) + x'(1) = 0 with sin modes: tan w = -w.
    const auto prob = constant_problem(1.0, 0.0, 1.0, {1.0, 1.0, 1.0, 0.0});
    const auto s = solve_spectrum(prob, 3);
    for (int n = 1; n <= 3; ++n) {
        const double w = bisect([](double x) { return std::sin(x) + x * std::cos(x); }, (n - 0.5) * pi + 1e-9,
                                (n + 0.5) * pi - 1e-9);
        EXPECT_NEAR(s.eigenvalues[n - 1], w * w, 1e-6 * w * w) << "n = " << n;
    }
}

TEST(Eigenproblem, VariableCoefficientEulerOperator) {
    // -((1+z)^2 x')' = lambda x with Dirichlet ends: lambda_n = 1/4 + (n pi / ln 2)^2.
    const auto prob = build_problem(Coefficient::function([](double z) { return (1 + z) * (1 + z); },
                                                          [](double z) { return 2 * (1 + z); }),
                                    Coefficient::constant(0.0), Coefficient::constant(1.0), {});
    const auto s = solve_spectrum(prob, 6);
    for (int n = 1; n <= 6; ++n) {
        const double exact = 0.25 + std::pow(n * pi / std::log(2.0), 2);
        EXPECT_NEAR(s.eigenvalues[n - 1], exact, 1e-6 * exact) << "n = " << n;
    }
}

TEST(Eigenproblem, ReactionShiftsEveryEigenvalue) {
    const auto base = solve_spectrum(dirichlet_laplacian(), 8);
    const auto shifted = solve_spectrum(constant_problem(1.0, 3.5, 1.0, {}), 8);
    for (std::size_t n = 0; n < 8; ++n)
        EXPECT_NEAR(shifted.eigenvalues[n] - base.eigenvalues[n], 3.5, 1e-6 * base.eigenvalues[n]);
}

TEST(Eigenproblem, EigenvaluesStrictlyIncrease) {
    const auto prob = build_problem(Coefficient::function([](double z) { return 1.0 + 0.5 * std::sin(3 * z); }),
                                    Coefficient::function([](double z) { return z * z; }),
                                    Coefficient::function([](double z) { return 2.0 - z; }), {1.0, 0.5, 1.0, 0.0});
    const auto s = solve_spectrum(prob, 20);
    for (std::size_t n = 1; n < s.size(); ++n) EXPECT_GT(s.eigenvalues[n], s.eigenvalues[n - 1]);
}

TEST(Eigenproblem, RejectsInvalidInput) {
    EXPECT_THROW(constant_problem(-1.0, 0.0, 1.0, {}), Error);
    try {
        constant_problem(1.0, 0.0, 0.0, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonPositiveCoefficient);
    }
    try {
        constant_problem(1.0, 0.0, 1.0, {0.0, 0.0, 1.0, 0.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateBoundary);
    }
    EXPECT_THROW(constant_problem(1.0, 0.0, 1.0, {}, 65), Error);
    EXPECT_THROW(constant_problem(1.0, 0.0, 1.0, {}, 32), Error);
    EXPECT_THROW(solve_spectrum(dirichlet_laplacian(64), 40), Error);
}

TEST(Hypothesis, LaplacianIsCertified) {
    const auto prob = dirichlet_laplacian();
    const auto rep = check_hypothesis_H(solve_spectrum(prob, 20), prob);
    EXPECT_TRUE(rep.positive);
    EXPECT_TRUE(rep.certified);
    EXPECT_TRUE(rep.satisfied());
    EXPECT_NEAR(rep.lambda1, pi * pi, 1e-6);
    // sum sqrt2/(n^2 pi^2) = sqrt2/6
    EXPECT_NEAR(rep.partial_sum + rep.tail_bound, std::sqrt(2.0) / 6.0, 2e-3);
    EXPECT_GE(rep.partial_sum + rep.tail_bound, std::sqrt(2.0) / 6.0 - 1e-6);
}

TEST(Hypothesis, StrongReactionBreaksPositivity) {
    const auto prob = constant_problem(1.0, -20.0, 1.0, {});
    const auto rep = check_hypothesis_H(solve_spectrum(prob, 20), prob);
    EXPECT_FALSE(rep.positive);
    EXPECT_FALSE(rep.satisfied());
    EXPECT_NEAR(rep.lambda1, pi * pi - 20.0, 1e-5);
}

TEST(SteadyState, LaplacianProfileIsLinear) {
    const auto prob = dirichlet_laplacian();
    const auto st = solve_steady_bvp(prob, 1.0);
    for (std::size_t i = 0; i < st.profile.size(); ++i)
        EXPECT_NEAR(st.profile[i], 1.0 - st.profile.grid.node(i), 1e-12);
    EXPECT_NEAR(weighted_norm(st.profile, prob), 1.0 / std::sqrt(3.0), 1e-10);
    EXPECT_LT(st.residual, 1e-8);
}

TEST(SteadyState, VariableCoefficientProfile) {
    // ((1+z)^2 x')' = 0, x(0) = 1, x(1) = 0 -> x = 2/(1+z) - 1.
    const auto prob = build_problem(Coefficient::function([](double z) { return (1 + z) * (1 + z); },
                                                          [](double z) { return 2 * (1 + z); }),
                                    Coefficient::constant(0.0), Coefficient::constant(1.0), {});
    const auto st = solve_steady_bvp(prob, 1.0);
    double err = 0.0;
    for (std::size_t i = 0; i < st.profile.size(); ++i)
        err = std::max(err, std::abs(st.profile[i] - (2.0 / (1.0 + st.profile.grid.node(i)) - 1.0)));
    EXPECT_LT(err, 1e-8);
    const double exact = std::sqrt(integrate([](double z) { return std::pow(2.0 / (1 + z) - 1.0, 2); }));
    EXPECT_NEAR(weighted_norm(st.profile, prob), exact, 1e-8);
}

TEST(SteadyState, ReactionProfileIsHyperbolic) {
    const double z2 = 4.0;
    const auto prob = constant_problem(1.0, z2, 1.0, {});
    const auto st = solve_steady_bvp(prob, 2.0);
    double err = 0.0;
    for (std::size_t i = 0; i < st.profile.size(); ++i) {
        const double z = st.profile.grid.node(i);
        err = std::max(err, std::abs(st.profile[i] - 2.0 * std::sinh(2.0 * (1 - z)) / std::sinh(2.0)));
    }
    EXPECT_LT(err, 1e-8);
}

TEST(Fourier, CoefficientsOfRampAndParseval) {
    const auto prob = dirichlet_laplacian();
    const auto s = solve_spectrum(prob, 64);
    const auto f = GridFunction::sample(prob.grid(), [](double z) { return 1.0 - z; });
    const auto fc = fourier_coefficients(f, s, prob);
    for (std::size_t n = 1; n <= 10; ++n) EXPECT_NEAR(fc.coefficients[n - 1], std::sqrt(2.0) / (n * pi), 1e-6);
    EXPECT_NEAR(fc.norm_squared, 1.0 / 3.0, 1e-10);
    // Missing energy of the truncated series is sum_{n>64} 2/(n pi)^2 ~ 2/(64.5 pi^2).
    EXPECT_NEAR(fc.parseval_defect, 2.0 / (64.5 * pi * pi), 2e-5);
}

TEST(Quadrature, SimpsonIntegratesCubicsExactly) {
    for (std::size_t n : {2u, 3u, 7u, 10u}) {
        std::vector<double> f(n + 1);
        const double h = 1.0 / n;
        for (std::size_t i = 0; i <= n; ++i) {
            const double z = i * h;
            f[i] = z * z * z - 2 * z + 1;
        }
        EXPECT_NEAR(quadrature::simpson(f, h), 0.25 - 1.0 + 1.0, 1e-14) << "n = " << n;
    }
}
