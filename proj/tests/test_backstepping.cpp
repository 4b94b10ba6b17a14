#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "issgain/backstepping.hpp"

using namespace issgain;
using std::numbers::pi;

namespace {

// Closed-form kernel with x = 1 - z, y = 1 - s: lam y I1(a)/a for lam > 0,
// lam y J1(a)/a for lam < 0, a = sqrt(|lam| (x^2 - y^2)).
double bessel_kernel(double lam, double z, double s) {
    const double x = 1.0 - z, y = 1.0 - s;
    const double arg2 = std::abs(lam) * (x * x - y * y);
    if (arg2 < 1e-12) return 0.5 * lam * y;
    const double a = std::sqrt(arg2);
    return lam > 0 ? lam * y * std::cyl_bessel_i(1.0, a) / a : lam * y * std::cyl_bessel_j(1.0, a) / a;
}

double max_kernel_error(const Kernel& k, double lam) {
    double err = 0.0;
    const std::size_t m = k.grid.intervals();
    for (std::size_t i = 0; i <= m; ++i)
        for (std::size_t j = i; j <= m; ++j)
            err = std::max(err, std::abs(k(i, j) - bessel_kernel(lam, k.grid.node(i), k.grid.node(j))));
    return err;
}

GridFunction compatible_state(const ClosedLoopConfig& cfg, std::size_t m) {
    const auto k = solve_kernel(cfg, m);
    return compatible_initial_state(k, GridFunction::sample(k.grid, [](double z) { return std::sin(pi * z); }),
                                    cfg.d(0.0));
}

}  // namespace

TEST(Kernel, MatchesBesselOracle) {
    for (double lam : {0.5, 5.0, 20.0}) {
        const ClosedLoopConfig cfg{1.0, lam, 0.0, Disturbance::constant(0.0)};
        EXPECT_LT(max_kernel_error(solve_kernel(cfg), lam), 1e-6) << "lambda = " << lam;
    }
    const ClosedLoopConfig split{2.0, 6.0, 4.0, Disturbance::constant(0.0)};
    EXPECT_DOUBLE_EQ(split.lambda_bar(), 5.0);
    EXPECT_LT(max_kernel_error(solve_kernel(split), 5.0), 1e-6);
}

TEST(Kernel, InverseUsesNegatedParameter) {
    const ClosedLoopConfig cfg{1.0, 5.0, 0.0, Disturbance::constant(0.0)};
    const auto l = solve_inverse_kernel(cfg);
    EXPECT_EQ(l.direction, KernelDirection::inverse);
    EXPECT_LT(max_kernel_error(l, -5.0), 1e-6);
}

TEST(Kernel, NormMatchesFineQuadratureOfOracle) {
    const double lam = 5.0;
    const ClosedLoopConfig cfg{1.0, lam, 0.0, Disturbance::constant(0.0)};
    const auto k = solve_kernel(cfg);
    const std::size_t F = 2048;
    std::vector<double> inner(F + 1);
    for (std::size_t i = 0; i <= F; ++i) {
        const double z = static_cast<double>(i) / F;
        std::vector<double> row;
        for (std::size_t j = i; j <= F; ++j) row.push_back(std::pow(bessel_kernel(lam, z, static_cast<double>(j) / F), 2));
        inner[i] = row.size() > 1 ? quadrature::simpson(row, 1.0 / F) : 0.0;
    }
    EXPECT_NEAR(k.norm, std::sqrt(quadrature::simpson(inner, 1.0 / F)), 1e-6);
}

TEST(Kernel, ZeroParameterGivesZeroKernel) {
    const ClosedLoopConfig cfg{1.0, 0.0, 0.0, Disturbance::constant(0.0)};
    const auto k = solve_kernel(cfg, 64);
    EXPECT_EQ(k.norm, 0.0);
    for (double v : k.values) EXPECT_EQ(v, 0.0);
}

TEST(Transform, RoundTripAndReciprocity) {
    const ClosedLoopConfig cfg{1.0, 5.0, 0.0, Disturbance::constant(0.0)};
    const auto k = solve_kernel(cfg);
    const auto l = solve_inverse_kernel(cfg);
    EXPECT_LT(reciprocity_residual(k, l), 1e-8);
    for (auto f : {std::function<double(double)>([](double z) { return std::sin(3.0 * z) + z * z; }),
                   std::function<double(double)>([](double z) { return std::exp(-z) * (1 - z); })}) {
        const auto g = GridFunction::sample(k.grid, f);
        const auto back = apply_transform(l, apply_transform(k, g));
        for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(back[i], g[i], 1e-8);
    }
}

TEST(Transform, CompatibleInitialState) {
    const ClosedLoopConfig cfg{1.0, 3.0, 1.0, Disturbance::sinusoid(0.7, 1.0, 2.0)};
    const auto k = solve_kernel(cfg, 128);
    const auto y0 = compatible_state(cfg, 128);
    EXPECT_NEAR(y0.back(), 0.0, 1e-14);
    EXPECT_NEAR(y0.front(), feedback_control(k, y0, cfg.d(0.0)), 1e-12);
}

TEST(ClosedLoop, RejectsIncompatibleInitialState) {
    const ClosedLoopConfig cfg{1.0, 3.0, 0.0, Disturbance::constant(1.0)};
    const auto y0 = GridFunction::sample(Grid(64), [](double z) { return std::sin(pi * z); });
    try {
        simulate_closed_loop(cfg, y0, 1e-3, 0.1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IncompatibleInitialCondition);
    }
    EXPECT_THROW((ClosedLoopConfig{1.0, 3.0, -1.0, Disturbance::constant(0.0)}.validate()), Error);
}

TEST(ClosedLoop, TargetSystemProperties) {
    for (double c : {0.0, 1.0}) {
        const ClosedLoopConfig cfg{1.0, 3.0, c, Disturbance::sinusoid(0.0, 1.0, 2.0)};
        const auto res = simulate_closed_loop(cfg, compatible_state(cfg, 128), 1e-3, 1.0, 1);
        // x(t, 0) = d(t), x(t, 1) = 0
        for (std::size_t n = 0; n < res.target.size(); n += 50) {
            EXPECT_NEAR(res.target.states[n].front(), cfg.d(res.target.times[n]), 1e-10);
            EXPECT_NEAR(res.target.states[n].back(), 0.0, 1e-12);
        }
        // u(t) = y(t, 0)
        for (std::size_t n = 0; n < res.plant.size(); n += 50)
            EXPECT_NEAR(res.plant.control[n], res.plant.states[n].front(), 1e-12);
        EXPECT_LT(target_residual(res, cfg), 1e-3) << "c = " << c;
        EXPECT_TRUE(norm_sandwich(res).holds());
    }
}

TEST(ClosedLoop, StabilizesUnstablePlant) {
    // p = 15 > pi^2: the open loop grows; with feedback and d = 0 the state decays at least like e^{-(c + pi^2) t}.
    const ClosedLoopConfig cfg{1.0, 15.0, 1.0, Disturbance::constant(0.0)};
    const auto res = simulate_closed_loop(cfg, compatible_state(cfg, 128), 1e-3, 1.0, 100);
    EXPECT_LT(res.target.norms.back(), 1.01 * std::exp(-(1.0 + pi * pi)) * res.target.norms.front());
    EXPECT_LT(res.plant.norms.back(), 1e-3 * res.plant.norms.front());
}

TEST(ClosedLoop, EnvelopesHold) {
    const ClosedLoopConfig cfg{1.0, 3.0, 1.0, Disturbance::sinusoid(0.2, 1.0, 2.0)};
    const auto res = simulate_closed_loop(cfg, compatible_state(cfg, 128), 1e-3, 2.0, 10);
    EXPECT_TRUE(verify_iss(res.plant, closed_loop_envelope(cfg, res.kernel, res.inverse), {0.1, 1.0, 10.0}).pass);
    EXPECT_TRUE(verify_iss(res.target, target_envelope(cfg), {0.1, 1.0, 10.0}).pass);
}

TEST(ClosedLoop, BoundReducesToTargetEstimateWithoutReaction) {
    const ClosedLoopConfig cfg{1.0, 0.0, 0.0, Disturbance::constant(0.0)};
    for (double eps : {0.1, 1.0, 10.0}) {
        const auto b = closed_loop_bound(cfg, 0.0, 0.0, eps);
        EXPECT_NEAR(b.overshoot, std::sqrt(1.0 + eps), 1e-15);
        EXPECT_NEAR(b.decay_rate, pi * pi, 1e-12);
        EXPECT_NEAR(b.gain, std::sqrt(1.0 + 1.0 / eps) / std::sqrt(3.0), 1e-14);
    }
}
