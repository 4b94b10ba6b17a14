#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "issgain/error.hpp"
#include "issgain/tridiagonal.hpp"

namespace issgain {

/// A coefficient function on [0,1]: a constant, a closed-form handle, or a
/// natural cubic spline through uniformly tabulated samples.
class Coefficient {
public:
    Coefficient() = default;

    static Coefficient constant(double c) {
        Coefficient k;
        k.constant_ = c;
        k.value_ = [c](double) { return c; };
        k.derivative_ = [](double) { return 0.0; };
        return k;
    }

    /// Closed-form handle. Without an explicit derivative, d/dz is taken by
    /// central differences.
    static Coefficient function(std::function<double(double)> f,
                                std::function<double(double)> df = {}) {
        Coefficient k;
        k.value_ = std::move(f);
        if (df) {
            k.derivative_ = std::move(df);
        } else {
            k.derivative_ = [f = k.value_](double z) {
                constexpr double step = 1e-5;
                const double lo = std::max(0.0, z - step);
                const double hi = std::min(1.0, z + step);
                return (f(hi) - f(lo)) / (hi - lo);
            };
        }
        return k;
    }

    /// Natural cubic spline through samples at z_i = i/(n-1).
    static Coefficient table(std::vector<double> samples) {
        require(samples.size() >= 4, ErrorKind::InvalidArgument,
                "tabulated coefficient needs at least four samples");
        const std::size_t n = samples.size();
        const double h = 1.0 / static_cast<double>(n - 1);

        // Second derivatives of the natural spline.
        std::vector<double> m(n, 0.0);
        Tridiagonal a(n - 2);
        std::vector<double> rhs(n - 2);
        for (std::size_t i = 0; i + 2 < n; ++i) {
            a.lower[i] = 1.0;
            a.diag[i] = 4.0;
            a.upper[i] = 1.0;
            rhs[i] = 6.0 * (samples[i] - 2.0 * samples[i + 1] + samples[i + 2]) / (h * h);
        }
        const auto inner = solve_tridiagonal(a, rhs);
        for (std::size_t i = 0; i < inner.size(); ++i) m[i + 1] = inner[i];

        auto locate = [n, h](double z) {
            z = std::clamp(z, 0.0, 1.0);
            auto i = static_cast<std::size_t>(z / h);
            if (i >= n - 1) i = n - 2;
            return std::pair{i, z - static_cast<double>(i) * h};
        };

        Coefficient k;
        k.value_ = [samples, m, h, locate](double z) {
            const auto [i, t] = locate(z);
            const double u = h - t;
            return m[i] * u * u * u / (6 * h) + m[i + 1] * t * t * t / (6 * h) +
                   (samples[i] / h - m[i] * h / 6) * u + (samples[i + 1] / h - m[i + 1] * h / 6) * t;
        };
        k.derivative_ = [samples, m, h, locate](double z) {
            const auto [i, t] = locate(z);
            const double u = h - t;
            return -m[i] * u * u / (2 * h) + m[i + 1] * t * t / (2 * h) -
                   (samples[i] / h - m[i] * h / 6) + (samples[i + 1] / h - m[i + 1] * h / 6);
        };
        return k;
    }

    double operator()(double z) const { return value_ ? value_(z) : 0.0; }
    double derivative(double z) const { return derivative_ ? derivative_(z) : 0.0; }
    bool is_constant() const noexcept { return constant_.has_value(); }
    std::optional<double> constant_value() const noexcept { return constant_; }

private:
    std::function<double(double)> value_;
    std::function<double(double)> derivative_;
    std::optional<double> constant_;
};

}  // namespace issgain
