#pragma once

// Boundary disturbance signals d(t) with derivatives, running maxima and
// exact exponential convolutions int e^{-lambda (t1 - s)} d(s) ds.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "issgain/error.hpp"

namespace issgain {

enum class DisturbanceKind { constant, sinusoid, smoothed_step, tabulated };

constexpr std::string_view to_string(DisturbanceKind k) {
    switch (k) {
        case DisturbanceKind::constant: return "constant";
        case DisturbanceKind::sinusoid: return "sinusoid";
        case DisturbanceKind::smoothed_step: return "smoothed_step";
        case DisturbanceKind::tabulated: return "tabulated";
    }
    return "unknown";
}

/// A scalar signal. `derivative(k)` returns the k-th derivative as a signal
/// of the same kind, which keeps closed-form convolutions available.
class Disturbance {
public:
    static Disturbance constant(double value) {
        Disturbance d(DisturbanceKind::constant);
        d.offset_ = value;
        return d;
    }

    /// offset + amplitude sin(omega t + phase).
    static Disturbance sinusoid(double offset, double amplitude, double omega, double phase = 0.0) {
        require(omega >= 0.0, ErrorKind::InvalidArgument, "sinusoid frequency must be >= 0");
        Disturbance d(DisturbanceKind::sinusoid);
        d.offset_ = offset;
        d.amplitude_ = amplitude;
        d.omega_ = omega;
        d.phase_ = phase;
        return d;
    }

    /// from + (to - from) S((t - start)/ramp) with the C2 smoothstep
    /// S(u) = 6u^5 - 15u^4 + 10u^3 on [0,1].
    static Disturbance smoothed_step(double from, double to, double ramp, double start = 0.0) {
        require(ramp > 0.0, ErrorKind::InvalidArgument, "ramp time must be positive");
        Disturbance d(DisturbanceKind::smoothed_step);
        d.offset_ = from;
        d.amplitude_ = to - from;
        d.ramp_ = ramp;
        d.start_ = start;
        return d;
    }

    /// Natural cubic spline through (times, values); constant extension
    /// outside the table.
    static Disturbance tabulated(std::vector<double> times, std::vector<double> values) {
        require(times.size() == values.size() && times.size() >= 2, ErrorKind::InvalidArgument,
                "tabulated signal needs matching times/values with at least two samples");
        for (std::size_t i = 1; i < times.size(); ++i)
            require(times[i] > times[i - 1], ErrorKind::InvalidArgument, "sample times must increase");
        Disturbance d(DisturbanceKind::tabulated);
        auto tab = std::make_shared<Table>();
        tab->t = std::move(times);
        tab->y = std::move(values);
        tab->build();
        d.table_ = std::move(tab);
        d.warning_ = "tabulated disturbance is only C2 as a spline interpolant; "
                     "smoothness between samples is assumed, not known";
        return d;
    }

    DisturbanceKind kind() const noexcept { return kind_; }
    int order() const noexcept { return order_; }
    const std::string& smoothness_warning() const noexcept { return warning_; }
    double frequency() const noexcept { return kind_ == DisturbanceKind::sinusoid ? omega_ : 0.0; }

    Disturbance scaled(double s) const {
        Disturbance d = *this;
        d.scale_ *= s;
        return d;
    }

    Disturbance derivative(int k = 1) const {
        require(k >= 0 && order_ + k <= 3, ErrorKind::InvalidArgument, "derivative order above 3");
        Disturbance d = *this;
        d.order_ += k;
        return d;
    }

    double operator()(double t) const { return scale_ * eval(t, order_); }
    double d1(double t) const { return scale_ * eval(t, order_ + 1); }
    double d2(double t) const { return scale_ * eval(t, order_ + 2); }

    /// max_{t0 <= s <= t1} |d(s)|.
    double max_abs(double t0, double t1) const {
        if (t1 < t0) std::swap(t0, t1);
        double m = std::max(std::abs((*this)(t0)), std::abs((*this)(t1)));
        switch (kind_) {
            case DisturbanceKind::constant: break;
            case DisturbanceKind::sinusoid: {
                if (omega_ == 0.0) break;
                // Critical points of sin(omega t + phase + order pi/2).
                const double shift = phase_ + order_ * 0.5 * std::numbers::pi;
                const double first = std::ceil((omega_ * t0 + shift - 0.5 * std::numbers::pi) / std::numbers::pi);
                for (double j = first;; j += 1.0) {
                    const double tc = ((j + 0.5) * std::numbers::pi - shift) / omega_;
                    if (tc > t1) break;
                    if (tc >= t0) m = std::max(m, std::abs((*this)(tc)));
                }
                break;
            }
            default: {
                // Dense sampling; the smoothstep and spline pieces are low-order polynomials.
                const double span = t1 - t0;
                const int n = std::max(64, static_cast<int>(std::ceil(span * 256.0)));
                for (int i = 1; i < n; ++i) m = std::max(m, std::abs((*this)(t0 + span * i / n)));
                break;
            }
        }
        return m;
    }

    /// int_{t0}^{t1} e^{-lambda (t1 - s)} d(s) ds. Closed form for constant and
    /// sinusoidal signals; otherwise piecewise-quadratic interpolation of d
    /// integrated exactly against the exponential on sub-steps of at most `h`.
    double exp_convolve(double lambda, double t0, double t1, double h = 1e-3) const {
        const double span = t1 - t0;
        if (span <= 0.0) return 0.0;
        if (kind_ == DisturbanceKind::constant) {
            return order_ == 0 ? scale_ * offset_ * exp_moment(lambda, span, 0) : 0.0;
        }
        if (kind_ == DisturbanceKind::sinusoid) {
            double out = 0.0;
            if (order_ == 0) out += scale_ * offset_ * exp_moment(lambda, span, 0);
            const double amp = scale_ * amplitude_ * std::pow(omega_, order_);
            const double ph = phase_ + order_ * 0.5 * std::numbers::pi;
            // F(s) = e^{-lambda (t1 - s)} (lambda sin - omega cos)(omega s + ph) / (lambda^2 + omega^2)
            const double den = lambda * lambda + omega_ * omega_;
            if (den == 0.0) return out + amp * (std::sin(ph) * span);
            auto prim = [&](double s) {
                return lambda * std::sin(omega_ * s + ph) - omega_ * std::cos(omega_ * s + ph);
            };
            return out + amp * (prim(t1) - std::exp(-lambda * span) * prim(t0)) / den;
        }
        const int n = std::max(1, static_cast<int>(std::ceil(span / h)));
        const double dt = span / n;
        const double decay = std::exp(-lambda * dt);
        const double m0 = exp_moment(lambda, dt, 0), m1 = exp_moment(lambda, dt, 1),
                     m2 = exp_moment(lambda, dt, 2);
        // Weights for samples at w = 0, dt/2, dt where w = (end of sub-step) - s.
        const double w0 = m0 - 3.0 * m1 / dt + 2.0 * m2 / (dt * dt);
        const double w1 = 4.0 * m1 / dt - 4.0 * m2 / (dt * dt);
        const double w2 = -m1 / dt + 2.0 * m2 / (dt * dt);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double a = t0 + i * dt, b = a + dt;
            acc = acc * decay + w0 * (*this)(b) + w1 * (*this)(0.5 * (a + b)) + w2 * (*this)(a);
        }
        return acc;
    }

    /// int_0^span e^{-lambda w} w^k dw for k = 0, 1, 2, by series when lambda*span is small.
    static double exp_moment(double lambda, double span, int k) {
        const double x = lambda * span;
        if (std::abs(x) < 0.5) {
            double sum = 0.0, term = 1.0;
            for (int j = 0; j < 30; ++j) {
                sum += term / (j + k + 1);
                term *= -x / (j + 1);
            }
            return std::pow(span, k + 1) * sum;
        }
        const double e = std::exp(-x);
        switch (k) {
            case 0: return -std::expm1(-x) / lambda;
            case 1: return (1.0 - e * (1.0 + x)) / (lambda * lambda);
            default: return (2.0 - e * (2.0 + 2.0 * x + x * x)) / (lambda * lambda * lambda);
        }
    }

    std::string describe() const {
        std::string s(to_string(kind_));
        if (order_ > 0) s += " (derivative " + std::to_string(order_) + ")";
        return s;
    }

private:
    struct Table {
        std::vector<double> t, y, m;  // m: second derivatives

        void build() {
            const std::size_t n = t.size();
            m.assign(n, 0.0);
            if (n < 3) return;
            // Natural spline by the standard tridiagonal sweep.
            std::vector<double> c(n, 0.0), d(n, 0.0);
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double h0 = t[i] - t[i - 1], h1 = t[i + 1] - t[i];
                const double rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
                const double diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
                c[i] = h1 / diag;
                d[i] = (rhs - h0 * d[i - 1]) / diag;
            }
            for (std::size_t i = n - 2; i >= 1; --i) m[i] = d[i] - c[i] * m[i + 1];
        }

        double eval(double s, int k) const {
            if (s <= t.front()) return k == 0 ? y.front() : 0.0;
            if (s >= t.back()) return k == 0 ? y.back() : 0.0;
            const auto it = std::upper_bound(t.begin(), t.end(), s);
            const std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
            const double h = t[i + 1] - t[i], a = t[i + 1] - s, b = s - t[i];
            switch (k) {
                case 0:
                    return m[i] * a * a * a / (6 * h) + m[i + 1] * b * b * b / (6 * h) +
                           (y[i] / h - m[i] * h / 6) * a + (y[i + 1] / h - m[i + 1] * h / 6) * b;
                case 1:
                    return -m[i] * a * a / (2 * h) + m[i + 1] * b * b / (2 * h) -
                           (y[i] / h - m[i] * h / 6) + (y[i + 1] / h - m[i + 1] * h / 6);
                case 2: return (m[i] * a + m[i + 1] * b) / h;
                default: return (m[i + 1] - m[i]) / h;
            }
        }
    };

    explicit Disturbance(DisturbanceKind k) : kind_(k) {}

    double eval(double t, int k) const {
        switch (kind_) {
            case DisturbanceKind::constant: return k == 0 ? offset_ : 0.0;
            case DisturbanceKind::sinusoid:
                return (k == 0 ? offset_ : 0.0) +
                       amplitude_ * std::pow(omega_, k) *
                           std::sin(omega_ * t + phase_ + k * 0.5 * std::numbers::pi);
            case DisturbanceKind::smoothed_step: {
                const double u = (t - start_) / ramp_;
                if (u <= 0.0) return k == 0 ? offset_ : 0.0;
                if (u >= 1.0) return k == 0 ? offset_ + amplitude_ : 0.0;
                const double sc = amplitude_ / std::pow(ramp_, k);
                switch (k) {
                    case 0: return offset_ + amplitude_ * u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
                    case 1: return sc * 30.0 * u * u * (1.0 - u) * (1.0 - u);
                    case 2: return sc * 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
                    default: return sc * 60.0 * (1.0 - 6.0 * u + 6.0 * u * u);
                }
            }
            case DisturbanceKind::tabulated: return table_->eval(t, k);
        }
        return 0.0;
    }

    DisturbanceKind kind_;
    int order_ = 0;
    double scale_ = 1.0;
    double offset_ = 0.0, amplitude_ = 0.0, omega_ = 0.0, phase_ = 0.0;
    double ramp_ = 1.0, start_ = 0.0;
    std::shared_ptr<const Table> table_;
    std::string warning_;
};

}  // namespace issgain
