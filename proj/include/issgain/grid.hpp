#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "issgain/error.hpp"

namespace issgain {

/// Uniform partition of [0,1] into `intervals` cells (intervals + 1 nodes).
class Grid {
public:
    Grid() = default;
    explicit Grid(std::size_t intervals) : intervals_(intervals) {
        require(intervals >= 2, ErrorKind::InvalidArgument, "grid needs at least two intervals");
    }

    std::size_t intervals() const noexcept { return intervals_; }
    std::size_t size() const noexcept { return intervals_ + 1; }
    double spacing() const noexcept { return 1.0 / static_cast<double>(intervals_); }
    double node(std::size_t i) const noexcept {
        return static_cast<double>(i) / static_cast<double>(intervals_);
    }

    std::vector<double> nodes() const {
        std::vector<double> z(size());
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = node(i);
        return z;
    }

    bool operator==(const Grid&) const = default;

private:
    std::size_t intervals_ = 0;
};

/// Samples of a function on a uniform grid.
struct GridFunction {
    Grid grid;
    std::vector<double> values;

    GridFunction() = default;
    GridFunction(Grid g, std::vector<double> v) : grid(g), values(std::move(v)) {
        require(values.size() == grid.size(), ErrorKind::GridMismatch,
                "sample count does not match grid");
    }

    static GridFunction sample(Grid g, const std::function<double(double)>& f) {
        std::vector<double> v(g.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(g.node(i));
        return {g, std::move(v)};
    }

    static GridFunction zeros(Grid g) { return {g, std::vector<double>(g.size(), 0.0)}; }

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    double front() const { return values.front(); }
    double back() const { return values.back(); }

    /// Second-order one-sided derivative at z = 0.
    double derivative_at_0() const {
        const double h = grid.spacing();
        return (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    }
    /// Second-order one-sided derivative at z = 1.
    double derivative_at_1() const {
        const double h = grid.spacing();
        const std::size_t m = grid.intervals();
        return (3.0 * values[m] - 4.0 * values[m - 1] + values[m - 2]) / (2.0 * h);
    }

    /// Restriction onto a coarser grid whose nodes are a subset of this one.
    GridFunction restrict_to(Grid coarse) const {
        require(coarse.intervals() > 0 && grid.intervals() % coarse.intervals() == 0,
                ErrorKind::GridMismatch, "coarse grid is not nested in fine grid");
        const std::size_t stride = grid.intervals() / coarse.intervals();
        std::vector<double> v(coarse.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = values[i * stride];
        return {coarse, std::move(v)};
    }

    /// Piecewise-linear interpolation.
    double at(double z) const {
        const double m = static_cast<double>(grid.intervals());
        double s = z * m;
        if (s <= 0.0) return values.front();
        if (s >= m) return values.back();
        const auto i = static_cast<std::size_t>(s);
        const double w = s - static_cast<double>(i);
        return (1.0 - w) * values[i] + w * values[i + 1];
    }
};

inline void require_same_grid(const Grid& a, const Grid& b) {
    require(a == b, ErrorKind::GridMismatch,
            "grids differ (" + std::to_string(a.intervals()) + " vs " +
                std::to_string(b.intervals()) + " intervals)");
}

namespace quadrature {

/// Composite Simpson weights for `n` equal intervals of width h. Odd n uses
/// Simpson on the first n-3 intervals and the 3/8 rule on the last three.
inline std::vector<double> simpson_weights(std::size_t n, double h) {
    std::vector<double> w(n + 1, 0.0);
    if (n == 0) return w;
    if (n == 1) {
        w[0] = w[1] = 0.5 * h;
        return w;
    }
    const std::size_t even = (n % 2 == 0) ? n : n - 3;
    for (std::size_t i = 0; i + 2 <= even; i += 2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if (even != n) {
        const std::size_t s = even;
        w[s] += 3.0 * h / 8.0;
        w[s + 1] += 9.0 * h / 8.0;
        w[s + 2] += 9.0 * h / 8.0;
        w[s + 3] += 3.0 * h / 8.0;
    }
    return w;
}

inline double simpson(std::span<const double> f, double h) {
    if (f.size() < 2) return 0.0;
    const auto w = simpson_weights(f.size() - 1, h);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i];
    return s;
}

inline double trapezoid(std::span<const double> f, double h) {
    if (f.size() < 2) return 0.0;
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * h;
}

}  // namespace quadrature

}  // namespace issgain
