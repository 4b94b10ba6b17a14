#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "issgain/error.hpp"

namespace issgain {

/// Tridiagonal matrix stored by diagonals. lower[0] and upper[n-1] are unused.
struct Tridiagonal {
    std::vector<double> lower, diag, upper;

    explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}

    std::size_t size() const noexcept { return diag.size(); }

    std::vector<double> multiply(std::span<const double> x) const {
        const std::size_t n = size();
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = diag[i] * x[i];
            if (i > 0) s += lower[i] * x[i - 1];
            if (i + 1 < n) s += upper[i] * x[i + 1];
            y[i] = s;
        }
        return y;
    }
};

/// Thomas algorithm. Throws SingularBVP when a pivot collapses relative to
/// the row scale.
inline std::vector<double> solve_tridiagonal(const Tridiagonal& a, std::span<const double> rhs) {
    const std::size_t n = a.size();
    require(rhs.size() == n, ErrorKind::InvalidArgument, "rhs size mismatch");
    std::vector<double> c(n), d(n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        scale = std::max(scale, std::abs(a.diag[i]) + std::abs(a.lower[i]) + std::abs(a.upper[i]));
    const double tiny = 1e-13 * scale;

    double pivot = a.diag[0];
    require(std::abs(pivot) > tiny, ErrorKind::SingularBVP, "zero pivot in tridiagonal solve");
    c[0] = a.upper[0] / pivot;
    d[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = a.diag[i] - a.lower[i] * c[i - 1];
        require(std::abs(pivot) > tiny, ErrorKind::SingularBVP, "zero pivot in tridiagonal solve");
        c[i] = (i + 1 < n) ? a.upper[i] / pivot : 0.0;
        d[i] = (rhs[i] - a.lower[i] * d[i - 1]) / pivot;
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

}  // namespace issgain
