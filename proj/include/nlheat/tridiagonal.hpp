#pragma once

#include <cmath>
#include <vector>

#include "errors.hpp"

namespace nlheat {

/// Thomas algorithm for A x = rhs with A tridiagonal, rows
/// lower[j] x_{j-1} + diag[j] x_j + upper[j] x_{j+1} = rhs_j.
/// Stable without pivoting for the diagonally dominant systems produced by
/// (I - dt L); a vanishing pivot is reported rather than propagated.
inline std::vector<double> solve_tridiagonal(const std::vector<double>& lower,
                                             const std::vector<double>& diag,
                                             const std::vector<double>& upper,
                                             std::vector<double> rhs) {
    const std::size_t n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n)
        throw config_error("solve_tridiagonal: length mismatch");
    std::vector<double> c(n);
    double pivot = diag[0];
    if (pivot == 0.0 || !std::isfinite(pivot))
        throw numerical_error("solve_tridiagonal: zero pivot at row 0");
    c[0] = upper[0] / pivot;
    rhs[0] /= pivot;
    for (std::size_t j = 1; j < n; ++j) {
        pivot = diag[j] - lower[j] * c[j - 1];
        if (pivot == 0.0 || !std::isfinite(pivot))
            throw numerical_error("solve_tridiagonal: zero pivot");
        c[j] = upper[j] / pivot;
        rhs[j] = (rhs[j] - lower[j] * rhs[j - 1]) / pivot;
    }
    for (std::size_t j = n - 1; j-- > 0;) rhs[j] -= c[j] * rhs[j + 1];
    return rhs;
}

} // namespace nlheat
