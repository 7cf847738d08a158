#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "heatlab/errors.hpp"

namespace heatlab {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    std::size_t points = 0;
};

// Ordinary least squares y = slope*x + intercept with slope standard error.
inline LineFit fit_line(const std::vector<double> &x, const std::vector<double> &y) {
    if (x.size() != y.size()) throw dimension_error("fit_line: x/y length mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw fit_error("fit_line: needs at least 2 points, got " + std::to_string(n));

    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0) throw fit_error("fit_line: degenerate abscissae (zero spread)");

    LineFit f;
    f.points = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (n > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - (f.slope * x[i] + f.intercept);
            rss += r * r;
        }
        f.slope_stderr = std::sqrt(rss / (static_cast<double>(n) - 2.0) / sxx);
    }
    return f;
}

struct TwoBasisFit {
    double c1 = 0.0;
    double c2 = 0.0;
    double residual = 0.0; // root mean square residual
};

// Least squares y ~ c1*phi1 + c2*phi2 via the 2x2 normal equations.
inline TwoBasisFit fit_two_basis(const std::vector<double> &phi1, const std::vector<double> &phi2,
                                 const std::vector<double> &y) {
    const std::size_t n = y.size();
    if (phi1.size() != n || phi2.size() != n) {
        throw dimension_error("fit_two_basis: basis/value length mismatch");
    }
    if (n < 2) throw fit_error("fit_two_basis: needs at least 2 points");

    double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        a11 += phi1[i] * phi1[i];
        a12 += phi1[i] * phi2[i];
        a22 += phi2[i] * phi2[i];
        b1 += phi1[i] * y[i];
        b2 += phi2[i] * y[i];
    }
    const double det = a11 * a22 - a12 * a12;
    const double scale = std::max(a11 * a22, 1e-300);
    if (std::abs(det) <= 1e-14 * scale) {
        throw fit_error("fit_two_basis: degenerate basis (normal matrix nearly singular)");
    }
    TwoBasisFit f;
    f.c1 = (a22 * b1 - a12 * b2) / det;
    f.c2 = (a11 * b2 - a12 * b1) / det;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.c1 * phi1[i] - f.c2 * phi2[i];
        rss += r * r;
    }
    f.residual = std::sqrt(rss / static_cast<double>(n));
    return f;
}

} // namespace heatlab
