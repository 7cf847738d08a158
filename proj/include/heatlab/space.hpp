#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "heatlab/dense_matrix.hpp"
#include "heatlab/errors.hpp"
#include "heatlab/fitting.hpp"

namespace heatlab {

// Distances may legitimately be +infinity (disjoint unions); arithmetic on
// them follows the extended-real conventions of IEEE doubles.
inline constexpr double infinite_distance = std::numeric_limits<double>::infinity();

// Finite quadrature proxy of a generalized metric measure space: points,
// pairwise distances in [0, +inf], strictly positive weights.
struct SampledSpace {
    std::vector<std::string> point_ids;
    std::vector<std::optional<std::array<double, 2>>> coordinates; // planar embedding, optional
    DenseMatrix dist;                                              // symmetric, zero diagonal
    std::vector<double> weights;

    std::size_t size() const { return point_ids.size(); }

    double distance(std::size_t i, std::size_t j) const { return dist(i, j); }

    double total_weight() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }

    // Largest finite pairwise distance; 0 for spaces without finite pairs.
    double finite_diameter() const {
        double d = 0.0;
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t j = i + 1; j < size(); ++j)
                if (std::isfinite(dist(i, j))) d = std::max(d, dist(i, j));
        return d;
    }

    void validate() const {
        const std::size_t n = size();
        if (coordinates.size() != n && !coordinates.empty()) {
            throw validation_error("SampledSpace: coordinate count does not match points");
        }
        if (dist.rows() != n || dist.cols() != n || weights.size() != n) {
            throw validation_error("SampledSpace: table sizes do not match point count");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
                throw validation_error("SampledSpace: nonpositive weight at point " +
                                       point_ids[i]);
            }
            if (dist(i, i) != 0.0) {
                throw validation_error("SampledSpace: nonzero diagonal at point " + point_ids[i]);
            }
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = dist(i, j);
                if (d < 0.0 || std::isnan(d) || d != dist(j, i)) {
                    throw validation_error("SampledSpace: invalid or asymmetric distance (" +
                                           point_ids[i] + ", " + point_ids[j] + ")");
                }
            }
        }
    }

    // Triangle inequality over every sampled triple; checked on demand, it is
    // cubic in the point count.
    void check_triangle_inequality(double tol = 1e-12) const {
        const std::size_t n = size();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                for (std::size_t k = 0; k < n; ++k) {
                    const double lhs = dist(i, j);
                    const double rhs = dist(i, k) + dist(k, j);
                    if (lhs > rhs + tol * std::max(1.0, lhs)) {
                        throw validation_error("SampledSpace: triangle inequality violated at (" +
                                               point_ids[i] + ", " + point_ids[j] + ", " +
                                               point_ids[k] + ")");
                    }
                }
    }
};

// Uniform grid on [0,1]: n points, midpoint-style weights summing to 1.
inline SampledSpace make_unit_interval_space(std::size_t n) {
    if (n < 1) throw validation_error("make_unit_interval_space: need at least one point");
    SampledSpace s;
    s.point_ids.reserve(n);
    s.coordinates.reserve(n);
    s.dist = DenseMatrix(n, n);
    s.weights.assign(n, 1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double x = (n == 1) ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        s.point_ids.push_back("x" + std::to_string(i));
        s.coordinates.push_back(std::array<double, 2>{x, 0.0});
        for (std::size_t j = 0; j < n; ++j) {
            const double y =
                (n == 1) ? 0.0 : static_cast<double>(j) / static_cast<double>(n - 1);
            s.dist(i, j) = std::abs(x - y);
        }
    }
    return s;
}

// Disjoint union: within-copy distances preserved, cross-copy distances
// +infinity, weights concatenated. Ids from the second operand are renamed
// (appending ') only when they collide with ids from the first.
inline SampledSpace disjoint_union(const SampledSpace &a, const SampledSpace &b) {
    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    SampledSpace u;
    u.point_ids = a.point_ids;
    for (std::string id : b.point_ids) {
        while (std::find(u.point_ids.begin(), u.point_ids.end(), id) != u.point_ids.end()) {
            id += "'";
        }
        u.point_ids.push_back(id);
    }
    u.coordinates.resize(na + nb);
    for (std::size_t i = 0; i < na; ++i)
        u.coordinates[i] = a.coordinates.empty() ? std::nullopt : a.coordinates[i];
    for (std::size_t i = 0; i < nb; ++i)
        u.coordinates[na + i] = b.coordinates.empty() ? std::nullopt : b.coordinates[i];
    u.dist = DenseMatrix(na + nb, na + nb);
    for (std::size_t i = 0; i < na + nb; ++i)
        for (std::size_t j = 0; j < na + nb; ++j) {
            if (i < na && j < na) u.dist(i, j) = a.dist(i, j);
            else if (i >= na && j >= na) u.dist(i, j) = b.dist(i - na, j - na);
            else u.dist(i, j) = (i == j) ? 0.0 : infinite_distance;
        }
    u.weights = a.weights;
    u.weights.insert(u.weights.end(), b.weights.begin(), b.weights.end());
    return u;
}

// Product space with the sum metric d((x,y),(x',y')) = d(x,x') + d(y,y') and
// product weights. Point order is row-major in the factor indices.
inline SampledSpace product_sum_metric(const SampledSpace &s) {
    const std::size_t n = s.size();
    if (n > 0 && n * n > matrix_dimension_cap) {
        throw capacity_error("product_sum_metric: " + std::to_string(n * n) +
                             " product points exceed cap " +
                             std::to_string(matrix_dimension_cap));
    }
    SampledSpace p;
    p.point_ids.reserve(n * n);
    p.weights.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            p.point_ids.push_back("(" + s.point_ids[i] + "," + s.point_ids[j] + ")");
            p.weights.push_back(s.weights[i] * s.weights[j]);
        }
    p.dist = DenseMatrix(n * n, n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t row = i * n + j;
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t l = 0; l < n; ++l)
                    p.dist(row, k * n + l) = s.dist(i, k) + s.dist(j, l);
        }
    return p;
}

// Hoelder seminorm sup |f(x)-f(x')| / d(x,x')^alpha over pairs at finite
// nonzero distance. Pairs at +inf contribute nothing. Zero-distance pairs
// between distinct points are excluded; carrying different values there
// signals a discretization bug and is reported through the diagnostic.
struct SeminormDiagnostic {
    std::size_t zero_distance_pairs = 0;
    double worst_zero_distance_gap = 0.0;
    std::size_t infinite_pairs = 0;
};

inline double hoelder_seminorm(const SampledSpace &s, const std::vector<double> &f, double alpha,
                               SeminormDiagnostic *diag = nullptr) {
    const std::size_t n = s.size();
    if (f.size() != n) throw dimension_error("hoelder_seminorm: value count mismatch");
    if (!(alpha > 0.0) || alpha > 1.0) {
        throw domain_error("hoelder_seminorm: alpha must be in (0,1], got " +
                           std::to_string(alpha));
    }
    double sup = 0.0;
    std::size_t usable = 0;
    SeminormDiagnostic local;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = s.dist(i, j);
            if (!std::isfinite(d)) {
                ++local.infinite_pairs;
                continue;
            }
            if (d == 0.0) {
                ++local.zero_distance_pairs;
                local.worst_zero_distance_gap =
                    std::max(local.worst_zero_distance_gap, std::abs(f[i] - f[j]));
                continue;
            }
            ++usable;
            sup = std::max(sup, std::abs(f[i] - f[j]) / std::pow(d, alpha));
        }
    if (diag) *diag = local;
    if (usable == 0 && local.infinite_pairs == 0) {
        throw domain_error("hoelder_seminorm: no usable point pairs");
    }
    return sup;
}

// Scale-binned Hoelder exponent estimate.
struct HoelderEstimate {
    double seminorm_at_alpha = 0.0; // seminorm evaluated at the estimate's reference exponent
    double fitted_exponent = std::numeric_limits<double>::quiet_NaN();
    double fit_stderr = 0.0;
    std::size_t bins_used = 0;
    bool exponent_defined = false;
};

inline constexpr int hoelder_bins_per_decade = 12;

inline double default_exponent_cutoff(const SampledSpace &s) { return s.finite_diameter() / 4.0; }

// Generic binned-regression core: pairs at finite distance <= cutoff are
// sorted into logarithmic bins (hoelder_bins_per_decade per decade, anchored
// at the cutoff); within each bin the supremum of |delta| and the largest
// distance are recorded and log sup|delta| is regressed on log distance.
inline HoelderEstimate estimate_exponent_pairs(
    const SampledSpace &s, const std::function<double(std::size_t, std::size_t)> &pair_delta,
    double cutoff) {
    const std::size_t n = s.size();
    if (!(cutoff > 0.0)) throw domain_error("estimate_exponent: cutoff must be positive");

    double min_dist = infinite_distance;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = s.dist(i, j);
            if (d > 0.0 && std::isfinite(d) && d <= cutoff) min_dist = std::min(min_dist, d);
        }
    if (!std::isfinite(min_dist)) {
        throw fit_error("estimate_exponent: no pairs below cutoff (0 bins)");
    }

    const int bin_count =
        static_cast<int>(std::ceil(std::log10(cutoff / min_dist) * hoelder_bins_per_decade)) + 1;
    std::vector<double> bin_sup(bin_count, 0.0);
    std::vector<double> bin_dist(bin_count, 0.0);
    std::vector<bool> bin_hit(bin_count, false);

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = s.dist(i, j);
            if (!(d > 0.0) || !std::isfinite(d) || d > cutoff) continue;
            int b = static_cast<int>(std::floor(std::log10(cutoff / d) * hoelder_bins_per_decade));
            b = std::clamp(b, 0, bin_count - 1);
            bin_hit[b] = true;
            bin_dist[b] = std::max(bin_dist[b], d);
            bin_sup[b] = std::max(bin_sup[b], std::abs(pair_delta(i, j)));
        }

    std::vector<double> log_d, log_sup;
    std::size_t nonempty = 0;
    double seminorm_scale = 0.0;
    for (int b = 0; b < bin_count; ++b) {
        if (!bin_hit[b]) continue;
        ++nonempty;
        seminorm_scale = std::max(seminorm_scale, bin_sup[b]);
        if (bin_sup[b] > 0.0) {
            log_d.push_back(std::log(bin_dist[b]));
            log_sup.push_back(std::log(bin_sup[b]));
        }
    }
    if (nonempty < 3) {
        throw fit_error("estimate_exponent: only " + std::to_string(nonempty) +
                        " nonempty bins below cutoff, need 3");
    }

    HoelderEstimate est;
    est.bins_used = nonempty;
    if (log_d.size() < 3) {
        // Constant data: nothing to regress, seminorm is zero.
        est.seminorm_at_alpha = 0.0;
        est.exponent_defined = false;
        return est;
    }
    const LineFit fit = fit_line(log_d, log_sup);
    est.fitted_exponent = fit.slope;
    est.fit_stderr = fit.slope_stderr;
    est.exponent_defined = true;
    return est;
}

// Exponent estimate for a scalar sample vector. seminorm_at_alpha is
// evaluated at the fitted exponent (clamped into (0,1]).
inline HoelderEstimate estimate_exponent(const SampledSpace &s, const std::vector<double> &f,
                                         double cutoff) {
    if (f.size() != s.size()) throw dimension_error("estimate_exponent: value count mismatch");
    HoelderEstimate est = estimate_exponent_pairs(
        s, [&f](std::size_t i, std::size_t j) { return f[i] - f[j]; }, cutoff);
    const double alpha =
        est.exponent_defined ? std::clamp(est.fitted_exponent, 1e-6, 1.0) : 1.0;
    est.seminorm_at_alpha = hoelder_seminorm(s, f, alpha);
    return est;
}

// --- Norms -----------------------------------------------------------------

class OperatorDiscretization; // defined in operator.hpp

struct NormSpec {
    enum class Kind { weighted_lr, sup, graph_norm };
    Kind kind = Kind::weighted_lr;
    double r = 2.0;
    const OperatorDiscretization *op = nullptr; // graph_norm only

    static NormSpec lr(double r) {
        if (!(r >= 1.0) || !std::isfinite(r)) {
            throw domain_error("NormSpec: r must be finite and >= 1");
        }
        return NormSpec{Kind::weighted_lr, r, nullptr};
    }
    static NormSpec sup() { return NormSpec{Kind::sup, 0.0, nullptr}; }
    static NormSpec graph(const OperatorDiscretization &op, double r = 2.0) {
        return NormSpec{Kind::graph_norm, r, &op};
    }
};

inline double weighted_lr_norm(const std::vector<double> &weights, const std::vector<double> &v,
                               double r) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += weights[i] * std::pow(std::abs(v[i]), r);
    return std::pow(s, 1.0 / r);
}

inline double sup_norm(const std::vector<double> &v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// norm_distance needs the generator action for graph norms; the overload
// living in operator.hpp supplies it. This declaration keeps space.hpp
// self-contained for the lr/sup cases.
double norm_distance(const SampledSpace &s, const NormSpec &spec, const std::vector<double> &f,
                     const std::vector<double> &g);

} // namespace heatlab
