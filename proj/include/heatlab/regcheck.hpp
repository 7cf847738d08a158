#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "heatlab/errors.hpp"
#include "heatlab/fitting.hpp"
#include "heatlab/kernel.hpp"
#include "heatlab/operator.hpp"
#include "heatlab/space.hpp"

namespace heatlab {

// Verdict margins are artifact policy, chosen from discretization-error pilot
// runs; they are stated in every report.
inline constexpr double blowup_power_margin = 0.2;
inline constexpr double exponent_margin = 0.15;

struct Prediction {
    double alpha_star = 1.0; // predicted Hoelder exponent
    double p_star = 2.0;     // predicted small-t blow-up power of C(t)
    std::string source;      // free-form provenance tag for the report
};

struct ScanConfig {
    std::vector<double> t_grid; // ascending, >= 6 points spanning >= 2 decades
    double alpha = 1.0;
    NormSpec norm = NormSpec::lr(2.0);
    Prediction prediction;

    void validate() const {
        if (t_grid.size() < 6) {
            throw validation_error("ScanConfig: need at least 6 grid times, got " +
                                   std::to_string(t_grid.size()));
        }
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            if (!(t_grid[i] > 0.0)) throw validation_error("ScanConfig: times must be positive");
            if (i > 0 && t_grid[i] <= t_grid[i - 1]) {
                throw validation_error("ScanConfig: grid must be strictly ascending");
            }
        }
        if (t_grid.back() / t_grid.front() < 99.999) {
            throw validation_error("ScanConfig: grid must span at least two decades");
        }
        if (!(alpha > 0.0) || alpha > 1.0) {
            throw validation_error("ScanConfig: alpha must lie in (0, 1]");
        }
    }
};

struct PerTimeEntry {
    double t = 0.0;
    double constant = 0.0;  // C(t): sup pair normdist / d^alpha in the config norm
    double seminorm = 0.0;  // same sup in the plain weighted-L2 norm
    double exponent = std::numeric_limits<double>::quiet_NaN();
    bool exponent_defined = false;
};

struct BlowUpFit {
    double c1 = 0.0;
    double c2 = 0.0;
    double p = std::numeric_limits<double>::quiet_NaN(); // fitted small-t power
    double residual = 0.0;
    bool valid = false;
};

struct HoelderReport {
    Prediction prediction;
    std::vector<PerTimeEntry> per_t;
    BlowUpFit fit;
    std::string verdict = "inconclusive"; // pass | fail | inconclusive
    std::string detail;
    std::size_t excluded_infinite_pairs = 0;
    double p_margin = blowup_power_margin;
    double alpha_margin = exponent_margin;
};

namespace scan_detail {

// sup over finite-distance pairs of pair_value(i, j) / d(i, j)^alpha, with a
// count of the pairs excluded for infinite distance. Ties broken by lowest
// index pair through the scan order.
inline double sup_pair_ratio(const SampledSpace &s,
                             const std::function<double(std::size_t, std::size_t)> &pair_value,
                             double alpha, std::size_t *infinite_pairs) {
    double sup = 0.0;
    std::size_t skipped = 0;
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = s.dist(i, j);
            if (!std::isfinite(d)) {
                ++skipped;
                continue;
            }
            if (d == 0.0) continue;
            sup = std::max(sup, pair_value(i, j) / std::pow(d, alpha));
        }
    if (infinite_pairs) *infinite_pairs += skipped;
    return sup;
}

} // namespace scan_detail

// C(t) scan over a time grid against a declared blow-up prediction. The
// small-t power comes from a log-log fit over the smallest-t half of the
// grid; (C1, C2) are then fitted in the basis {1, t^{-p*}}. The verdict
// treats the exponent prediction as one-sided: smoother than predicted never
// fails.
inline HoelderReport scan_constants(const std::function<KernelMatrix(double)> &kernel_at,
                                    const ScanConfig &cfg) {
    cfg.validate();
    HoelderReport report;
    report.prediction = cfg.prediction;

    bool any_degenerate = false;
    for (double t : cfg.t_grid) {
        const KernelMatrix k = kernel_at(t);
        if (!k.space) throw state_error("scan_constants: kernel carries no space handle");
        const SampledSpace &s = *k.space;

        PerTimeEntry entry;
        entry.t = t;
        auto row_dist = [&](std::size_t i, std::size_t j) {
            return norm_distance(s, cfg.norm, k.row(i), k.row(j));
        };
        auto row_dist_l2 = [&](std::size_t i, std::size_t j) {
            return norm_distance(s, NormSpec::lr(2.0), k.row(i), k.row(j));
        };
        entry.constant =
            scan_detail::sup_pair_ratio(s, row_dist, cfg.alpha, &report.excluded_infinite_pairs);
        entry.seminorm = scan_detail::sup_pair_ratio(s, row_dist_l2, cfg.alpha, nullptr);
        try {
            const HoelderEstimate est =
                estimate_exponent_pairs(s, row_dist, default_exponent_cutoff(s));
            entry.exponent = est.fitted_exponent;
            entry.exponent_defined = est.exponent_defined;
        } catch (const fit_error &) {
            any_degenerate = true;
        }
        report.per_t.push_back(entry);
    }

    // Small-t power from the lower half of the grid.
    const std::size_t half = (cfg.t_grid.size() + 1) / 2;
    std::vector<double> log_inv_t, log_c;
    for (std::size_t i = 0; i < half; ++i) {
        if (report.per_t[i].constant > 0.0) {
            log_inv_t.push_back(std::log(1.0 / report.per_t[i].t));
            log_c.push_back(std::log(report.per_t[i].constant));
        }
    }
    bool fit_ok = true;
    try {
        if (log_inv_t.size() < 2) throw fit_error("fewer than 2 positive small-t constants");
        const LineFit power = fit_line(log_inv_t, log_c);
        report.fit.p = power.slope;
        std::vector<double> ones(cfg.t_grid.size(), 1.0), tp(cfg.t_grid.size()), c(cfg.t_grid.size());
        for (std::size_t i = 0; i < cfg.t_grid.size(); ++i) {
            tp[i] = std::pow(cfg.t_grid[i], -cfg.prediction.p_star);
            c[i] = report.per_t[i].constant;
        }
        const TwoBasisFit amplitude = fit_two_basis(ones, tp, c);
        report.fit.c1 = amplitude.c1;
        report.fit.c2 = amplitude.c2;
        report.fit.residual = amplitude.residual;
        report.fit.valid = true;
    } catch (const fit_error &e) {
        fit_ok = false;
        report.detail = e.what();
    }

    double min_exponent = std::numeric_limits<double>::infinity();
    bool any_exponent = false;
    for (const auto &entry : report.per_t) {
        if (entry.exponent_defined) {
            any_exponent = true;
            min_exponent = std::min(min_exponent, entry.exponent);
        }
    }

    if (!fit_ok || !any_exponent || any_degenerate) {
        report.verdict = "inconclusive";
        if (report.detail.empty()) report.detail = "degenerate scan (no usable exponent fit)";
        return report;
    }
    const bool power_ok = report.fit.p <= cfg.prediction.p_star + report.p_margin;
    const bool exponent_ok = min_exponent >= cfg.prediction.alpha_star - report.alpha_margin;
    report.verdict = (power_ok && exponent_ok) ? "pass" : "fail";
    report.detail = "fitted p = " + std::to_string(report.fit.p) + " vs bound " +
                    std::to_string(cfg.prediction.p_star + report.p_margin) +
                    "; min exponent = " + std::to_string(min_exponent) + " vs floor " +
                    std::to_string(cfg.prediction.alpha_star - report.alpha_margin);
    return report;
}

// Deterministic stride subsample keeping the product space within the cap.
inline std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t max_product) {
    std::size_t max_base = 1;
    while ((max_base + 1) * (max_base + 1) <= max_product) ++max_base;
    if (n <= max_base) {
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        return all;
    }
    const std::size_t stride = (n + max_base - 1) / max_base;
    std::vector<std::size_t> picked;
    for (std::size_t i = 0; i < n; i += stride) picked.push_back(i);
    return picked;
}

struct JointScanResult {
    HoelderEstimate estimate;       // of (x, y) -> p_t(x, y) on the product sum-metric space
    double measured_seminorm = 0.0; // at the requested alpha
    double m_factor = 0.0;          // max coordinate-slice L2 norm of the half-time kernel
    double c_half = 0.0;            // one-coordinate constant of the half-time kernel
    double factorized_bound = 0.0;  // m_factor * c_half
    bool bound_holds = false;
    std::size_t subsampled_points = 0; // base points used (0 = no subsampling)
};

// Joint Hoelder estimate of the kernel on the product space, plus the
// factorized bound M(t) C(t/2) from one-coordinate scans of the half-time
// kernel. The measured joint seminorm must stay below the bound.
inline JointScanResult joint_scan(const KernelMatrix &k, const KernelMatrix &k_half,
                                  double alpha) {
    if (!k.space) throw state_error("joint_scan: kernel carries no space handle");
    detail::require_compatible(k, k_half, "joint_scan");
    const SampledSpace &s = *k.space;
    const std::size_t n = s.size();

    const std::vector<std::size_t> picked = subsample_indices(n, matrix_dimension_cap);
    JointScanResult result;
    if (picked.size() < n) result.subsampled_points = picked.size();

    SampledSpace base;
    base.point_ids.reserve(picked.size());
    base.weights.reserve(picked.size());
    base.dist = DenseMatrix(picked.size(), picked.size());
    for (std::size_t a = 0; a < picked.size(); ++a) {
        base.point_ids.push_back(s.point_ids[picked[a]]);
        base.weights.push_back(s.weights[picked[a]]);
        for (std::size_t b = 0; b < picked.size(); ++b)
            base.dist(a, b) = s.dist(picked[a], picked[b]);
    }
    const SampledSpace product = product_sum_metric(base);
    std::vector<double> values(product.size());
    for (std::size_t a = 0; a < picked.size(); ++a)
        for (std::size_t b = 0; b < picked.size(); ++b)
            values[a * picked.size() + b] = k.values(picked[a], picked[b]);

    result.measured_seminorm = hoelder_seminorm(product, values, alpha);
    result.estimate = estimate_exponent(product, values, default_exponent_cutoff(product));
    result.estimate.seminorm_at_alpha = result.measured_seminorm;

    // M(t): discrete proxy of the essential sup of coordinate-slice norms of
    // the half-time kernel (both orientations; they agree when symmetric).
    for (std::size_t i = 0; i < n; ++i) {
        double row_sq = 0.0, col_sq = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            row_sq += k_half.weights[j] * k_half.values(i, j) * k_half.values(i, j);
            col_sq += k_half.weights[j] * k_half.values(j, i) * k_half.values(j, i);
        }
        result.m_factor = std::max({result.m_factor, std::sqrt(row_sq), std::sqrt(col_sq)});
    }
    auto half_row_dist = [&](std::size_t i, std::size_t j) {
        return norm_distance(s, NormSpec::lr(2.0), k_half.row(i), k_half.row(j));
    };
    result.c_half = scan_detail::sup_pair_ratio(s, half_row_dist, alpha, nullptr);
    result.factorized_bound = result.m_factor * result.c_half;
    result.bound_holds = result.measured_seminorm <= result.factorized_bound * (1.0 + 1e-6);
    return result;
}

struct SecondOrderResult {
    HoelderEstimate estimate;          // joint estimate of A_x A_y p_t
    double measured_seminorm = 0.0;
    double cross_check_residual = 0.0; // inner-product representation defect
    std::size_t subsampled_points = 0;
};

// A_x A_y p_t via the generator in both coordinates, its joint Hoelder
// estimate, and the cross-check against the half-time inner-product
// representation (A_x A_y p_t)(x,y) = <(A p_{t/2})(x,.), (A p_{t/2})(y,.)>_w.
inline SecondOrderResult second_order_scan(const KernelMatrix &k, const KernelMatrix &k_half,
                                           const OperatorDiscretization &d, double alpha) {
    if (!k.self_adjoint) {
        throw contract_error("second_order_scan: generator must be self-adjoint");
    }
    if (!k.space) throw state_error("second_order_scan: kernel carries no space handle");
    detail::require_compatible(k, k_half, "second_order_scan");
    const SampledSpace &s = *k.space;
    const std::size_t n = s.size();

    // A P A^T: generator applied in x then y.
    const DenseMatrix ap = apply_generator_x(k, d);
    DenseMatrix q(n, n);
    {
        // rows of ap transformed by the generator in the second coordinate
        KernelMatrix tmp;
        tmp.values = ap;
        tmp.weights = k.weights;
        tmp.t = k.t;
        q = apply_generator_y(tmp, d);
    }

    const DenseMatrix b = [&] {
        KernelMatrix half = k_half;
        return apply_generator_x(half, d);
    }();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double inner = 0.0;
            for (std::size_t z = 0; z < n; ++z)
                inner += b(i, z) * k.weights[z] * b(j, z);
            worst = std::max(worst, std::abs(q(i, j) - inner));
        }
    const double scale = std::max(q.max_abs(), 1e-300);

    SecondOrderResult result;
    result.cross_check_residual = worst / scale;

    const std::vector<std::size_t> picked = subsample_indices(n, matrix_dimension_cap);
    if (picked.size() < n) result.subsampled_points = picked.size();
    SampledSpace base;
    base.dist = DenseMatrix(picked.size(), picked.size());
    for (std::size_t a = 0; a < picked.size(); ++a) {
        base.point_ids.push_back(s.point_ids[picked[a]]);
        base.weights.push_back(s.weights[picked[a]]);
        for (std::size_t bcol = 0; bcol < picked.size(); ++bcol)
            base.dist(a, bcol) = s.dist(picked[a], picked[bcol]);
    }
    const SampledSpace product = product_sum_metric(base);
    std::vector<double> values(product.size());
    for (std::size_t a = 0; a < picked.size(); ++a)
        for (std::size_t bcol = 0; bcol < picked.size(); ++bcol)
            values[a * picked.size() + bcol] = q(picked[a], picked[bcol]);
    result.measured_seminorm = hoelder_seminorm(product, values, alpha);
    result.estimate = estimate_exponent(product, values, default_exponent_cutoff(product));
    result.estimate.seminorm_at_alpha = result.measured_seminorm;
    return result;
}

} // namespace heatlab
