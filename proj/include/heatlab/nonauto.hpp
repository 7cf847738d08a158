#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "heatlab/errors.hpp"
#include "heatlab/kernel.hpp"
#include "heatlab/linalg.hpp"
#include "heatlab/metric_graph.hpp"
#include "heatlab/regcheck.hpp"
#include "heatlab/space.hpp"

namespace heatlab {

// Temporal coefficient profile: named presets plus tabulated samples with
// linear interpolation in time.
struct CoefficientProfile {
    enum class Kind { constant, sin_modulated, tabulated };
    Kind kind = Kind::constant;
    double base = 1.0;
    double amplitude = 0.0;
    double frequency = 1.0;
    std::vector<double> sample_times;  // ascending, tabulated kind only
    std::vector<double> sample_values;

    static CoefficientProfile constant(double value) {
        CoefficientProfile p;
        p.kind = Kind::constant;
        p.base = value;
        return p;
    }

    static CoefficientProfile sin_modulated(double amplitude, double frequency,
                                            double base = 1.0) {
        CoefficientProfile p;
        p.kind = Kind::sin_modulated;
        p.base = base;
        p.amplitude = amplitude;
        p.frequency = frequency;
        return p;
    }

    static CoefficientProfile tabulated(std::vector<double> times, std::vector<double> values) {
        if (times.size() != values.size() || times.size() < 2) {
            throw validation_error("CoefficientProfile: tabulated data needs >= 2 samples");
        }
        for (std::size_t i = 1; i < times.size(); ++i) {
            if (times[i] <= times[i - 1]) {
                throw validation_error("CoefficientProfile: sample times must ascend");
            }
        }
        CoefficientProfile p;
        p.kind = Kind::tabulated;
        p.sample_times = std::move(times);
        p.sample_values = std::move(values);
        return p;
    }

    double eval(double t) const {
        switch (kind) {
        case Kind::constant:
            return base;
        case Kind::sin_modulated:
            return base + amplitude * std::sin(frequency * t);
        case Kind::tabulated: {
            if (t <= sample_times.front()) return sample_values.front();
            if (t >= sample_times.back()) return sample_values.back();
            std::size_t k = 1;
            while (sample_times[k] < t) ++k;
            const double f =
                (t - sample_times[k - 1]) / (sample_times[k] - sample_times[k - 1]);
            return sample_values[k - 1] * (1.0 - f) + sample_values[k] * f;
        }
        }
        return base;
    }

    // Empirical modulus of continuity over [0, horizon] from dense sampling.
    double empirical_modulus(double delta, double horizon = 1.0) const {
        const int samples = 512;
        double worst = 0.0;
        for (int i = 0; i + 1 <= samples; ++i) {
            const double t = horizon * static_cast<double>(i) / samples;
            worst = std::max(worst, std::abs(eval(t + delta) - eval(t)));
        }
        return worst;
    }
};

// Family of forms a(t; u, v) = sum_e c_e(t) int u' v' + V(t) int u v on a
// fixed metric graph mesh. diffusion_profile scales a static per-edge
// profile; ellipticity (coefficient floor eta) is checked at every step.
struct FormFamily {
    GraphDiscretization disc;           // geometry and mass fixed once
    std::vector<DenseMatrix> edge_stiffness; // reduced per-edge stiffness blocks
    CoefficientProfile diffusion_profile;
    std::vector<double> edge_profile;   // static per-edge multiplier, default 1
    CoefficientProfile potential_profile;
    double eta = 1e-8;                  // uniform ellipticity floor on the coefficient
    double bound_upper = 0.0;           // documented coefficient bound M (0 = unchecked)

    std::size_t size() const { return disc.op.size(); }

    double coefficient(double t, std::size_t edge) const {
        return diffusion_profile.eval(t) * edge_profile[edge];
    }

    // Stiffness at time t: diffusion-scaled edge blocks plus the lumped
    // potential on the diagonal.
    DenseMatrix stiffness_at(double t) const {
        const std::size_t n = size();
        DenseMatrix s(n, n);
        for (std::size_t e = 0; e < edge_stiffness.size(); ++e) {
            const double c = coefficient(t, e);
            if (!(c >= eta)) {
                throw validation_error("FormFamily: ellipticity violated at t = " +
                                       std::to_string(t) + " on edge " + std::to_string(e) +
                                       " (coefficient " + std::to_string(c) + " < eta " +
                                       std::to_string(eta) + ")");
            }
            if (bound_upper > 0.0 && c > bound_upper) {
                throw validation_error("FormFamily: coefficient bound exceeded at t = " +
                                       std::to_string(t));
            }
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) s(i, j) += c * edge_stiffness[e](i, j);
        }
        const double v = potential_profile.eval(t);
        if (v != 0.0) {
            for (std::size_t i = 0; i < n; ++i) s(i, i) += v * disc.op.mass_weights[i];
        }
        return s;
    }
};

inline FormFamily make_form_family(const MetricGraph &graph, double h,
                                   CoefficientProfile diffusion,
                                   CoefficientProfile potential = CoefficientProfile::constant(0.0)) {
    FormFamily fam;
    fam.disc = discretize_graph(graph, h);
    if (fam.disc.op.magnetic()) {
        throw validation_error("make_form_family: magnetic graphs are not supported here");
    }
    fam.diffusion_profile = std::move(diffusion);
    fam.potential_profile = std::move(potential);
    fam.edge_profile.assign(graph.edges.size(), 1.0);

    // Per-edge stiffness blocks in the reduced indexing.
    const std::size_t n = fam.disc.op.size();
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
        DenseMatrix block(n, n);
        const std::size_t ne = fam.disc.edge_subdivisions[e];
        const double inv = 1.0 / fam.disc.edge_mesh[e];
        for (std::size_t s = 0; s < ne; ++s) {
            const std::ptrdiff_t a = fam.disc.full_to_reduced[fam.disc.full_index(e, s)];
            const std::ptrdiff_t b = fam.disc.full_to_reduced[fam.disc.full_index(e, s + 1)];
            if (a >= 0) block(a, a) += inv;
            if (b >= 0) block(b, b) += inv;
            if (a >= 0 && b >= 0) {
                block(a, b) -= inv;
                block(b, a) -= inv;
            }
        }
        fam.edge_stiffness.push_back(std::move(block));
    }
    return fam;
}

// Two-parameter solution operator U(t, s) on the weighted space.
struct Propagator {
    double s = 0.0;
    double t = 0.0;
    DenseMatrix matrix;
    std::size_t step_count = 0;
};

// Crank-Nicolson stepping of u' = A(tau) u with A assembled at step
// midpoints: (W + dt/2 S_mid) u_{k+1} = (W - dt/2 S_mid) u_k. Second order in
// the step size; the left-hand matrix is SPD and solved by Cholesky.
inline Propagator propagate(const FormFamily &fam, double s, double t, std::size_t steps) {
    if (!(t > s)) throw domain_error("propagate: need s < t");
    if (steps < 1) throw domain_error("propagate: need at least one step");
    const std::size_t n = fam.size();
    const double dt = (t - s) / static_cast<double>(steps);
    const std::vector<double> &w = fam.disc.op.mass_weights;

    DenseMatrix u = DenseMatrix::identity(n);
    for (std::size_t k = 0; k < steps; ++k) {
        const double mid = s + (static_cast<double>(k) + 0.5) * dt;
        const DenseMatrix stiff = fam.stiffness_at(mid);
        DenseMatrix lhs(n, n), rhs(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double wij = (i == j) ? w[i] : 0.0;
                lhs(i, j) = wij + 0.5 * dt * stiff(i, j);
                rhs(i, j) = wij - 0.5 * dt * stiff(i, j);
            }
        const CholeskyFactor chol(lhs);
        const DenseMatrix b = rhs * u;
        std::vector<double> col(n);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) col[i] = b(i, j);
            const std::vector<double> x = chol.solve(col);
            for (std::size_t i = 0; i < n; ++i) u(i, j) = x[i];
        }
    }
    Propagator p;
    p.s = s;
    p.t = t;
    p.matrix = std::move(u);
    p.step_count = steps;
    return p;
}

// max |U(t,s) - U(t,r) U(r,s)| / max |U(t,s)| at matched step density: the
// sub-propagators reuse the same dt up to the rounding of their step counts.
inline double cocycle_residual(const FormFamily &fam, double s, double r, double t,
                               std::size_t steps) {
    if (!(s < r && r < t)) throw domain_error("cocycle_residual: need s < r < t");
    const double density = static_cast<double>(steps) / (t - s);
    const auto sub_steps = [&](double a, double b) {
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(density * (b - a))));
    };
    const Propagator full = propagate(fam, s, t, steps);
    const Propagator first = propagate(fam, s, r, sub_steps(s, r));
    const Propagator second = propagate(fam, r, t, sub_steps(r, t));
    const DenseMatrix composed = second.matrix * first.matrix;
    double worst = 0.0;
    for (std::size_t i = 0; i < full.matrix.rows(); ++i)
        for (std::size_t j = 0; j < full.matrix.cols(); ++j)
            worst = std::max(worst, std::abs(full.matrix(i, j) - composed(i, j)));
    return worst / std::max(full.matrix.max_abs(), 1e-300);
}

// Kernel of the evolution family: p_{t,s} = U(t,s) W^{-1}, so the family
// action is (U f)_i = sum_j p(i,j) w_j f_j.
inline KernelMatrix nonauto_kernel(const FormFamily &fam, const Propagator &prop) {
    KernelMatrix k;
    k.t = prop.t - prop.s;
    k.weights = fam.disc.op.mass_weights;
    k.space = std::make_shared<SampledSpace>(fam.disc.space);
    k.self_adjoint = false; // U(t,s) need not be symmetric for t-dependent forms
    k.values = prop.matrix;
    for (std::size_t i = 0; i < k.values.rows(); ++i)
        for (std::size_t j = 0; j < k.values.cols(); ++j) k.values(i, j) /= k.weights[j];
    return k;
}

struct NonautoScanResult {
    HoelderReport report;          // one-coordinate scan summary (single time pair)
    HoelderEstimate one_coordinate;
    HoelderEstimate joint;
    double joint_seminorm = 0.0;
    std::size_t subsampled_points = 0;
};

// Hoelder estimates of p_{t,s}: the map x -> p(x, .) measured in the form
// norm (L2 plus energy at the midpoint time), and the joint estimate on the
// product sum-metric space at the given alpha.
inline NonautoScanResult nonauto_kernel_scan(const FormFamily &fam, double s, double t,
                                             double alpha, std::size_t steps) {
    if (!(t > s)) throw domain_error("nonauto_kernel_scan: need s < t");
    const Propagator prop = propagate(fam, s, t, steps);
    const KernelMatrix k = nonauto_kernel(fam, prop);
    const SampledSpace &space = *k.space;
    const std::size_t n = space.size();
    const DenseMatrix stiff_mid = fam.stiffness_at(0.5 * (s + t));

    NonautoScanResult result;
    auto v_norm_dist = [&](std::size_t i, std::size_t j) {
        std::vector<double> diff(n);
        for (std::size_t c = 0; c < n; ++c) diff[c] = k.values(i, c) - k.values(j, c);
        double l2 = 0.0;
        for (std::size_t c = 0; c < n; ++c) l2 += k.weights[c] * diff[c] * diff[c];
        const std::vector<double> sd = stiff_mid.apply(diff);
        double energy = 0.0;
        for (std::size_t c = 0; c < n; ++c) energy += diff[c] * sd[c];
        return std::sqrt(l2 + std::max(energy, 0.0));
    };

    result.one_coordinate =
        estimate_exponent_pairs(space, v_norm_dist, default_exponent_cutoff(space));
    PerTimeEntry entry;
    entry.t = t - s;
    entry.constant = scan_detail::sup_pair_ratio(space, v_norm_dist, alpha, nullptr);
    entry.seminorm = entry.constant;
    entry.exponent = result.one_coordinate.fitted_exponent;
    entry.exponent_defined = result.one_coordinate.exponent_defined;
    result.one_coordinate.seminorm_at_alpha = entry.constant;
    result.report.per_t.push_back(entry);
    result.report.prediction = Prediction{alpha, 0.0, "nonauto_form_embedding"};

    // Joint estimate of the scalar kernel on the product space.
    const std::vector<std::size_t> picked = subsample_indices(n, matrix_dimension_cap);
    if (picked.size() < n) result.subsampled_points = picked.size();
    SampledSpace base;
    base.dist = DenseMatrix(picked.size(), picked.size());
    for (std::size_t a = 0; a < picked.size(); ++a) {
        base.point_ids.push_back(space.point_ids[picked[a]]);
        base.weights.push_back(space.weights[picked[a]]);
        for (std::size_t b = 0; b < picked.size(); ++b)
            base.dist(a, b) = space.dist(picked[a], picked[b]);
    }
    const SampledSpace product = product_sum_metric(base);
    std::vector<double> values(product.size());
    for (std::size_t a = 0; a < picked.size(); ++a)
        for (std::size_t b = 0; b < picked.size(); ++b)
            values[a * picked.size() + b] = k.values(picked[a], picked[b]);
    result.joint_seminorm = hoelder_seminorm(product, values, alpha);
    result.joint = estimate_exponent(product, values, default_exponent_cutoff(product));
    result.joint.seminorm_at_alpha = result.joint_seminorm;

    result.report.verdict = std::isfinite(result.joint_seminorm) &&
                                    result.one_coordinate.exponent_defined
                                ? "pass"
                                : "inconclusive";
    return result;
}

// Error ratio ||U_s - U_2s|| / ||U_2s - U_4s||; second-order stepping puts it
// near 4.
inline double richardson_ratio(const FormFamily &fam, double s, double t, std::size_t steps) {
    const Propagator u1 = propagate(fam, s, t, steps);
    const Propagator u2 = propagate(fam, s, t, 2 * steps);
    const Propagator u4 = propagate(fam, s, t, 4 * steps);
    const double e1 = (u1.matrix - u2.matrix).max_abs();
    const double e2 = (u2.matrix - u4.matrix).max_abs();
    if (e2 == 0.0) throw fit_error("richardson_ratio: refinement error vanished");
    return e1 / e2;
}

} // namespace heatlab
