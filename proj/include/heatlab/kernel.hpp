#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "heatlab/dense_matrix.hpp"
#include "heatlab/errors.hpp"
#include "heatlab/linalg.hpp"
#include "heatlab/operator.hpp"
#include "heatlab/space.hpp"

namespace heatlab {

// Kernels at t below this are refused: the discrete spectral sum needs more
// and more modes as t -> 0 and the truncation error grows accordingly.
inline constexpr double min_kernel_time = 1e-6;

// Eigenvalues (of -A, ascending) and mass-orthonormal eigenvectors of a
// self-adjoint discretization.
struct SpectralData {
    std::vector<double> eigenvalues;
    DenseMatrix eigenvectors; // columns, orthonormal under the weights
    std::vector<double> weights;

    std::size_t modes() const { return eigenvalues.size(); }
    std::size_t points() const { return weights.size(); }
};

inline SpectralData compute_spectrum(const OperatorDiscretization &op, double tol = 1e-12) {
    op.validate();
    if (op.magnetic()) {
        throw contract_error("compute_spectrum: magnetic operators have a complex eigenbasis; "
                             "use hermitian_embed_eigen for their spectrum");
    }
    SpectralData s;
    EigenDecomposition d = generalized_eigen_diag_mass(op.stiffness, op.mass_weights, tol);
    s.eigenvalues = std::move(d.eigenvalues);
    s.eigenvectors = std::move(d.eigenvectors);
    s.weights = op.mass_weights;
    return s;
}

// Kernel values p_t(x_i, x_j) on the sample grid at one time. The induced
// semigroup action is (e^{tA} f)_i = sum_j p_t(x_i, x_j) w_j f_j.
struct KernelMatrix {
    double t = 0.0;
    DenseMatrix values;
    std::vector<double> weights;
    std::shared_ptr<const SampledSpace> space; // optional geometric context
    int block_size = 1;
    bool self_adjoint = true;
    std::size_t modes_used = 0;
    double truncation_bound = 0.0; // sum of dropped per-mode bounds

    std::size_t size() const { return weights.size(); }

    std::vector<double> row(std::size_t i) const {
        std::vector<double> r(values.cols());
        for (std::size_t j = 0; j < r.size(); ++j) r[j] = values(i, j);
        return r;
    }
};

struct KernelOptions {
    std::optional<std::size_t> n_modes;  // hard cap on the number of modes
    double truncation_threshold = 1e-14; // drop modes with e^{-lambda t} |phi|_inf^2 below
};

// Spectral heat kernel p_t = sum_n e^{-lambda_n t} phi_n phi_n^T.
inline KernelMatrix heat_kernel(const SpectralData &spec, double t,
                                const KernelOptions &opts = {},
                                std::shared_ptr<const SampledSpace> space = nullptr) {
    if (!(t > 0.0)) throw domain_error("heat_kernel: t must be positive");
    if (t < min_kernel_time) {
        throw domain_error("heat_kernel: t below minimum " + std::to_string(min_kernel_time) +
                           " (truncation error grows as t -> 0)");
    }
    if (spec.modes() == 0 || spec.points() == 0) {
        throw state_error("heat_kernel: spectral data is empty");
    }
    const std::size_t n = spec.points();
    KernelMatrix k;
    k.t = t;
    k.values = DenseMatrix(n, n);
    k.weights = spec.weights;
    k.space = std::move(space);

    const std::size_t cap = opts.n_modes.value_or(spec.modes());
    for (std::size_t m = 0; m < spec.modes(); ++m) {
        const double decay = std::exp(-spec.eigenvalues[m] * t);
        double phi_inf = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            phi_inf = std::max(phi_inf, std::abs(spec.eigenvectors(i, m)));
        const double bound = decay * phi_inf * phi_inf;
        if (m >= cap || bound < opts.truncation_threshold) {
            k.truncation_bound += bound;
            continue;
        }
        ++k.modes_used;
        for (std::size_t i = 0; i < n; ++i) {
            const double ci = decay * spec.eigenvectors(i, m);
            if (ci == 0.0) continue;
            double *row = k.values.row_ptr(i);
            for (std::size_t j = 0; j < n; ++j) row[j] += ci * spec.eigenvectors(j, m);
        }
    }
    return k;
}

namespace detail {

inline void require_compatible(const KernelMatrix &a, const KernelMatrix &b, const char *op) {
    if (a.size() != b.size() || a.block_size != b.block_size) {
        throw dimension_error(std::string(op) + ": kernels live on different spaces");
    }
}

} // namespace detail

// max |k3 - k1 W k2| / max |k3|: the discrete defect in the semigroup
// composition identity at (t, s, t+s).
inline double chapman_kolmogorov_residual(const KernelMatrix &k1, const KernelMatrix &k2,
                                          const KernelMatrix &k3) {
    detail::require_compatible(k1, k2, "chapman_kolmogorov_residual");
    detail::require_compatible(k1, k3, "chapman_kolmogorov_residual");
    const std::size_t n = k1.size();
    DenseMatrix weighted = k1.values;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) weighted(i, j) *= k1.weights[j];
    const DenseMatrix composed = weighted * k2.values;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            worst = std::max(worst, std::abs(composed(i, j) - k3.values(i, j)));
    const double scale = k3.values.max_abs();
    if (scale == 0.0) throw state_error("chapman_kolmogorov_residual: zero kernel");
    return worst / scale;
}

// max |p - p^T| / max |p|; only meaningful for self-adjoint generators.
inline double symmetry_residual(const KernelMatrix &k) {
    if (!k.self_adjoint) {
        throw contract_error("symmetry_residual: generator is not flagged self-adjoint; "
                             "kernel symmetry is not asserted in that case");
    }
    const double scale = k.values.max_abs();
    if (scale == 0.0) throw state_error("symmetry_residual: zero kernel");
    double worst = 0.0;
    for (std::size_t i = 0; i < k.values.rows(); ++i)
        for (std::size_t j = i + 1; j < k.values.cols(); ++j)
            worst = std::max(worst, std::abs(k.values(i, j) - k.values(j, i)));
    return worst / scale;
}

// Generator applied in the second coordinate: (A_y p)(x_i, .) row by row,
// i.e. -P S W^{-1} under the weighted pairing.
inline DenseMatrix apply_generator_y(const KernelMatrix &k, const OperatorDiscretization &d) {
    if (d.size() != k.size()) {
        throw dimension_error("apply_generator_y: operator size does not match kernel");
    }
    const std::size_t n = k.size();
    DenseMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row = k.row(i);
        const std::vector<double> transformed = d.apply_generator(row);
        for (std::size_t j = 0; j < n; ++j) out(i, j) = transformed[j];
    }
    return out;
}

// Generator applied in the first coordinate: columns transformed, -W^{-1} S P.
inline DenseMatrix apply_generator_x(const KernelMatrix &k, const OperatorDiscretization &d) {
    if (d.size() != k.size()) {
        throw dimension_error("apply_generator_x: operator size does not match kernel");
    }
    const std::size_t n = k.size();
    const DenseMatrix sp = d.stiffness * k.values;
    DenseMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out(i, j) = -sp(i, j) / d.mass_weights[i];
    return out;
}

// || p_t(x_i, .) - p_t(x_j, .) || in the requested norm; the graph-norm
// variant adds the norm of the generator-transformed difference.
inline double coordinate_map_distance(const KernelMatrix &k, const NormSpec &spec, std::size_t i,
                                      std::size_t j) {
    if (i >= k.size() || j >= k.size()) {
        throw domain_error("coordinate_map_distance: point index out of range");
    }
    if (!k.space) throw state_error("coordinate_map_distance: kernel carries no space handle");
    return norm_distance(*k.space, spec, k.row(i), k.row(j));
}

// Central-difference check of d/dt p_t = A_x p_t. Kernels are built with the
// full mode set so the three times share one spectral truncation.
inline double time_derivative_residual(const SpectralData &spec, const OperatorDiscretization &d,
                                       double t, double delta) {
    if (!(t - delta > 0.0)) throw domain_error("time_derivative_residual: t - delta <= 0");
    KernelOptions full;
    full.truncation_threshold = 0.0;
    const KernelMatrix plus = heat_kernel(spec, t + delta, full);
    const KernelMatrix minus = heat_kernel(spec, t - delta, full);
    const KernelMatrix mid = heat_kernel(spec, t, full);
    const DenseMatrix generated = apply_generator_x(mid, d);
    double worst = 0.0;
    const std::size_t n = spec.points();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double dt = (plus.values(i, j) - minus.values(i, j)) / (2.0 * delta);
            worst = std::max(worst, std::abs(dt - generated(i, j)));
        }
    return worst;
}

// max_i |sum_j p(i,j) w_j - 1|: conservation of the constant function under
// the semigroup (Markov instances with no Dirichlet part).
inline double mass_conservation_defect(const KernelMatrix &k) {
    double worst = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < k.size(); ++j) s += k.values(i, j) * k.weights[j];
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

// CSV export: header i,j,x_dist,value (scalar kernels); block kernels emit
// value_11,value_12,value_21,value_22 per base-point pair.
inline std::string kernel_to_csv(const KernelMatrix &k) {
    std::ostringstream out;
    char buf[64];
    auto fmt = [&buf](double v) {
        if (std::isinf(v)) return std::string("inf");
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    if (k.block_size == 1) {
        out << "i,j,x_dist,value\n";
        for (std::size_t i = 0; i < k.size(); ++i)
            for (std::size_t j = 0; j < k.size(); ++j) {
                const double d = k.space ? k.space->dist(i, j)
                                         : std::numeric_limits<double>::quiet_NaN();
                out << i << ',' << j << ',' << fmt(d) << ',' << fmt(k.values(i, j)) << '\n';
            }
        return out.str();
    }
    if (k.block_size != 2 || k.size() % 2 != 0) {
        throw state_error("kernel_to_csv: unsupported block structure");
    }
    const std::size_t n = k.size() / 2;
    out << "i,j,x_dist,value_11,value_12,value_21,value_22\n";
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double d =
                k.space ? k.space->dist(i, j) : std::numeric_limits<double>::quiet_NaN();
            out << i << ',' << j << ',' << fmt(d) << ',' << fmt(k.values(i, j)) << ','
                << fmt(k.values(i, n + j)) << ',' << fmt(k.values(n + i, j)) << ','
                << fmt(k.values(n + i, n + j)) << '\n';
        }
    return out.str();
}

} // namespace heatlab
