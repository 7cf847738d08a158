#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "heatlab/dense_matrix.hpp"
#include "heatlab/errors.hpp"
#include "heatlab/space.hpp"

namespace heatlab {

// Discretized generator on a sampled space. The stiffness matrix is the
// (weak-form) quadratic form matrix, symmetric (Hermitian via the optional
// imaginary part when a magnetic potential is present); mass_weights is the
// diagonal lumped quadrature. Sign convention: the generator acts as
// A f = -mass^{-1} * stiffness * f, so heat flow is e^{tA} with decay for
// positive semi-definite stiffness.
struct OperatorDiscretization {
    DenseMatrix stiffness;
    std::optional<DenseMatrix> stiffness_im; // present only for magnetic operators
    std::vector<double> mass_weights;
    bool self_adjoint = true;
    int morrey_order_k = 1;

    std::size_t size() const { return mass_weights.size(); }

    bool magnetic() const { return stiffness_im.has_value(); }

    void validate() const {
        const std::size_t n = size();
        if (stiffness.rows() != n || stiffness.cols() != n) {
            throw dimension_error("OperatorDiscretization: stiffness " +
                                  stiffness.shape_string() + " vs " + std::to_string(n) +
                                  " mass weights");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!(mass_weights[i] > 0.0)) {
                throw validation_error(
                    "OperatorDiscretization: nonpositive mass weight at index " +
                    std::to_string(i));
            }
        }
    }

    // A f = -W^{-1} S f (real, non-magnetic path).
    std::vector<double> apply_generator(const std::vector<double> &f) const {
        if (magnetic()) {
            throw contract_error("apply_generator: magnetic operator requires the complex path");
        }
        if (f.size() != size()) {
            throw dimension_error("apply_generator: vector length mismatch");
        }
        std::vector<double> out = stiffness.apply(f);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = -out[i] / mass_weights[i];
        return out;
    }

    // Dense generator matrix -W^{-1} S; small systems only.
    DenseMatrix generator_matrix() const {
        if (magnetic()) {
            throw contract_error("generator_matrix: magnetic operator requires the complex path");
        }
        const std::size_t n = size();
        DenseMatrix a(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) a(i, j) = -stiffness(i, j) / mass_weights[i];
        return a;
    }
};

inline double norm_distance(const SampledSpace &s, const NormSpec &spec,
                            const std::vector<double> &f, const std::vector<double> &g) {
    const std::size_t n = s.size();
    if (f.size() != n || g.size() != n) {
        throw dimension_error("norm_distance: vector length " + std::to_string(f.size()) + "/" +
                              std::to_string(g.size()) + " vs " + std::to_string(n) + " points");
    }
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = f[i] - g[i];

    switch (spec.kind) {
    case NormSpec::Kind::sup:
        return sup_norm(diff);
    case NormSpec::Kind::weighted_lr:
        return weighted_lr_norm(s.weights, diff, spec.r);
    case NormSpec::Kind::graph_norm: {
        if (spec.op == nullptr) {
            throw state_error("norm_distance: graph norm without an operator handle");
        }
        // Graph norm ||u||_A = ||u|| + ||A u|| (sum convention).
        const std::vector<double> a_diff = spec.op->apply_generator(diff);
        return weighted_lr_norm(s.weights, diff, spec.r) +
               weighted_lr_norm(s.weights, a_diff, spec.r);
    }
    }
    throw state_error("norm_distance: unknown norm kind");
}

} // namespace heatlab
