#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "heatlab/dense_matrix.hpp"
#include "heatlab/errors.hpp"

namespace heatlab {

// Eigenvalues ascending; eigenvectors stored as columns, orthonormal in the
// inner product the decomposition was computed under (Euclidean for
// symmetric_eigen, mass-weighted for generalized_eigen).
struct EigenDecomposition {
    std::vector<double> eigenvalues;
    DenseMatrix eigenvectors;

    std::size_t size() const { return eigenvalues.size(); }

    std::vector<double> eigenvector(std::size_t n) const {
        std::vector<double> v(eigenvectors.rows());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = eigenvectors(i, n);
        return v;
    }
};

namespace detail {

inline double off_diagonal_frobenius(const DenseMatrix &a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

inline void sort_eigenpairs_ascending(std::vector<double> &lambda, DenseMatrix &vecs) {
    const std::size_t n = lambda.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return lambda[a] < lambda[b]; });
    std::vector<double> lam_sorted(n);
    DenseMatrix v_sorted(vecs.rows(), n);
    for (std::size_t k = 0; k < n; ++k) {
        lam_sorted[k] = lambda[order[k]];
        for (std::size_t i = 0; i < vecs.rows(); ++i) v_sorted(i, k) = vecs(i, order[k]);
    }
    lambda = std::move(lam_sorted);
    vecs = std::move(v_sorted);
}

} // namespace detail

// Cyclic Jacobi eigensolver for symmetric matrices. Sweeps run over the upper
// triangle in row-major order so results are bit-reproducible across runs.
// Converged when the off-diagonal Frobenius norm falls below tol * ||m||_F.
inline EigenDecomposition symmetric_eigen(const DenseMatrix &m, double tol = 1e-12) {
    if (!m.square()) {
        throw dimension_error("symmetric_eigen: matrix must be square, got " + m.shape_string());
    }
    if (!m.all_finite()) throw validation_error("symmetric_eigen: non-finite entries");
    if (m.asymmetry() > 1e-12) {
        throw structure_error("symmetric_eigen: matrix asymmetry " +
                              std::to_string(m.asymmetry()) + " exceeds 1e-12 relative");
    }

    const std::size_t n = m.rows();
    DenseMatrix a = m;
    DenseMatrix v = DenseMatrix::identity(n);

    if (n <= 1) {
        EigenDecomposition d;
        d.eigenvalues.assign(n, n == 1 ? a(0, 0) : 0.0);
        d.eigenvectors = v;
        return d;
    }

    const double total_norm = std::max(a.frobenius_norm(), 1e-300);
    const double target = tol * total_norm;
    constexpr int max_sweeps = 100;
    double off = detail::off_diagonal_frobenius(a);

    for (int sweep = 0; sweep < max_sweeps && off > target; ++sweep) {
        // Rotations below this threshold cannot move the off-diagonal norm
        // past the target; skipping them keeps sweeps cheap near convergence.
        const double skip = target / (n * n);
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= skip) continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0)
                                     ? 1.0 / (theta + std::sqrt(1.0 + theta * theta))
                                     : 1.0 / (theta - std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
        off = detail::off_diagonal_frobenius(a);
    }

    if (off > target) {
        throw convergence_error("symmetric_eigen: off-diagonal norm " + std::to_string(off) +
                                " above target " + std::to_string(target) + " after " +
                                std::to_string(max_sweeps) + " sweeps");
    }

    EigenDecomposition d;
    d.eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i) d.eigenvalues[i] = a(i, i);
    d.eigenvectors = std::move(v);
    detail::sort_eigenpairs_ascending(d.eigenvalues, d.eigenvectors);
    return d;
}

// Eigendecomposition of the 2n x 2n real symmetric embedding
// [[re, -im], [im, re]] of the Hermitian matrix re + i*im. Each complex
// eigenvalue shows up twice; paired real columns reconstruct the complex
// eigenvectors.
inline EigenDecomposition hermitian_embed_eigen(const DenseMatrix &re, const DenseMatrix &im) {
    if (!re.square() || !im.square() || re.rows() != im.rows()) {
        throw dimension_error("hermitian_embed_eigen: re " + re.shape_string() + " and im " +
                              im.shape_string() + " must be square and same size");
    }
    if (re.asymmetry() > 1e-12) {
        throw structure_error("hermitian_embed_eigen: real part is not symmetric");
    }
    const std::size_t n = re.rows();
    double scale = std::max({re.max_abs(), im.max_abs(), 1e-300});
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(im(i, i)) > 1e-12 * scale) {
            throw structure_error("hermitian_embed_eigen: imaginary part has nonzero diagonal");
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(im(i, j) + im(j, i)) > 1e-12 * scale) {
                throw structure_error("hermitian_embed_eigen: imaginary part is not antisymmetric");
            }
        }
    }

    DenseMatrix embed(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            embed(i, j) = re(i, j);
            embed(n + i, n + j) = re(i, j);
            embed(i, n + j) = -im(i, j);
            embed(n + i, j) = im(i, j);
        }
    }
    return symmetric_eigen(embed);
}

// Matrix exponential e^{t m} by scaling-and-squaring around a truncated
// Taylor core. Accuracy target 1e-11 relative for ||t m|| <= 10.
inline DenseMatrix expm_oracle(const DenseMatrix &m, double t) {
    if (!m.square()) {
        throw dimension_error("expm_oracle: matrix must be square, got " + m.shape_string());
    }
    if (!m.all_finite() || !std::isfinite(t)) {
        throw validation_error("expm_oracle: non-finite input");
    }
    const std::size_t n = m.rows();

    DenseMatrix scaled = m;
    scaled *= t;

    double inf_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += std::abs(scaled(i, j));
        inf_norm = std::max(inf_norm, row);
    }

    int squarings = 0;
    if (inf_norm > 0.5) {
        squarings = static_cast<int>(std::ceil(std::log2(inf_norm / 0.5)));
        scaled *= std::pow(2.0, -squarings);
    }

    DenseMatrix result = DenseMatrix::identity(n);
    DenseMatrix term = DenseMatrix::identity(n);
    for (int k = 1; k <= 60; ++k) {
        term = term * scaled;
        term *= 1.0 / k;
        result += term;
        if (term.max_abs() <= 1e-18 * std::max(result.max_abs(), 1.0)) break;
    }
    for (int k = 0; k < squarings; ++k) result = result * result;
    return result;
}

// Cholesky factorization of a symmetric positive-definite matrix, reusable
// for repeated solves against the same matrix.
class CholeskyFactor {
public:
    explicit CholeskyFactor(const DenseMatrix &m) {
        if (!m.square()) {
            throw dimension_error("cholesky: matrix must be square, got " + m.shape_string());
        }
        if (m.asymmetry() > 1e-10) {
            throw structure_error("cholesky: matrix is not symmetric");
        }
        n_ = m.rows();
        lower_ = m;
        for (std::size_t j = 0; j < n_; ++j) {
            double d = lower_(j, j);
            for (std::size_t k = 0; k < j; ++k) d -= lower_(j, k) * lower_(j, k);
            if (d <= 0.0 || !std::isfinite(d)) {
                throw singular_error("cholesky: nonpositive pivot at index " + std::to_string(j));
            }
            const double ljj = std::sqrt(d);
            lower_(j, j) = ljj;
            for (std::size_t i = j + 1; i < n_; ++i) {
                double s = lower_(i, j);
                for (std::size_t k = 0; k < j; ++k) s -= lower_(i, k) * lower_(j, k);
                lower_(i, j) = s / ljj;
            }
        }
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j) lower_(i, j) = 0.0;
    }

    std::size_t size() const { return n_; }

    std::vector<double> solve(const std::vector<double> &rhs) const {
        if (rhs.size() != n_) {
            throw dimension_error("cholesky solve: rhs length " + std::to_string(rhs.size()) +
                                  " does not match system size " + std::to_string(n_));
        }
        std::vector<double> y(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            double s = rhs[i];
            const double *row = lower_.row_ptr(i);
            for (std::size_t k = 0; k < i; ++k) s -= row[k] * y[k];
            y[i] = s / row[i];
        }
        std::vector<double> x(n_);
        for (std::size_t ii = n_; ii-- > 0;) {
            double s = y[ii];
            for (std::size_t k = ii + 1; k < n_; ++k) s -= lower_(k, ii) * x[k];
            x[ii] = s / lower_(ii, ii);
        }
        return x;
    }

private:
    std::size_t n_ = 0;
    DenseMatrix lower_;
};

// Solve m x = rhs for symmetric positive-definite m.
inline std::vector<double> solve_spd(const DenseMatrix &m, const std::vector<double> &rhs) {
    if (m.rows() != rhs.size()) {
        throw dimension_error("solve_spd: rhs length " + std::to_string(rhs.size()) +
                              " does not match matrix " + m.shape_string());
    }
    return CholeskyFactor(m).solve(rhs);
}

// Generalized symmetric eigenproblem S v = lambda W v with diagonal positive
// mass W, reduced to standard form via W^{-1/2}. Returned eigenvectors are
// orthonormal in the W-weighted inner product.
inline EigenDecomposition generalized_eigen_diag_mass(const DenseMatrix &stiffness,
                                                      const std::vector<double> &mass,
                                                      double tol = 1e-12) {
    const std::size_t n = stiffness.rows();
    if (!stiffness.square() || mass.size() != n) {
        throw dimension_error("generalized_eigen_diag_mass: stiffness " +
                              stiffness.shape_string() + " vs mass length " +
                              std::to_string(mass.size()));
    }
    std::vector<double> inv_sqrt(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(mass[i] > 0.0)) {
            throw validation_error("generalized_eigen_diag_mass: nonpositive mass at index " +
                                   std::to_string(i));
        }
        inv_sqrt[i] = 1.0 / std::sqrt(mass[i]);
    }
    DenseMatrix b(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            b(i, j) = inv_sqrt[i] * stiffness(i, j) * inv_sqrt[j];
    // Symmetrize away the roundoff of the two scalings.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (b(i, j) + b(j, i));
            b(i, j) = avg;
            b(j, i) = avg;
        }
    EigenDecomposition d = symmetric_eigen(b, tol);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) d.eigenvectors(i, k) *= inv_sqrt[i];
    return d;
}

} // namespace heatlab
