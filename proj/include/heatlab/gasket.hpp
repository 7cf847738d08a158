#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "heatlab/dense_matrix.hpp"
#include "heatlab/errors.hpp"
#include "heatlab/linalg.hpp"
#include "heatlab/operator.hpp"
#include "heatlab/space.hpp"

namespace heatlab {

inline constexpr int gasket_level_cap = 7;

// Level-m graph approximation of the Sierpinski gasket. Vertex positions are
// stored as exact integer pairs (a, b) at denominator 2^m in the oblique
// basis e1 = (1, 0), e2 = (1/2, sqrt(3)/2); cells are corner triples of the
// 3^m level-m triangles. Every level-m edge carries conductance (5/3)^m, the
// renormalization factor of the gasket energy form.
struct GasketApproximation {
    int level = 0;
    std::vector<std::array<long, 2>> lattice;        // integer coordinates, denominator 2^m
    std::vector<std::array<double, 2>> coordinates;  // planar embedding
    std::vector<std::array<std::size_t, 3>> cells;
    std::vector<std::pair<std::size_t, std::size_t>> graph_edges; // 3 per cell, u < v
    std::array<std::size_t, 3> corner_ids{0, 0, 0};
    double conductance = 1.0; // (5/3)^level

    std::size_t vertex_count() const { return lattice.size(); }
};

struct GasketBuild {
    GasketApproximation gasket;
    OperatorDiscretization op;          // graph Laplacian + uniform self-similar measure
    SampledSpace resistance_space;      // effective-resistance metric
    SampledSpace euclidean_space;       // planar metric
};

namespace gasket_detail {

struct Builder {
    int level;
    long side; // 2^level
    std::map<std::array<long, 2>, std::size_t> index;
    GasketApproximation g;

    std::size_t vertex(std::array<long, 2> p) {
        auto it = index.find(p);
        if (it != index.end()) return it->second;
        const std::size_t id = g.lattice.size();
        index.emplace(p, id);
        g.lattice.push_back(p);
        return id;
    }

    void subdivide(std::array<long, 2> p0, std::array<long, 2> p1, std::array<long, 2> p2,
                   int depth) {
        if (depth == level) {
            const std::size_t a = vertex(p0), b = vertex(p1), c = vertex(p2);
            g.cells.push_back({a, b, c});
            auto add_edge = [this](std::size_t u, std::size_t v) {
                g.graph_edges.emplace_back(std::min(u, v), std::max(u, v));
            };
            add_edge(a, b);
            add_edge(b, c);
            add_edge(a, c);
            return;
        }
        auto mid = [](std::array<long, 2> x, std::array<long, 2> y) {
            return std::array<long, 2>{(x[0] + y[0]) / 2, (x[1] + y[1]) / 2};
        };
        const auto m01 = mid(p0, p1), m02 = mid(p0, p2), m12 = mid(p1, p2);
        subdivide(p0, m01, m02, depth + 1);
        subdivide(m01, p1, m12, depth + 1);
        subdivide(m02, m12, p2, depth + 1);
    }
};

} // namespace gasket_detail

inline GasketApproximation build_gasket_graph(int level) {
    if (level < 0) throw domain_error("build_gasket_graph: level must be nonnegative");
    if (level > gasket_level_cap) {
        throw capacity_error("build_gasket_graph: level " + std::to_string(level) +
                             " exceeds cap " + std::to_string(gasket_level_cap));
    }
    gasket_detail::Builder b;
    b.level = level;
    b.side = 1L << level;
    b.g.level = level;
    b.g.conductance = std::pow(5.0 / 3.0, level);
    b.subdivide({0, 0}, {b.side, 0}, {0, b.side}, 0);

    GasketApproximation g = std::move(b.g);
    g.corner_ids = {b.index.at({0, 0}), b.index.at({b.side, 0}), b.index.at({0, b.side})};
    const double denom = static_cast<double>(b.side);
    g.coordinates.reserve(g.vertex_count());
    for (const auto &p : g.lattice) {
        const double a = static_cast<double>(p[0]) / denom;
        const double bb = static_cast<double>(p[1]) / denom;
        g.coordinates.push_back({a + 0.5 * bb, bb * std::sqrt(3.0) / 2.0});
    }
    return g;
}

// Graph Laplacian with conductance (5/3)^m on every level-m edge.
inline DenseMatrix gasket_laplacian(const GasketApproximation &g) {
    const std::size_t n = g.vertex_count();
    DenseMatrix lap(n, n);
    for (const auto &[u, v] : g.graph_edges) {
        lap(u, u) += g.conductance;
        lap(v, v) += g.conductance;
        lap(u, v) -= g.conductance;
        lap(v, u) -= g.conductance;
    }
    return lap;
}

// Uniform self-similar measure: each of the 3^m cells carries mass 3^{-m},
// split equally among its three corners. Junction vertices sit in two cells
// and get twice the corner weight; the total is exactly 1.
inline std::vector<double> gasket_measure(const GasketApproximation &g) {
    std::vector<double> w(g.vertex_count(), 0.0);
    const double cell_mass = std::pow(3.0, -g.level) / 3.0;
    for (const auto &cell : g.cells)
        for (std::size_t v : cell) w[v] += cell_mass;
    return w;
}

// Effective resistance between two vertices: ground y, solve the reduced SPD
// system L_red u = e_x, and read off u_x.
inline double effective_resistance(const GasketApproximation &g, std::size_t x, std::size_t y) {
    if (x >= g.vertex_count() || y >= g.vertex_count()) {
        throw domain_error("effective_resistance: vertex out of range");
    }
    if (x == y) return 0.0;
    const DenseMatrix lap = gasket_laplacian(g);
    const std::size_t n = g.vertex_count();
    std::vector<std::size_t> keep;
    keep.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        if (i != y) keep.push_back(i);
    DenseMatrix reduced(n - 1, n - 1);
    for (std::size_t i = 0; i < n - 1; ++i)
        for (std::size_t j = 0; j < n - 1; ++j) reduced(i, j) = lap(keep[i], keep[j]);
    std::vector<double> rhs(n - 1, 0.0);
    std::size_t xi = 0;
    while (keep[xi] != x) ++xi;
    rhs[xi] = 1.0;
    return solve_spd(reduced, rhs)[xi];
}

// Full pairwise resistance table via one grounded factorization:
// R(x, y) = G_xx + G_yy - 2 G_xy with G the grounded inverse.
inline DenseMatrix resistance_table(const GasketApproximation &g) {
    const std::size_t n = g.vertex_count();
    const DenseMatrix lap = gasket_laplacian(g);
    const std::size_t ground = 0;
    DenseMatrix reduced(n - 1, n - 1);
    for (std::size_t i = 0; i < n - 1; ++i)
        for (std::size_t j = 0; j < n - 1; ++j) reduced(i, j) = lap(i + 1, j + 1);
    const CholeskyFactor chol(reduced);
    DenseMatrix green(n, n);
    std::vector<double> rhs(n - 1, 0.0);
    for (std::size_t c = 1; c < n; ++c) {
        rhs[c - 1] = 1.0;
        const std::vector<double> col = chol.solve(rhs);
        rhs[c - 1] = 0.0;
        for (std::size_t r = 1; r < n; ++r) green(r, c) = col[r - 1];
    }
    DenseMatrix table(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double r = green(i, i) + green(j, j) - 2.0 * green(i, j);
            table(i, j) = r;
            table(j, i) = r;
        }
    (void)ground;
    return table;
}

inline GasketBuild build_gasket(int level) {
    GasketBuild b;
    b.gasket = build_gasket_graph(level);
    const std::size_t n = b.gasket.vertex_count();

    b.op.stiffness = gasket_laplacian(b.gasket);
    b.op.mass_weights = gasket_measure(b.gasket);
    b.op.self_adjoint = true;
    b.op.morrey_order_k = 1;

    SampledSpace base;
    base.point_ids.reserve(n);
    base.coordinates.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        base.point_ids.push_back("g" + std::to_string(i));
        base.coordinates.push_back(b.gasket.coordinates[i]);
    }
    base.weights = b.op.mass_weights;

    b.resistance_space = base;
    b.resistance_space.dist = resistance_table(b.gasket);

    b.euclidean_space = std::move(base);
    b.euclidean_space.dist = DenseMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = b.gasket.coordinates[i][0] - b.gasket.coordinates[j][0];
            const double dy = b.gasket.coordinates[i][1] - b.gasket.coordinates[j][1];
            const double d = std::hypot(dx, dy);
            b.euclidean_space.dist(i, j) = d;
            b.euclidean_space.dist(j, i) = d;
        }
    return b;
}

// Exponent estimates of a vertex function in the resistance and Euclidean
// metrics, in that order.
inline std::pair<HoelderEstimate, HoelderEstimate> resistance_vs_euclidean_scan(
    const GasketBuild &b, const std::vector<double> &f) {
    if (f.size() != b.gasket.vertex_count()) {
        throw dimension_error("resistance_vs_euclidean_scan: value count mismatch");
    }
    return {estimate_exponent(b.resistance_space, f, default_exponent_cutoff(b.resistance_space)),
            estimate_exponent(b.euclidean_space, f, default_exponent_cutoff(b.euclidean_space))};
}

} // namespace heatlab
