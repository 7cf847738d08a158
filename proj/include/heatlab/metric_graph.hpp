#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "heatlab/dense_matrix.hpp"
#include "heatlab/errors.hpp"
#include "heatlab/operator.hpp"
#include "heatlab/space.hpp"

namespace heatlab {

// Per-edge sampled function: empty means identically zero, one value is a
// constant, k values sit at uniformly spaced positions including both
// endpoints and are interpolated linearly in between.
struct EdgeFunction {
    std::vector<double> samples;

    bool zero() const { return samples.empty(); }

    double eval(double offset, double length) const {
        if (samples.empty()) return 0.0;
        if (samples.size() == 1) return samples.front();
        const double s = std::clamp(offset / length, 0.0, 1.0) *
                         static_cast<double>(samples.size() - 1);
        const std::size_t k = std::min(static_cast<std::size_t>(s), samples.size() - 2);
        const double frac = s - static_cast<double>(k);
        return samples[k] * (1.0 - frac) + samples[k + 1] * frac;
    }

    // Midpoint-rule integral over [a, b] within an edge of the given length.
    double integrate(double a, double b, double length) const {
        return eval(0.5 * (a + b), length) * (b - a);
    }
};

struct GraphEdge {
    std::size_t u = 0;
    std::size_t v = 0;
    double length = 1.0;
    EdgeFunction electric;  // potential q, real
    EdgeFunction magnetic;  // potential B
};

// A point on the graph: offset along edge `edge` measured from its u-end.
struct GraphPoint {
    std::size_t edge = 0;
    double offset = 0.0;
};

struct MetricGraph {
    std::vector<std::string> vertex_ids;
    std::vector<GraphEdge> edges;
    std::set<std::size_t> dirichlet;                 // vertex indices
    std::map<std::size_t, double> delta_strengths;   // sigma per non-Dirichlet vertex

    std::size_t vertex_count() const { return vertex_ids.size(); }

    bool has_magnetic_potential() const {
        for (const auto &e : edges)
            if (!e.magnetic.zero()) return true;
        return false;
    }

    void validate() const {
        if (edges.empty()) throw validation_error("MetricGraph: graph has no edges");
        for (std::size_t k = 0; k < edges.size(); ++k) {
            const GraphEdge &e = edges[k];
            if (e.u >= vertex_count() || e.v >= vertex_count()) {
                throw validation_error("MetricGraph: edge " + std::to_string(k) +
                                       " references an unknown vertex");
            }
            if (!(e.length > 0.0) || !std::isfinite(e.length)) {
                throw validation_error("MetricGraph: edge " + std::to_string(k) +
                                       " has nonpositive length");
            }
            for (double q : e.electric.samples)
                if (!std::isfinite(q)) {
                    throw validation_error("MetricGraph: non-finite electric potential on edge " +
                                           std::to_string(k) +
                                           " (complex potentials are not supported)");
                }
            for (double b : e.magnetic.samples)
                if (!std::isfinite(b)) {
                    throw validation_error("MetricGraph: non-finite magnetic potential on edge " +
                                           std::to_string(k));
                }
        }
        for (std::size_t v : dirichlet) {
            if (v >= vertex_count()) {
                throw validation_error("MetricGraph: Dirichlet set references unknown vertex");
            }
        }
        for (const auto &[v, sigma] : delta_strengths) {
            if (v >= vertex_count()) {
                throw validation_error("MetricGraph: delta strength on unknown vertex");
            }
            if (dirichlet.count(v)) {
                throw validation_error("MetricGraph: delta strength on Dirichlet vertex " +
                                       vertex_ids[v]);
            }
            if (!std::isfinite(sigma)) {
                throw validation_error("MetricGraph: non-finite delta strength at vertex " +
                                       vertex_ids[v]);
            }
        }
        // Connectivity over the vertex set.
        std::vector<char> seen(vertex_count(), 0);
        std::queue<std::size_t> frontier;
        frontier.push(0);
        seen[0] = 1;
        std::size_t reached = 1;
        while (!frontier.empty()) {
            const std::size_t v = frontier.front();
            frontier.pop();
            for (const auto &e : edges) {
                for (std::size_t w : {e.u, e.v}) {
                    if ((e.u == v || e.v == v) && !seen[w]) {
                        seen[w] = 1;
                        ++reached;
                        frontier.push(w);
                    }
                }
            }
        }
        if (reached != vertex_count()) {
            throw validation_error("MetricGraph: graph is disconnected (" +
                                   std::to_string(reached) + " of " +
                                   std::to_string(vertex_count()) + " vertices reachable)");
        }
    }

    double sigma(std::size_t v) const {
        auto it = delta_strengths.find(v);
        return it == delta_strengths.end() ? 0.0 : it->second;
    }
};

// All-pairs vertex distances over the edge lengths (Floyd-Warshall; vertex
// counts are small compared to sampled point counts).
inline DenseMatrix vertex_distances(const MetricGraph &g) {
    const std::size_t n = g.vertex_count();
    DenseMatrix d(n, n, infinite_distance);
    for (std::size_t i = 0; i < n; ++i) d(i, i) = 0.0;
    for (const auto &e : g.edges) {
        d(e.u, e.v) = std::min(d(e.u, e.v), e.length);
        d(e.v, e.u) = d(e.u, e.v);
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(d(i, k))) continue;
            for (std::size_t j = 0; j < n; ++j) {
                const double via = d(i, k) + d(k, j);
                if (via < d(i, j)) {
                    d(i, j) = via;
                    d(j, i) = via;
                }
            }
        }
    return d;
}

// Exact shortest-path distances between arbitrary points on the graph,
// including edge-interior points.
inline DenseMatrix graph_metric(const MetricGraph &g, const std::vector<GraphPoint> &points) {
    g.validate();
    const DenseMatrix vd = vertex_distances(g);
    const std::size_t n = points.size();
    DenseMatrix d(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const GraphEdge &ei = g.edges.at(points[i].edge);
        const double oi = points[i].offset;
        for (std::size_t j = i + 1; j < n; ++j) {
            const GraphEdge &ej = g.edges.at(points[j].edge);
            const double oj = points[j].offset;
            double best = infinite_distance;
            if (points[i].edge == points[j].edge) best = std::abs(oi - oj);
            const double to_i[2] = {oi, ei.length - oi};
            const std::size_t vi[2] = {ei.u, ei.v};
            const double to_j[2] = {oj, ej.length - oj};
            const std::size_t vj[2] = {ej.u, ej.v};
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    best = std::min(best, to_i[a] + vd(vi[a], vj[b]) + to_j[b]);
            d(i, j) = best;
            d(j, i) = best;
        }
    }
    return d;
}

// Discretization of a metric-graph Schroedinger operator: linear finite
// elements with lumped mass on a mesh of n_e = ceil(l_e / h) subintervals per
// edge. Kirchhoff and delta-type conditions emerge from the assembly at
// shared vertices; Dirichlet vertices are eliminated. Magnetic potentials
// enter as per-subinterval phase factors, producing a Hermitian pair.
struct GraphDiscretization {
    MetricGraph graph;
    OperatorDiscretization op; // reduced (Dirichlet rows/columns removed)
    SampledSpace space;        // matching the reduced points
    double target_h = 0.0;

    std::vector<std::size_t> edge_subdivisions; // n_e
    std::vector<double> edge_mesh;              // h_e = l_e / n_e
    std::vector<std::size_t> edge_interior_offset; // full index of first interior point

    // Full layout: vertices first, then edge-interior points in edge order.
    std::vector<std::ptrdiff_t> full_to_reduced; // -1 for eliminated points
    std::vector<std::size_t> reduced_to_full;

    std::size_t full_point_count() const { return full_to_reduced.size(); }

    std::size_t full_index(std::size_t edge, std::size_t sub) const {
        // sub in [0, n_e]: 0 is the u-end vertex, n_e the v-end vertex.
        const GraphEdge &e = graph.edges[edge];
        if (sub == 0) return e.u;
        if (sub == edge_subdivisions[edge]) return e.v;
        return edge_interior_offset[edge] + (sub - 1);
    }

    // Value of a reduced-space vector at a full point; eliminated Dirichlet
    // points carry the boundary value zero.
    double value_at_full(const std::vector<double> &f, std::size_t full) const {
        const std::ptrdiff_t r = full_to_reduced[full];
        return r < 0 ? 0.0 : f[static_cast<std::size_t>(r)];
    }
};

inline GraphDiscretization discretize_graph(const MetricGraph &g, double h) {
    g.validate();
    if (!(h > 0.0)) throw validation_error("discretize_graph: mesh size must be positive");

    GraphDiscretization disc;
    disc.graph = g;
    disc.target_h = h;

    const std::size_t nv = g.vertex_count();
    std::size_t total = nv;
    for (const auto &e : g.edges) {
        std::size_t ne = static_cast<std::size_t>(std::ceil(e.length / h));
        if (ne == 0) ne = 1;
        if (e.u == e.v && ne < 2) ne = 2; // a loop needs an interior point
        disc.edge_subdivisions.push_back(ne);
        disc.edge_mesh.push_back(e.length / static_cast<double>(ne));
        disc.edge_interior_offset.push_back(total);
        total += ne - 1;
    }
    if (total > matrix_dimension_cap) {
        throw capacity_error("discretize_graph: " + std::to_string(total) +
                             " points exceed cap " + std::to_string(matrix_dimension_cap));
    }

    const bool magnetic = g.has_magnetic_potential();
    DenseMatrix stiff(total, total);
    DenseMatrix stiff_im;
    if (magnetic) stiff_im = DenseMatrix(total, total);
    std::vector<double> mass(total, 0.0);

    for (std::size_t k = 0; k < g.edges.size(); ++k) {
        const GraphEdge &e = g.edges[k];
        const std::size_t ne = disc.edge_subdivisions[k];
        const double he = disc.edge_mesh[k];
        for (std::size_t s = 0; s < ne; ++s) {
            const std::size_t a = disc.full_index(k, s);
            const std::size_t b = disc.full_index(k, s + 1);
            const double x0 = static_cast<double>(s) * he;
            const double x1 = x0 + he;
            const double inv = 1.0 / he;
            mass[a] += 0.5 * he;
            mass[b] += 0.5 * he;
            stiff(a, a) += inv;
            stiff(b, b) += inv;
            if (magnetic) {
                // Peierls phase over the subinterval, midpoint rule.
                const double theta = e.magnetic.integrate(x0, x1, e.length);
                stiff(a, b) += -std::cos(theta) * inv;
                stiff(b, a) += -std::cos(theta) * inv;
                stiff_im(a, b) += std::sin(theta) * inv;
                stiff_im(b, a) += -std::sin(theta) * inv;
            } else {
                stiff(a, b) += -inv;
                stiff(b, a) += -inv;
            }
        }
        if (!e.electric.zero()) {
            // Lumped quadrature for the electric potential.
            for (std::size_t s = 0; s <= ne; ++s) {
                const std::size_t p = disc.full_index(k, s);
                const double x = static_cast<double>(s) * he;
                const double share = (s == 0 || s == ne) ? 0.5 * he : he;
                stiff(p, p) += e.electric.eval(x, e.length) * share;
            }
        }
    }
    for (const auto &[v, sigma] : g.delta_strengths) stiff(v, v) += sigma;

    // Reduced index maps (Dirichlet vertices eliminated).
    disc.full_to_reduced.assign(total, -1);
    for (std::size_t p = 0; p < total; ++p) {
        const bool eliminated = (p < nv) && g.dirichlet.count(p);
        if (!eliminated) {
            disc.full_to_reduced[p] = static_cast<std::ptrdiff_t>(disc.reduced_to_full.size());
            disc.reduced_to_full.push_back(p);
        }
    }
    const std::size_t nred = disc.reduced_to_full.size();

    disc.op.stiffness = DenseMatrix(nred, nred);
    if (magnetic) disc.op.stiffness_im = DenseMatrix(nred, nred);
    disc.op.mass_weights.resize(nred);
    disc.op.self_adjoint = true;
    disc.op.morrey_order_k = 1;
    for (std::size_t i = 0; i < nred; ++i) {
        const std::size_t fi = disc.reduced_to_full[i];
        disc.op.mass_weights[i] = mass[fi];
        for (std::size_t j = 0; j < nred; ++j) {
            const std::size_t fj = disc.reduced_to_full[j];
            disc.op.stiffness(i, j) = stiff(fi, fj);
            if (magnetic) (*disc.op.stiffness_im)(i, j) = stiff_im(fi, fj);
        }
    }

    // Sampled space: shortest-path metric over all retained points; shortest
    // paths may still pass through Dirichlet vertices.
    std::vector<GraphPoint> pts(total);
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
        const std::size_t ne = disc.edge_subdivisions[k];
        for (std::size_t s = 0; s <= ne; ++s) {
            pts[disc.full_index(k, s)] =
                GraphPoint{k, static_cast<double>(s) * disc.edge_mesh[k]};
        }
    }
    const DenseMatrix full_dist = graph_metric(g, pts);

    disc.space.point_ids.resize(nred);
    disc.space.weights.resize(nred);
    disc.space.dist = DenseMatrix(nred, nred);
    for (std::size_t i = 0; i < nred; ++i) {
        const std::size_t fi = disc.reduced_to_full[i];
        disc.space.point_ids[i] =
            fi < nv ? g.vertex_ids[fi] : ("e" + [&] {
                // edge index and interior slot for a stable readable id
                std::size_t k = 0;
                while (k + 1 < g.edges.size() && disc.edge_interior_offset[k + 1] <= fi) ++k;
                const std::size_t slot = fi - disc.edge_interior_offset[k] + 1;
                return std::to_string(k) + ":" + std::to_string(slot);
            }());
        disc.space.weights[i] = mass[fi];
        for (std::size_t j = 0; j < nred; ++j) {
            disc.space.dist(i, j) = full_dist(fi, disc.reduced_to_full[j]);
        }
    }
    return disc;
}

// One-sided derivatives at a vertex, oriented away from the vertex into each
// incident edge, estimated by second-order one-sided differences. flux_sum is
// their plain sum; for a delta-type vertex the relevant defect is
// flux_sum - sigma_v f(v).
struct KirchhoffDefect {
    double flux_sum = 0.0;
    std::vector<double> one_sided_derivatives;
    double delta_defect = 0.0; // flux_sum - sigma_v * f(v)
};

inline KirchhoffDefect kirchhoff_defect(const GraphDiscretization &disc,
                                        const std::vector<double> &f, std::size_t vertex) {
    const MetricGraph &g = disc.graph;
    if (vertex >= g.vertex_count()) throw domain_error("kirchhoff_defect: unknown vertex");
    if (g.dirichlet.count(vertex)) {
        throw domain_error("kirchhoff_defect: vertex " + g.vertex_ids[vertex] +
                           " is in the Dirichlet set");
    }
    if (f.size() != disc.reduced_to_full.size()) {
        throw dimension_error("kirchhoff_defect: vector length mismatch");
    }

    KirchhoffDefect result;
    const double fv = disc.value_at_full(f, vertex);
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
        const GraphEdge &e = g.edges[k];
        const std::size_t ne = disc.edge_subdivisions[k];
        const double he = disc.edge_mesh[k];
        // An edge can be incident twice (loop); handle each end separately.
        for (int end = 0; end < 2; ++end) {
            const bool from_u = (end == 0);
            if ((from_u ? e.u : e.v) != vertex) continue;
            auto point_at = [&](std::size_t steps) {
                return disc.full_index(k, from_u ? steps : ne - steps);
            };
            double deriv;
            if (ne >= 2) {
                const double f1 = disc.value_at_full(f, point_at(1));
                const double f2 = disc.value_at_full(f, point_at(2));
                deriv = (-3.0 * fv + 4.0 * f1 - f2) / (2.0 * he);
            } else {
                deriv = (disc.value_at_full(f, point_at(1)) - fv) / he;
            }
            result.one_sided_derivatives.push_back(deriv);
            result.flux_sum += deriv;
        }
    }
    result.delta_defect = result.flux_sum - g.sigma(vertex) * fv;
    return result;
}

// --- Ready-made graphs used across scenarios and tests ----------------------

inline MetricGraph make_interval_graph(bool dirichlet_ends) {
    MetricGraph g;
    g.vertex_ids = {"a", "b"};
    g.edges.push_back(GraphEdge{0, 1, 1.0, {}, {}});
    if (dirichlet_ends) g.dirichlet = {0, 1};
    return g;
}

inline MetricGraph make_star_graph(std::size_t arms, bool dirichlet_leaves) {
    MetricGraph g;
    g.vertex_ids.push_back("c");
    for (std::size_t a = 0; a < arms; ++a) {
        g.vertex_ids.push_back("l" + std::to_string(a));
        g.edges.push_back(GraphEdge{0, a + 1, 1.0, {}, {}});
        if (dirichlet_leaves) g.dirichlet.insert(a + 1);
    }
    return g;
}

} // namespace heatlab
