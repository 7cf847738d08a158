#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "heatlab/kernel.hpp"
#include "heatlab/metric_graph.hpp"
#include "oracle_helpers.hpp"

using namespace heatlab;

TEST_CASE("interval Dirichlet discretization reproduces the analytic spectrum") {
    const GraphDiscretization disc = discretize_graph(make_interval_graph(true), 1.0 / 100.0);
    REQUIRE(disc.op.size() == 99);
    const SpectralData spec = compute_spectrum(disc.op);
    for (int n = 1; n <= 5; ++n) {
        const double analytic = n * n * M_PI * M_PI;
        CHECK(std::abs(spec.eigenvalues[n - 1] - analytic) <= 0.005 * analytic);
    }
}

TEST_CASE("free interval has the constant kernel mode") {
    const GraphDiscretization disc = discretize_graph(make_interval_graph(false), 0.05);
    const SpectralData spec = compute_spectrum(disc.op);
    CHECK(std::abs(spec.eigenvalues[0]) <= 1e-10);
    // constant eigenvector
    const double first = spec.eigenvectors(0, 0);
    for (std::size_t i = 0; i < spec.points(); ++i)
        CHECK(spec.eigenvectors(i, 0) == Catch::Approx(first).margin(1e-9));
    // total length 1: the W-normalized constant is 1
    CHECK(std::abs(first) == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("3-star with Dirichlet leaves matches the secular-equation oracle") {
    const GraphDiscretization disc = discretize_graph(make_star_graph(3, true), 1.0 / 100.0);
    const SpectralData spec = compute_spectrum(disc.op);
    const std::vector<double> expected = oracle::star3_dirichlet_eigenvalues(6);
    for (std::size_t n = 0; n < expected.size(); ++n) {
        CHECK(std::abs(spec.eigenvalues[n] - expected[n]) <= 1e-3 * expected[n]);
    }
}

TEST_CASE("constant electric potential shifts the spectrum exactly") {
    MetricGraph g = make_interval_graph(true);
    const SpectralData base = compute_spectrum(discretize_graph(g, 0.02).op);
    g.edges[0].electric.samples = {2.5};
    const SpectralData shifted = compute_spectrum(discretize_graph(g, 0.02).op);
    for (std::size_t n = 0; n < 5; ++n)
        CHECK(shifted.eigenvalues[n] ==
              Catch::Approx(base.eigenvalues[n] + 2.5).margin(1e-8 * (1.0 + base.eigenvalues[n])));
}

TEST_CASE("stiffness invariants") {
    SECTION("positive semi-definite for q >= 0, sigma >= 0") {
        MetricGraph g = make_star_graph(3, false);
        g.edges[1].electric.samples = {0.5, 1.5, 0.2};
        g.delta_strengths[0] = 0.7;
        const GraphDiscretization disc = discretize_graph(g, 0.1);
        const EigenDecomposition d = symmetric_eigen(disc.op.stiffness);
        CHECK(d.eigenvalues.front() >= -1e-9 * disc.op.stiffness.max_abs());
    }
    SECTION("constants in the kernel without Dirichlet, potentials, or strengths") {
        const GraphDiscretization disc = discretize_graph(make_star_graph(4, false), 0.07);
        const std::size_t n = disc.op.size();
        for (std::size_t i = 0; i < n; ++i) {
            double row_sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) row_sum += disc.op.stiffness(i, j);
            CHECK(std::abs(row_sum) <= 1e-12);
        }
    }
}

TEST_CASE("mesh refinement converges at second order on the interval spectrum") {
    const double analytic = M_PI * M_PI;
    auto lowest = [](double h) {
        return compute_spectrum(discretize_graph(make_interval_graph(true), h).op)
            .eigenvalues.front();
    };
    const double err_h = std::abs(lowest(1.0 / 20.0) - analytic);
    const double err_h2 = std::abs(lowest(1.0 / 40.0) - analytic);
    const double ratio = err_h / err_h2;
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
}

TEST_CASE("magnetic potential is gauge-removable on trees") {
    MetricGraph g = make_star_graph(3, true);
    const double h = 0.1;
    const SpectralData plain = compute_spectrum(discretize_graph(g, h).op);

    g.edges[0].magnetic.samples = {2.0};
    g.edges[1].magnetic.samples = {1.5, 0.5};
    g.edges[2].magnetic.samples = {-1.0};
    const GraphDiscretization magnetic = discretize_graph(g, h);
    REQUIRE(magnetic.op.magnetic());
    const EigenDecomposition embedded =
        hermitian_embed_eigen([&] {
            // mass-normalized Hermitian pair W^{-1/2} S W^{-1/2}
            const std::size_t n = magnetic.op.size();
            DenseMatrix re(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    re(i, j) = magnetic.op.stiffness(i, j) /
                               std::sqrt(magnetic.op.mass_weights[i] * magnetic.op.mass_weights[j]);
            return re;
        }(), [&] {
            const std::size_t n = magnetic.op.size();
            DenseMatrix im(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    im(i, j) = (*magnetic.op.stiffness_im)(i, j) /
                               std::sqrt(magnetic.op.mass_weights[i] * magnetic.op.mass_weights[j]);
            return im;
        }());
    REQUIRE(embedded.eigenvalues.size() == 2 * plain.modes());
    for (std::size_t n = 0; n < plain.modes(); ++n) {
        const double scale = 1.0 + std::abs(plain.eigenvalues[n]);
        CHECK(std::abs(embedded.eigenvalues[2 * n] - plain.eigenvalues[n]) <= 1e-8 * scale);
        CHECK(std::abs(embedded.eigenvalues[2 * n + 1] - plain.eigenvalues[n]) <= 1e-8 * scale);
    }
}

TEST_CASE("graph_metric distances") {
    SECTION("two points on one edge") {
        const MetricGraph g = make_interval_graph(false);
        const DenseMatrix d = graph_metric(g, {{0, 0.2}, {0, 0.9}});
        CHECK(d(0, 1) == Catch::Approx(0.7).margin(1e-15));
    }
    SECTION("opposite leaf tips of a 3-star") {
        const MetricGraph g = make_star_graph(3, false);
        const DenseMatrix d = graph_metric(g, {{0, 1.0}, {1, 1.0}});
        CHECK(d(0, 1) == Catch::Approx(2.0).margin(1e-15));
    }
    SECTION("triangle midpoints: two half-edges beat the long way around") {
        MetricGraph g;
        g.vertex_ids = {"a", "b", "c"};
        g.edges.push_back(GraphEdge{0, 1, 1.0, {}, {}});
        g.edges.push_back(GraphEdge{1, 2, 1.0, {}, {}});
        g.edges.push_back(GraphEdge{0, 2, 1.0, {}, {}});
        // simple-path enumeration between the midpoints of ab and bc:
        // via b: 0.5 + 0.5; via a then c: 0.5 + 1 + 0.5
        const double enumerated = std::min(0.5 + 0.5, 0.5 + 1.0 + 0.5);
        const DenseMatrix d = graph_metric(g, {{0, 0.5}, {1, 0.5}});
        CHECK(d(0, 1) == Catch::Approx(enumerated).margin(1e-15));
    }
}

TEST_CASE("discretized space carries the shortest-path metric and lumped masses") {
    const GraphDiscretization disc = discretize_graph(make_star_graph(3, false), 0.25);
    const SampledSpace &s = disc.space;
    // center has weight 3 * h/2, interior points h
    const double h = disc.edge_mesh[0];
    CHECK(s.weights[0] == Catch::Approx(1.5 * h).margin(1e-15));
    CHECK(s.total_weight() == Catch::Approx(3.0).margin(1e-12));
    s.validate();
    s.check_triangle_inequality(1e-12);
}

TEST_CASE("kirchhoff_defect") {
    SECTION("constant function at a standard vertex has zero flux") {
        const GraphDiscretization disc = discretize_graph(make_star_graph(3, false), 0.05);
        const std::vector<double> f(disc.op.size(), 4.2);
        const KirchhoffDefect defect = kirchhoff_defect(disc, f, 0);
        REQUIRE(defect.one_sided_derivatives.size() == 3);
        CHECK(std::abs(defect.flux_sum) <= 1e-12);
        for (double d : defect.one_sided_derivatives) CHECK(std::abs(d) <= 1e-12);
    }
    SECTION("Dirichlet vertex is out of domain") {
        const GraphDiscretization disc = discretize_graph(make_star_graph(3, true), 0.05);
        const std::vector<double> f(disc.op.size(), 0.0);
        CHECK_THROWS_AS(kirchhoff_defect(disc, f, 1), domain_error);
    }
    SECTION("delta-type defect of eigenvectors vanishes under refinement") {
        MetricGraph g = make_interval_graph(false);
        g.dirichlet = {1};
        g.delta_strengths[0] = 1.0;
        auto defect_at = [&](double h) {
            const GraphDiscretization disc = discretize_graph(g, h);
            const SpectralData spec = compute_spectrum(disc.op);
            const std::vector<double> phi = [&] {
                std::vector<double> v(spec.points());
                for (std::size_t i = 0; i < v.size(); ++i) v[i] = spec.eigenvectors(i, 0);
                return v;
            }();
            return std::abs(kirchhoff_defect(disc, phi, 0).delta_defect);
        };
        const double coarse = defect_at(0.02);
        const double fine = defect_at(0.01);
        CHECK(fine < coarse);
        CHECK(fine <= 1e-3);
    }
}

TEST_CASE("graph validation errors") {
    SECTION("disconnected") {
        MetricGraph g;
        g.vertex_ids = {"a", "b", "c", "d"};
        g.edges.push_back(GraphEdge{0, 1, 1.0, {}, {}});
        g.edges.push_back(GraphEdge{2, 3, 1.0, {}, {}});
        CHECK_THROWS_AS(g.validate(), validation_error);
    }
    SECTION("nonpositive length") {
        MetricGraph g;
        g.vertex_ids = {"a", "b"};
        g.edges.push_back(GraphEdge{0, 1, 0.0, {}, {}});
        CHECK_THROWS_AS(discretize_graph(g, 0.1), validation_error);
    }
    SECTION("delta strength on a Dirichlet vertex") {
        MetricGraph g = make_interval_graph(true);
        g.delta_strengths[0] = 1.0;
        CHECK_THROWS_AS(g.validate(), validation_error);
    }
    SECTION("capacity") {
        CHECK_THROWS_AS(discretize_graph(make_interval_graph(true), 1e-5), capacity_error);
    }
}

TEST_CASE("edge function sampling") {
    EdgeFunction f;
    f.samples = {1.0, 3.0, 2.0};
    CHECK(f.eval(0.0, 2.0) == 1.0);
    CHECK(f.eval(1.0, 2.0) == 3.0);  // midpoint sample
    CHECK(f.eval(2.0, 2.0) == 2.0);
    CHECK(f.eval(0.5, 2.0) == Catch::Approx(2.0)); // halfway to the middle sample
}
