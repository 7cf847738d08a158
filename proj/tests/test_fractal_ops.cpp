#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "heatlab/gasket.hpp"
#include "heatlab/kernel.hpp"
#include "heatlab/linalg.hpp"

using namespace heatlab;

TEST_CASE("level-0 gasket is the unit triangle") {
    const GasketBuild b = build_gasket(0);
    CHECK(b.gasket.vertex_count() == 3);
    CHECK(b.gasket.cells.size() == 1);
    CHECK(b.gasket.graph_edges.size() == 3);
    CHECK(b.gasket.conductance == 1.0);
    for (double w : b.op.mass_weights) CHECK(w == Catch::Approx(1.0 / 3.0).margin(1e-15));
}

TEST_CASE("level-1 gasket enumeration") {
    const GasketBuild b = build_gasket(1);
    CHECK(b.gasket.vertex_count() == 6);
    CHECK(b.gasket.cells.size() == 3);
    CHECK(b.gasket.graph_edges.size() == 9);
    CHECK(b.gasket.conductance == Catch::Approx(5.0 / 3.0).margin(1e-15));
    // corners belong to one cell, junctions to two
    std::vector<int> cell_count(6, 0);
    for (const auto &cell : b.gasket.cells)
        for (std::size_t v : cell) ++cell_count[v];
    int corners = 0, junctions = 0;
    for (std::size_t v = 0; v < 6; ++v) {
        if (cell_count[v] == 1) {
            ++corners;
            CHECK(b.op.mass_weights[v] == Catch::Approx(1.0 / 9.0).margin(1e-15));
        } else {
            ++junctions;
            CHECK(cell_count[v] == 2);
            CHECK(b.op.mass_weights[v] == Catch::Approx(2.0 / 9.0).margin(1e-15));
        }
    }
    CHECK(corners == 3);
    CHECK(junctions == 3);
}

TEST_CASE("vertex count follows 3(3^m + 1)/2") {
    CHECK(build_gasket_graph(3).vertex_count() == 42);
    for (int m = 0; m <= 4; ++m) {
        const std::size_t expected =
            3 * (static_cast<std::size_t>(std::pow(3, m)) + 1) / 2;
        CHECK(build_gasket_graph(m).vertex_count() == expected);
        CHECK(build_gasket_graph(m).cells.size() ==
              static_cast<std::size_t>(std::pow(3, m)));
    }
}

TEST_CASE("junction vertices belong to exactly two cells at every level") {
    const GasketApproximation g = build_gasket_graph(3);
    std::vector<int> cell_count(g.vertex_count(), 0);
    for (const auto &cell : g.cells)
        for (std::size_t v : cell) ++cell_count[v];
    const std::set<std::size_t> corner_set(g.corner_ids.begin(), g.corner_ids.end());
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        if (corner_set.count(v)) CHECK(cell_count[v] == 1);
        else CHECK(cell_count[v] == 2);
    }
}

TEST_CASE("gasket level capacity") {
    CHECK_THROWS_AS(build_gasket_graph(8), capacity_error);
}

TEST_CASE("effective resistance") {
    SECTION("single resistor network gives 1/c") {
        GasketApproximation tiny;
        tiny.level = 0;
        tiny.lattice = {{0, 0}, {1, 0}};
        tiny.coordinates = {{0.0, 0.0}, {1.0, 0.0}};
        tiny.graph_edges = {{0, 1}};
        tiny.conductance = 2.0;
        CHECK(effective_resistance(tiny, 0, 1) == Catch::Approx(0.5).epsilon(1e-12));
    }
    SECTION("level 0: series-parallel 1 || (1 + 1) = 2/3") {
        const GasketApproximation g = build_gasket_graph(0);
        const double series_parallel = (1.0 * 2.0) / (1.0 + 2.0);
        CHECK(effective_resistance(g, g.corner_ids[0], g.corner_ids[1]) ==
              Catch::Approx(series_parallel).epsilon(1e-12));
    }
    SECTION("x = y returns zero") {
        const GasketApproximation g = build_gasket_graph(1);
        CHECK(effective_resistance(g, 0, 0) == 0.0);
    }
    SECTION("corner-to-corner resistance is level-independent") {
        for (int m = 0; m <= 4; ++m) {
            const GasketApproximation g = build_gasket_graph(m);
            for (int a = 0; a < 3; ++a)
                for (int b = a + 1; b < 3; ++b) {
                    const double r =
                        effective_resistance(g, g.corner_ids[a], g.corner_ids[b]);
                    CHECK(std::abs(r - 2.0 / 3.0) <= 1e-9);
                }
        }
    }
}

TEST_CASE("resistance table is a metric and matches the pairwise solves") {
    const GasketBuild b = build_gasket(2);
    const GasketApproximation &g = b.gasket;
    const DenseMatrix &table = b.resistance_space.dist;
    // symmetry and zero diagonal via validate, triangle inequality explicitly
    b.resistance_space.validate();
    b.resistance_space.check_triangle_inequality(1e-10);
    // spot-check against the grounded single-pair solver
    for (const auto pair : {std::pair<std::size_t, std::size_t>{0, 5},
                            {1, 7},
                            {g.corner_ids[0], g.corner_ids[2]}}) {
        CHECK(table(pair.first, pair.second) ==
              Catch::Approx(effective_resistance(g, pair.first, pair.second)).epsilon(1e-11));
    }
}

TEST_CASE("total measure is one") {
    for (int m = 0; m <= 5; ++m) {
        const std::vector<double> w = gasket_measure(build_gasket_graph(m));
        double total = 0.0;
        for (double x : w) total += x;
        CHECK(std::abs(total - 1.0) <= 1e-14);
    }
}

TEST_CASE("trace of the refined form reproduces the coarse form") {
    // The defining property of the 5/3 renormalization: eliminating the new
    // vertices of level m+1 by Schur complement returns the level-m matrix.
    for (int m = 0; m <= 2; ++m) {
        const GasketApproximation coarse = build_gasket_graph(m);
        const GasketApproximation fine = build_gasket_graph(m + 1);

        // match coarse lattice points (a, b) to fine points (2a, 2b)
        std::vector<std::size_t> coarse_in_fine(coarse.vertex_count());
        for (std::size_t v = 0; v < coarse.vertex_count(); ++v) {
            const std::array<long, 2> target{coarse.lattice[v][0] * 2,
                                             coarse.lattice[v][1] * 2};
            bool found = false;
            for (std::size_t w = 0; w < fine.vertex_count(); ++w) {
                if (fine.lattice[w] == target) {
                    coarse_in_fine[v] = w;
                    found = true;
                    break;
                }
            }
            REQUIRE(found);
        }

        const DenseMatrix l_coarse = gasket_laplacian(coarse);
        const DenseMatrix l_fine = gasket_laplacian(fine);
        std::vector<char> is_old(fine.vertex_count(), 0);
        for (std::size_t w : coarse_in_fine) is_old[w] = 1;
        std::vector<std::size_t> new_vertices;
        for (std::size_t w = 0; w < fine.vertex_count(); ++w)
            if (!is_old[w]) new_vertices.push_back(w);

        const std::size_t na = coarse.vertex_count();
        const std::size_t nb = new_vertices.size();
        DenseMatrix laa(na, na), lab(na, nb), lbb(nb, nb);
        for (std::size_t i = 0; i < na; ++i)
            for (std::size_t j = 0; j < na; ++j)
                laa(i, j) = l_fine(coarse_in_fine[i], coarse_in_fine[j]);
        for (std::size_t i = 0; i < na; ++i)
            for (std::size_t j = 0; j < nb; ++j)
                lab(i, j) = l_fine(coarse_in_fine[i], new_vertices[j]);
        for (std::size_t i = 0; i < nb; ++i)
            for (std::size_t j = 0; j < nb; ++j)
                lbb(i, j) = l_fine(new_vertices[i], new_vertices[j]);

        const CholeskyFactor chol(lbb);
        DenseMatrix lbb_inv_lba(nb, na);
        std::vector<double> col(nb);
        for (std::size_t j = 0; j < na; ++j) {
            for (std::size_t i = 0; i < nb; ++i) col[i] = lab(j, i);
            const std::vector<double> x = chol.solve(col);
            for (std::size_t i = 0; i < nb; ++i) lbb_inv_lba(i, j) = x[i];
        }
        const DenseMatrix schur = laa - lab * lbb_inv_lba;
        for (std::size_t i = 0; i < na; ++i)
            for (std::size_t j = 0; j < na; ++j)
                CHECK(std::abs(schur(i, j) - l_coarse(i, j)) <= 1e-9);
    }
}

TEST_CASE("heat-kernel column exponents in the two metrics") {
    const GasketBuild b = build_gasket(5);
    const SpectralData spec = compute_spectrum(b.op);
    const KernelMatrix k = heat_kernel(spec, 0.1);
    const std::vector<double> column = [&] {
        std::vector<double> f(spec.points());
        const std::size_t y0 = b.gasket.corner_ids[0];
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = k.values(i, y0);
        return f;
    }();
    const auto [resistance_est, euclidean_est] = resistance_vs_euclidean_scan(b, column);
    REQUIRE(resistance_est.exponent_defined);
    REQUIRE(euclidean_est.exponent_defined);
    CHECK(resistance_est.fitted_exponent >= 0.4);
    CHECK(resistance_est.fitted_exponent <= 0.6);
    CHECK(euclidean_est.fitted_exponent >= 0.63);
    CHECK(euclidean_est.fitted_exponent <= 0.84);
}

TEST_CASE("constant function has zero seminorm in both metrics") {
    const GasketBuild b = build_gasket(3);
    const std::vector<double> f(b.gasket.vertex_count(), 1.23);
    CHECK(hoelder_seminorm(b.resistance_space, f, 0.5) == 0.0);
    CHECK(hoelder_seminorm(b.euclidean_space, f, 0.5) == 0.0);
}
