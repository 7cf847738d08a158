#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "heatlab/io.hpp"
#include "heatlab/operator.hpp"
#include "heatlab/space.hpp"
#include "oracle_helpers.hpp"

using namespace heatlab;

namespace {

SampledSpace one_point_space(const std::string &id, double weight = 1.0) {
    SampledSpace s;
    s.point_ids = {id};
    s.coordinates = {std::nullopt};
    s.dist = DenseMatrix(1, 1);
    s.weights = {weight};
    return s;
}

} // namespace

TEST_CASE("disjoint_union separates copies at infinite distance") {
    const SampledSpace u = disjoint_union(one_point_space("p"), one_point_space("q"));
    REQUIRE(u.size() == 2);
    CHECK(std::isinf(u.dist(0, 1)));
    CHECK(u.dist(0, 0) == 0.0);
    CHECK(u.weights[0] == 1.0);
    CHECK(u.weights[1] == 1.0);
}

TEST_CASE("disjoint_union with the empty space is the identity") {
    const SampledSpace a = make_unit_interval_space(5);
    const SampledSpace u = disjoint_union(a, SampledSpace{});
    REQUIRE(u.size() == a.size());
    CHECK(u.point_ids == a.point_ids);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) CHECK(u.dist(i, j) == a.dist(i, j));
    CHECK(u.weights == a.weights);
}

TEST_CASE("disjoint_union preserves within-copy distances and renames collisions") {
    const SampledSpace a = make_unit_interval_space(4);
    const SampledSpace u = disjoint_union(a, a);
    REQUIRE(u.size() == 8);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(u.point_ids[4 + i] == a.point_ids[i] + "'");
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(u.dist(i, j) == a.dist(i, j));
            CHECK(u.dist(4 + i, 4 + j) == a.dist(i, j));
            CHECK(std::isinf(u.dist(i, 4 + j)));
        }
    }
}

TEST_CASE("disjoint_union seminorm is the max of the within-copy seminorms") {
    const SampledSpace a = make_unit_interval_space(20);
    const SampledSpace u = disjoint_union(a, a);
    std::vector<double> f(40);
    for (std::size_t i = 0; i < 20; ++i) {
        const double x = static_cast<double>(i) / 19.0;
        f[i] = x;            // Lipschitz constant 1 on copy 1
        f[20 + i] = 3.0 * x; // Lipschitz constant 3 on copy 2
    }
    const double s1 = hoelder_seminorm(a, std::vector<double>(f.begin(), f.begin() + 20), 1.0);
    const double s2 = hoelder_seminorm(a, std::vector<double>(f.begin() + 20, f.end()), 1.0);
    const double joint = hoelder_seminorm(u, f, 1.0);
    CHECK(joint == std::max(s1, s2));
}

TEST_CASE("product_sum_metric small cases") {
    SECTION("single point") {
        const SampledSpace p = product_sum_metric(one_point_space("p"));
        REQUIRE(p.size() == 1);
        CHECK(p.dist(0, 0) == 0.0);
    }
    SECTION("two points at distance one") {
        SampledSpace s;
        s.point_ids = {"0", "1"};
        s.coordinates = {std::nullopt, std::nullopt};
        s.dist = DenseMatrix(2, 2);
        s.dist(0, 1) = 1.0;
        s.dist(1, 0) = 1.0;
        s.weights = {1.0, 1.0};
        const SampledSpace p = product_sum_metric(s);
        REQUIRE(p.size() == 4);
        // (0,0) is index 0, (1,1) is index 3
        CHECK(p.dist(0, 3) == 2.0);
        CHECK(p.dist(0, 1) == 1.0);
    }
    SECTION("slice isometry") {
        const SampledSpace s = make_unit_interval_space(6);
        const SampledSpace p = product_sum_metric(s);
        for (std::size_t x = 0; x < 6; ++x)
            for (std::size_t xp = 0; xp < 6; ++xp)
                CHECK(p.dist(x * 6 + 2, xp * 6 + 2) == s.dist(x, xp));
    }
}

TEST_CASE("product_sum_metric satisfies the triangle inequality") {
    const SampledSpace s = make_unit_interval_space(7);
    const SampledSpace p = product_sum_metric(s);
    p.check_triangle_inequality(1e-12);
}

TEST_CASE("product_sum_metric enforces the capacity cap") {
    CHECK_THROWS_AS(product_sum_metric(make_unit_interval_space(100)), capacity_error);
}

TEST_CASE("hoelder_seminorm pinned cases") {
    const SampledSpace s = make_unit_interval_space(101);
    SECTION("constant function") {
        CHECK(hoelder_seminorm(s, std::vector<double>(101, 3.5), 1.0) == 0.0);
    }
    SECTION("linear function, alpha = 1") {
        std::vector<double> f(101);
        for (std::size_t i = 0; i < 101; ++i) f[i] = static_cast<double>(i) / 100.0;
        CHECK(hoelder_seminorm(s, f, 1.0) == Catch::Approx(1.0).epsilon(1e-12));
    }
    SECTION("square root, alpha = 1/2, envelope attained at x = 0") {
        std::vector<double> f(101);
        for (std::size_t i = 0; i < 101; ++i) f[i] = std::sqrt(static_cast<double>(i) / 100.0);
        CHECK(hoelder_seminorm(s, f, 0.5) == Catch::Approx(1.0).epsilon(1e-10));
    }
    SECTION("alpha outside (0,1] rejected") {
        CHECK_THROWS_AS(hoelder_seminorm(s, std::vector<double>(101, 0.0), 0.0), domain_error);
        CHECK_THROWS_AS(hoelder_seminorm(s, std::vector<double>(101, 0.0), 1.5), domain_error);
    }
}

TEST_CASE("hoelder_seminorm needs at least one usable pair") {
    CHECK_THROWS_AS(hoelder_seminorm(one_point_space("p"), {1.0}, 1.0), domain_error);
}

TEST_CASE("hoelder_seminorm ignores infinite pairs and reports zero-distance ones") {
    SampledSpace s;
    s.point_ids = {"a", "b", "c"};
    s.coordinates.assign(3, std::nullopt);
    s.dist = DenseMatrix(3, 3);
    s.dist(0, 1) = infinite_distance;
    s.dist(1, 0) = infinite_distance;
    s.dist(0, 2) = 1.0;
    s.dist(2, 0) = 1.0;
    s.dist(1, 2) = 0.0; // distinct ids at distance zero: excluded, diagnosed
    s.dist(2, 1) = 0.0;
    s.weights = {1.0, 1.0, 1.0};
    SeminormDiagnostic diag;
    const double sup = hoelder_seminorm(s, {0.0, 9.0, 2.0}, 1.0, &diag);
    CHECK(sup == 2.0); // only the (a, c) pair counts
    CHECK(diag.infinite_pairs == 1);
    CHECK(diag.zero_distance_pairs == 1);
    CHECK(diag.worst_zero_distance_gap == 7.0);
}

TEST_CASE("hoelder_seminorm is monotone under refinement") {
    const SampledSpace fine = make_unit_interval_space(64);
    std::vector<double> f(64);
    for (std::size_t i = 0; i < 64; ++i) {
        const double x = static_cast<double>(i) / 63.0;
        f[i] = std::sin(5.0 * x) + 0.3 * std::sqrt(x);
    }
    // Coarse subset: every fourth point.
    SampledSpace coarse;
    std::vector<double> g;
    for (std::size_t i = 0; i < 64; i += 4) {
        coarse.point_ids.push_back(fine.point_ids[i]);
        coarse.weights.push_back(fine.weights[i]);
        g.push_back(f[i]);
    }
    coarse.dist = DenseMatrix(coarse.point_ids.size(), coarse.point_ids.size());
    for (std::size_t a = 0, i = 0; i < 64; i += 4, ++a)
        for (std::size_t b = 0, j = 0; j < 64; j += 4, ++b) coarse.dist(a, b) = fine.dist(i, j);
    for (double alpha : {0.3, 0.5, 1.0}) {
        CHECK(hoelder_seminorm(coarse, g, alpha) <= hoelder_seminorm(fine, f, alpha));
    }
}

TEST_CASE("estimate_exponent recovers synthetic slopes") {
    const SampledSpace s = make_unit_interval_space(500);
    const double cutoff = default_exponent_cutoff(s);
    SECTION("linear profile fits slope 1") {
        std::vector<double> f(500);
        for (std::size_t i = 0; i < 500; ++i) f[i] = static_cast<double>(i) / 499.0;
        const HoelderEstimate est = estimate_exponent(s, f, cutoff);
        REQUIRE(est.exponent_defined);
        CHECK(est.fitted_exponent >= 0.98);
        CHECK(est.fitted_exponent <= 1.02);
        CHECK(est.bins_used >= 3);
    }
    SECTION("square-root profile fits slope 1/2") {
        std::vector<double> f(500);
        for (std::size_t i = 0; i < 500; ++i) f[i] = std::sqrt(static_cast<double>(i) / 499.0);
        const HoelderEstimate est = estimate_exponent(s, f, cutoff);
        REQUIRE(est.exponent_defined);
        CHECK(est.fitted_exponent >= 0.48);
        CHECK(est.fitted_exponent <= 0.52);
    }
    SECTION("constant profile reports an undefined exponent and zero seminorm") {
        const HoelderEstimate est = estimate_exponent(s, std::vector<double>(500, 2.0), cutoff);
        CHECK_FALSE(est.exponent_defined);
        CHECK(std::isnan(est.fitted_exponent));
        CHECK(est.seminorm_at_alpha == 0.0);
    }
    SECTION("insufficient bins produce a fit error naming the count") {
        const SampledSpace tiny = make_unit_interval_space(2);
        std::vector<double> f{0.0, 1.0};
        try {
            estimate_exponent(tiny, f, default_exponent_cutoff(tiny));
            FAIL("expected fit_error");
        } catch (const fit_error &e) {
            CHECK(std::string(e.what()).find("bins") != std::string::npos);
        }
    }
}

TEST_CASE("norm_distance pinned cases") {
    const SampledSpace s = make_unit_interval_space(10);
    std::vector<double> f(10, 0.5), g(10, 0.5);
    SECTION("identical vectors") {
        CHECK(norm_distance(s, NormSpec::lr(2.0), f, g) == 0.0);
        CHECK(norm_distance(s, NormSpec::sup(), f, g) == 0.0);
    }
    SECTION("all-ones difference, uniform weights 1/n, r = 2") {
        for (double &v : g) v -= 1.0;
        CHECK(norm_distance(s, NormSpec::lr(2.0), f, g) == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(norm_distance(s, NormSpec::sup(), f, g) == Catch::Approx(1.0).epsilon(1e-12));
    }
    SECTION("graph norm with a zero operator reduces to the plain norm") {
        OperatorDiscretization zero_op;
        zero_op.stiffness = DenseMatrix(10, 10);
        zero_op.mass_weights = s.weights;
        for (double &v : g) v -= 2.0;
        CHECK(norm_distance(s, NormSpec::graph(zero_op), f, g) ==
              Catch::Approx(norm_distance(s, NormSpec::lr(2.0), f, g)).epsilon(1e-13));
    }
    SECTION("length mismatch") {
        CHECK_THROWS_AS(norm_distance(s, NormSpec::lr(2.0), f, std::vector<double>(3, 0.0)),
                        dimension_error);
    }
}

TEST_CASE("norm_distance r=2 satisfies the parallelogram identity") {
    oracle::Rng rng(31337);
    const SampledSpace s = make_unit_interval_space(16);
    std::vector<double> f(16), g(16), zero(16, 0.0);
    for (std::size_t i = 0; i < 16; ++i) {
        f[i] = rng.uniform(-1.0, 1.0);
        g[i] = rng.uniform(-1.0, 1.0);
    }
    std::vector<double> sum(16), diff(16);
    for (std::size_t i = 0; i < 16; ++i) {
        sum[i] = f[i] + g[i];
        diff[i] = f[i] - g[i];
    }
    const NormSpec l2 = NormSpec::lr(2.0);
    const double lhs = std::pow(norm_distance(s, l2, sum, zero), 2) +
                       std::pow(norm_distance(s, l2, diff, zero), 2);
    const double rhs = 2.0 * std::pow(norm_distance(s, l2, f, zero), 2) +
                       2.0 * std::pow(norm_distance(s, l2, g, zero), 2);
    CHECK(lhs == Catch::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("SampledSpace JSON round trip is bit-exact") {
    SampledSpace s = make_unit_interval_space(9);
    // introduce awkward values: an infinite pair and irrational weights
    s.dist(2, 7) = infinite_distance;
    s.dist(7, 2) = infinite_distance;
    s.weights[3] = std::sqrt(2.0) / 3.0;
    s.weights[4] = 0.1; // not exactly representable; must still round-trip

    const json j = space_to_json(s);
    const std::string text = j.dump();
    const SampledSpace back = space_from_json(json::parse(text));

    REQUIRE(back.size() == s.size());
    CHECK(back.point_ids == s.point_ids);
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(back.weights[i] == s.weights[i]); // exact equality
        REQUIRE(back.coordinates[i].has_value());
        CHECK((*back.coordinates[i])[0] == (*s.coordinates[i])[0]);
        for (std::size_t jdx = 0; jdx < s.size(); ++jdx) {
            if (std::isinf(s.dist(i, jdx))) CHECK(std::isinf(back.dist(i, jdx)));
            else CHECK(back.dist(i, jdx) == s.dist(i, jdx));
        }
    }
    // serializing again yields the identical document
    CHECK(space_to_json(back).dump() == text);
}

TEST_CASE("space JSON schema errors name the offending field") {
    json j;
    j["points"] = json::array({json{{"id", "a"}}});
    j["dist"] = json::array({0.0});
    // weights missing
    try {
        space_from_json(j);
        FAIL("expected schema_error");
    } catch (const schema_error &e) {
        CHECK(std::string(e.what()).find("weights") != std::string::npos);
    }
}
