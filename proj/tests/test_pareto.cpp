#include <catch2/catch_amalgamated.hpp>

#include "fairhpo/pareto.hpp"

using namespace fairhpo;

TEST_CASE("dominance relation", "[pareto]") {
    REQUIRE(dominates({0.1, 0.2}, {0.2, 0.3}));
    REQUIRE_FALSE(dominates({0.1, 0.2}, {0.1, 0.2}));
    REQUIRE_FALSE(dominates({0.1, 0.4}, {0.2, 0.3}));
    REQUIRE_FALSE(dominates({0.2, 0.3}, {0.1, 0.2}));
    REQUIRE_THROWS_AS(dominates({0.1}, {0.1, 0.2}), ValidationError);
    // epsilon slack: equal-within-eps coordinates do not block dominance
    REQUIRE(dominates({0.1, 0.2 + 5e-10}, {0.2, 0.2}));
}

TEST_CASE("archive basics", "[pareto]") {
    ParetoArchive a(10);
    ArchiveEntry e1{{0.5, 0.5}, 1, 10, 0};
    REQUIRE(a.update(e1));
    REQUIRE(a.entries().size() == 1);

    SECTION("re-inserting is a no-op") {
        REQUIRE_FALSE(a.update(e1));
        REQUIRE(a.entries().size() == 1);
    }
    SECTION("dominated candidate rejected") {
        REQUIRE_FALSE(a.update({{0.6, 0.6}, 2, 10, 1}));
        REQUIRE(a.entries().size() == 1);
    }
    SECTION("dominating candidate evicts") {
        REQUIRE(a.update({{0.4, 0.4}, 2, 10, 1}));
        REQUIRE(a.entries().size() == 1);
        REQUIRE(a.entries()[0].config_hash == 2);
    }
    SECTION("incomparable candidates coexist") {
        REQUIRE(a.update({{0.4, 0.6}, 2, 10, 1}));
        REQUIRE(a.update({{0.6, 0.4}, 3, 10, 2}));
        REQUIRE(a.entries().size() == 3);
        REQUIRE(a.consistent());
    }
    SECTION("wrong budget rejected") {
        REQUIRE_THROWS_AS(a.update({{0.1, 0.1}, 4, 3, 5}), ValidationError);
    }
}

TEST_CASE("archive equals brute-force nondominated filter", "[pareto]") {
    Rng rng(42);
    for (int cloud = 0; cloud < 25; ++cloud) {
        std::vector<std::vector<double>> pts;
        ParetoArchive a(10);
        for (int i = 0; i < 200; ++i) {
            std::vector<double> p{rng.uniform(), rng.uniform()};
            pts.push_back(p);
            a.update({p, static_cast<uint64_t>(i), 10, static_cast<size_t>(i)});
            REQUIRE(a.consistent());
        }
        auto keep = nondominated_indices(pts);
        REQUIRE(a.entries().size() == keep.size());
        for (size_t k : keep) {
            bool found = false;
            for (const auto& e : a.entries())
                if (e.objectives == pts[k]) found = true;
            REQUIRE(found);
        }
    }
}

TEST_CASE("hypervolume hand values", "[pareto]") {
    REQUIRE(hypervolume2d({{0.2, 0.2}}, {1.0, 1.0}) == Catch::Approx(0.64).margin(1e-12));
    REQUIRE(hypervolume2d({{0.1, 0.5}, {0.5, 0.1}}, {1.0, 1.0}) ==
            Catch::Approx(0.65).margin(1e-12));
    REQUIRE(hypervolume2d({}, {1.0, 1.0}) == 0.0);
    REQUIRE_THROWS_AS(hypervolume2d({{1.5, 0.2}}, {1.0, 1.0}), ValidationError);
    // dominated points add nothing
    REQUIRE(hypervolume2d({{0.2, 0.2}, {0.5, 0.5}}, {1.0, 1.0}) ==
            Catch::Approx(0.64).margin(1e-12));
}
