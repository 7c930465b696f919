#include <catch2/catch_amalgamated.hpp>

#include "fairhpo/common.hpp"

using namespace fairhpo;

TEST_CASE("rng streams are deterministic and seed-separated", "[common]") {
    Rng a(1), b(1), c(2);
    for (int i = 0; i < 100; ++i) {
        uint64_t va = a.u64();
        REQUIRE(va == b.u64());
    }
    bool differs = false;
    Rng a2(1);
    for (int i = 0; i < 100; ++i)
        if (a2.u64() != c.u64()) differs = true;
    REQUIRE(differs);
}

TEST_CASE("uniform and index ranges", "[common]") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        size_t k = rng.index(7);
        REQUIRE(k < 7);
    }
    double lo = 1e9, hi = -1e9;
    for (int i = 0; i < 2000; ++i) {
        double v = rng.uniform(-2.0, 3.0);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    REQUIRE(lo >= -2.0);
    REQUIRE(hi <= 3.0);
    REQUIRE(lo < -1.5);
    REQUIRE(hi > 2.5);
}

TEST_CASE("normal moments", "[common]") {
    Rng rng(5);
    double sum = 0, sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double v = rng.normal();
        sum += v;
        sq += v * v;
    }
    REQUIRE(sum / n == Catch::Approx(0.0).margin(0.03));
    REQUIRE(sq / n == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("derive_seed separates streams by tag and index", "[common]") {
    REQUIRE(derive_seed(1, "a") != derive_seed(1, "b"));
    REQUIRE(derive_seed(1, "a", 0) != derive_seed(1, "a", 1));
    REQUIRE(derive_seed(1, "a", 3) == derive_seed(1, "a", 3));
    REQUIRE(derive_seed(2, "a") != derive_seed(1, "a"));
}

TEST_CASE("shuffle is a permutation", "[common]") {
    Rng rng(7);
    std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
    auto sorted = v;
    rng.shuffle(v);
    auto copy = v;
    std::sort(copy.begin(), copy.end());
    REQUIRE(copy == sorted);
}

TEST_CASE("hex64 formats fixed width", "[common]") {
    REQUIRE(hex64(0) == "0000000000000000");
    REQUIRE(hex64(0xdeadbeefULL) == "00000000deadbeef");
}
