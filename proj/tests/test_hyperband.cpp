#include <catch2/catch_amalgamated.hpp>

#include "fairhpo/hyperband.hpp"

using namespace fairhpo;

namespace {
void require_bracket(const Bracket& b, std::vector<std::pair<int, int>> expect) {
    REQUIRE(b.rungs.size() == expect.size());
    for (size_t i = 0; i < expect.size(); ++i) {
        INFO("rung " << i);
        REQUIRE(b.rungs[i].n_configs == expect[i].first);
        REQUIRE(b.rungs[i].budget == expect[i].second);
    }
}
} // namespace

TEST_CASE("paper schedule (1, 10, eta 3)", "[hyperband]") {
    auto brackets = hyperband_schedule({1, 10, 3});
    REQUIRE(brackets.size() == 3);
    require_bracket(brackets[0], {{9, 1}, {3, 3}, {1, 10}});
    require_bracket(brackets[1], {{5, 3}, {1, 10}});
    require_bracket(brackets[2], {{3, 10}});
}

TEST_CASE("degenerate min == max", "[hyperband]") {
    auto brackets = hyperband_schedule({1, 1, 3});
    REQUIRE(brackets.size() == 1);
    for (const auto& r : brackets[0].rungs) REQUIRE(r.budget == 1);
}

TEST_CASE("exact powers (1, 9, eta 3)", "[hyperband]") {
    auto brackets = hyperband_schedule({1, 9, 3});
    REQUIRE(brackets.size() == 3);
    require_bracket(brackets[0], {{9, 1}, {3, 3}, {1, 9}});
    require_bracket(brackets[1], {{5, 3}, {1, 9}});
    require_bracket(brackets[2], {{3, 9}});
}

TEST_CASE("invalid configs rejected", "[hyperband]") {
    REQUIRE_THROWS_AS(hyperband_schedule({0, 10, 3}), ValidationError);
    REQUIRE_THROWS_AS(hyperband_schedule({5, 4, 3}), ValidationError);
    REQUIRE_THROWS_AS(hyperband_schedule({1, 10, 1}), ValidationError);
}
