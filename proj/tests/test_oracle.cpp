#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "onemax/oracle.hpp"
#include "onemax/policy.hpp"

using namespace onemax;

namespace {

Rational mass_total(const std::map<int, Rational>& m) {
    Rational s = 0;
    for (auto& [fitness, mass] : m) s += mass;
    return s;
}

ExactPolicy rational_rates(int n, RateFamily family, std::vector<Rational> ps) {
    return ExactPolicy::rates(n, family, ps);
}

}  // namespace

TEST_CASE("exact transitions by flip-set enumeration") {
    auto two = exact_transition(3, 1, 2);
    CHECK(two.at(3) == Rational(1, 3));
    CHECK(two.at(1) == Rational(2, 3));
    CHECK(two.count(0) == 0);
    CHECK(mass_total(two) == 1);

    auto one = exact_transition(3, 1, 1);
    CHECK(one.at(2) == Rational(2, 3));
    CHECK(one.at(0) == Rational(1, 3));
    CHECK(mass_total(one) == 1);

    auto half = exact_transition(4, 2, 2);
    CHECK(half.at(4) == Rational(1, 6));
    CHECK(half.at(2) == Rational(2, 3));
    CHECK(half.at(0) == Rational(1, 6));
    CHECK(mass_total(half) == 1);
}

TEST_CASE("every exact transition sums to one") {
    for (int n = 1; n <= 7; ++n)
        for (int level = 0; level <= n; ++level)
            for (int k = 0; k <= n; ++k) CHECK(mass_total(exact_transition(n, level, k)) == 1);
}

TEST_CASE("exact remaining times for fixed strength tables at n=3") {
    auto opt = exact_remaining_times(ExactPolicy::strengths(3, {3, 2, 1}));
    CHECK(opt[0] == 1);
    CHECK(opt[1] == 3);
    CHECK(opt[2] == 3);
    CHECK(opt[3] == 0);
    CHECK(exact_total_time(ExactPolicy::strengths(3, {3, 2, 1})) == Rational(19, 8));

    auto drift = exact_remaining_times(ExactPolicy::strengths(3, {3, 3, 1}));
    CHECK(drift[1] == 4);
    CHECK(drift[2] == 3);
    CHECK(exact_total_time(ExactPolicy::strengths(3, {3, 3, 1})) == Rational(11, 4));

    auto single = exact_remaining_times(ExactPolicy::strengths(3, {1, 1, 1}));
    CHECK(single[2] == 3);
    CHECK(single[1] == Rational(9, 2));
    CHECK(single[0] == Rational(11, 2));
    CHECK(exact_total_time(ExactPolicy::strengths(3, {1, 1, 1})) == Rational(7, 2));
}

TEST_CASE("exact remaining times for rate tables at n=3") {
    auto opt = rational_rates(3, RateFamily::Binomial,
                              {Rational(1), Rational(2, 3), Rational(1, 3)});
    auto t = exact_remaining_times(opt);
    CHECK(t[0] == 1);
    CHECK(t[1] == Rational(27, 4));
    CHECK(t[2] == Rational(27, 4));
    CHECK(exact_total_time(opt) == Rational(83, 16));

    auto drift = rational_rates(3, RateFamily::Binomial,
                                {Rational(1), Rational(1), Rational(1, 3)});
    CHECK(exact_remaining_times(drift)[1] == Rational(31, 4));
    CHECK(exact_total_time(drift) == Rational(89, 16));
}

TEST_CASE("exact remaining times for resampling rate tables at n=3") {
    auto opt = rational_rates(3, RateFamily::ConditionalBinomial,
                              {Rational(1), Rational(3, 4), Rational(0)});
    auto t = exact_remaining_times(opt);
    CHECK(t[0] == 1);
    CHECK(t[1] == Rational(27, 7));
    CHECK(t[2] == 3);
    CHECK(exact_total_time(opt) == Rational(151, 56));

    auto drift = rational_rates(3, RateFamily::ConditionalBinomial,
                                {Rational(1), Rational(1), Rational(0)});
    CHECK(exact_remaining_times(drift)[1] == 4);
    CHECK(exact_total_time(drift) == Rational(11, 4));
}

TEST_CASE("tiny dimensions solve by hand") {
    auto one = ExactPolicy::strengths(1, {1});
    CHECK(exact_remaining_times(one)[0] == 1);
    CHECK(exact_total_time(one) == Rational(1, 2));

    auto two = ExactPolicy::strengths(2, {1, 1});
    CHECK(exact_remaining_times(two)[1] == 2);
}

TEST_CASE("exhaustive search totals for the smallest dimensions") {
    const Rational want[] = {Rational(1, 2),   Rational(5, 4),   Rational(19, 8),
                             Rational(73, 16), Rational(103, 16), Rational(561, 64)};
    for (int n = 1; n <= 6; ++n) {
        auto best = exhaustive_optimal_policy(n);
        CHECK(best.total == want[n - 1]);
        CHECK(exact_total_time(ExactPolicy::strengths(n, best.strengths)) == best.total);
    }
    CHECK(exhaustive_optimal_policy(1).strengths == std::vector<int>{1});
    CHECK(exhaustive_optimal_policy(2).strengths == std::vector<int>{2, 1});
    CHECK(exhaustive_optimal_policy(3).strengths == std::vector<int>{3, 2, 1});
}

TEST_CASE("backward induction over strengths reproduces the exhaustive optimum") {
    for (int n = 1; n <= 6; ++n) {
        auto best = exhaustive_optimal_policy(n);
        auto dp = k_opt_table(n);
        for (int l = 0; l < n; ++l) CHECK(dp.policy.strength_at(l) == best.strengths[l]);
        CHECK(exact_total_time(ExactPolicy::from_table(dp.policy)) == best.total);
    }
}

TEST_CASE("full state chain collapses to the level chain") {
    for (int n : {1, 2, 3, 6, 8}) {
        auto pol = ExactPolicy::from_table(k_opt_table(n).policy);
        auto by_state = full_state_chain_times(pol);
        auto by_level = exact_remaining_times(pol);
        REQUIRE(by_state.size() == by_level.size());
        for (size_t l = 0; l < by_state.size(); ++l) CHECK(by_state[l] == by_level[l]);
    }

    // A dense rate law exercises every strength including k = 0 self-loops.
    auto ea = rational_rates(8, RateFamily::Binomial,
                             std::vector<Rational>(8, Rational(1, 4)));
    auto by_state = full_state_chain_times(ea);
    auto by_level = exact_remaining_times(ea);
    for (size_t l = 0; l < by_state.size(); ++l) CHECK(by_state[l] == by_level[l]);
}

TEST_CASE("rounded float rates sit just above the exact optimum") {
    // Round the float-optimized rates to the 1/64 grid, then examine that
    // grid point and its single-level neighbors with exact arithmetic. All of
    // them must price out strictly above the true optimum 83/16, and the
    // rounded point must land within a small relative margin of it.
    auto build = p_opt_table(3, RateFamily::Binomial);
    std::vector<Rational> center(3);
    for (int l = 0; l < 3; ++l) {
        long grid = std::lround(build.policy.rate_at(l) * 64.0);
        center[static_cast<size_t>(l)] = Rational(grid, 64);
    }

    const Rational best(83, 16);
    Rational center_total =
        exact_total_time(rational_rates(3, RateFamily::Binomial, center));
    CHECK(center_total > best);
    CHECK(center_total <= best * Rational(1002, 1000));

    for (int l = 0; l < 3; ++l)
        for (int step : {-1, 1}) {
            auto probe = center;
            Rational moved = probe[static_cast<size_t>(l)] + Rational(step, 64);
            if (moved < 0 || moved > 1) continue;
            probe[static_cast<size_t>(l)] = moved;
            CHECK(exact_total_time(rational_rates(3, RateFamily::Binomial, probe)) > best);
        }
}

TEST_CASE("exact helpers reject what they cannot represent") {
    CHECK_THROWS_AS(exact_transition(21, 0, 1), CapacityError);
    CHECK_THROWS_AS(exact_remaining_times(ExactPolicy::strengths(17, std::vector<int>(17, 1))),
                    CapacityError);
    CHECK_THROWS_AS(exhaustive_optimal_policy(7), CapacityError);
    CHECK_THROWS_AS(full_state_chain_times(ExactPolicy::strengths(11, std::vector<int>(11, 1))),
                    CapacityError);
    CHECK_THROWS_AS(ExactPolicy::from_table(static_rate_table(4, RateFamily::Binomial, 0.5)),
                    DomainError);
    CHECK_THROWS_AS(ExactPolicy::strengths(3, {0, 1, 1}), DomainError);
    CHECK_THROWS_AS(exact_transition(3, 4, 1), DomainError);
}
