#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "onemax/policy.hpp"
#include "onemax/runtime.hpp"

using namespace onemax;

namespace {

// Self-loop-resolved expected remaining time of using strength k once at
// `level`, given the remaining times of all higher levels.
double candidate_time(int n, int level, int k, const std::vector<double>& downstream) {
    auto lf = acquire_log_factorials(n);
    auto s = strength_stats(*lf, n, level, k, downstream.data());
    if (s.improve <= 0.0) return std::numeric_limits<double>::infinity();
    return (1.0 + s.weighted) / s.improve;
}

}  // namespace

TEST_CASE("drift maximizing strengths at n=3") {
    auto pol = k_drift_table(3);
    CHECK(pol.strength_at(0) == 3);
    CHECK(pol.strength_at(1) == 3);
    CHECK(pol.strength_at(2) == 1);
    CHECK(pol.meta.kind == PolicyKind::Strengths);
    CHECK(pol.meta.mode == PolicyMode::Drift);
}

TEST_CASE("time optimal strengths at n=3 pick an even value") {
    auto build = k_opt_table(3);
    CHECK(build.policy.strength_at(0) == 3);
    CHECK(build.policy.strength_at(1) == 2);
    CHECK(build.policy.strength_at(2) == 1);
    CHECK(build.times.at(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(build.times.at(1) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(build.times.at(2) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(build.times.at(3) == 0.0);

    // The per-strength prices behind that choice, one level below the top.
    std::vector<double> downstream = {0.0, 0.0, 3.0, 0.0};
    CHECK(candidate_time(3, 1, 1, downstream) == doctest::Approx(4.5).epsilon(1e-12));
    CHECK(candidate_time(3, 1, 2, downstream) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(candidate_time(3, 1, 3, downstream) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("drift maximizing rates at n=3") {
    auto pol = p_drift_table(3, RateFamily::Binomial);
    CHECK(pol.rate_at(0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pol.rate_at(1) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(pol.rate_at(2) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    CHECK(total_expected_time(remaining_times(3, pol)) ==
          doctest::Approx(89.0 / 16.0).epsilon(1e-9));
}

TEST_CASE("time optimal rates at n=3") {
    auto build = p_opt_table(3, RateFamily::Binomial);
    CHECK(build.policy.rate_at(0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(build.policy.rate_at(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(build.policy.rate_at(2) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    CHECK(build.times.at(1) == doctest::Approx(27.0 / 4.0).epsilon(1e-9));
    CHECK(build.times.at(2) == doctest::Approx(27.0 / 4.0).epsilon(1e-9));
    CHECK(total_expected_time(build.times) == doctest::Approx(83.0 / 16.0).epsilon(1e-9));
}

TEST_CASE("resampling rates at n=3 degenerate to single flips at the top") {
    auto drift = p_drift_table(3, RateFamily::ConditionalBinomial);
    CHECK(drift.rate_at(0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(drift.rate_at(1) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(drift.rate_at(2) == 0.0);
    CHECK(total_expected_time(remaining_times(3, drift)) ==
          doctest::Approx(11.0 / 4.0).epsilon(1e-9));

    auto opt = p_opt_table(3, RateFamily::ConditionalBinomial);
    CHECK(opt.policy.rate_at(0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(opt.policy.rate_at(1) == doctest::Approx(3.0 / 4.0).epsilon(1e-9));
    CHECK(opt.policy.rate_at(2) == 0.0);
    CHECK(opt.times.at(1) == doctest::Approx(27.0 / 7.0).epsilon(1e-9));
    CHECK(total_expected_time(opt.times) == doctest::Approx(151.0 / 56.0).epsilon(1e-9));
}

TEST_CASE("drift ties break to the chosen side") {
    // At n=4, level 2, single and triple flips share the best drift 1/2.
    auto lo = k_drift_table(4, TieBreak::SmallestK);
    CHECK(lo.strength_at(2) == 1);
    auto hi = k_drift_table(4, TieBreak::LargestK);
    CHECK(hi.strength_at(2) == 3);
    // Levels without a tie are unaffected by the switch.
    CHECK(lo.strength_at(0) == hi.strength_at(0));
    CHECK(lo.strength_at(1) == hi.strength_at(1));
    CHECK(lo.strength_at(3) == hi.strength_at(3));
    CHECK(lo.meta.tie_break == TieBreak::SmallestK);
    CHECK(hi.meta.tie_break == TieBreak::LargestK);
}

TEST_CASE("drift maximizing strengths are odd below the full flip") {
    for (int n = 3; n <= 200; ++n) {
        auto pol = k_drift_table(n);
        for (int l = 0; l < n; ++l) {
            int k = pol.strength_at(l);
            bool odd_or_full = (k % 2 == 1) || (k == n);
            CHECK(odd_or_full);
        }
    }
}

TEST_CASE("per level strengths really minimize the resolved remaining time") {
    std::vector<int> dims = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15,
                             16, 17, 18, 19, 20, 21, 22, 23, 24, 25, 26, 27, 28,
                             29, 30, 64, 100};
    for (int n : dims) {
        auto build = k_opt_table(n);
        for (int level = 0; level < n; ++level) {
            double best = candidate_time(n, level, build.policy.strength_at(level),
                                         build.times.times);
            CHECK(best == doctest::Approx(build.times.at(level)).epsilon(1e-10));
            for (int k = 1; k <= n; ++k) {
                double other = candidate_time(n, level, k, build.times.times);
                CHECK(other >= best * (1.0 - 1e-10));
            }
        }
    }
}

TEST_CASE("optimal and drift strengths cross at half the dimension") {
    for (int n : {100, 1000}) {
        auto opt = k_opt_table(n).policy;
        auto drift = k_drift_table(n);
        for (int l = 0; l < n; ++l) {
            if (2 * l < n) CHECK(opt.strength_at(l) <= drift.strength_at(l));
            if (2 * l > n) CHECK(opt.strength_at(l) >= drift.strength_at(l));
        }
    }
}

TEST_CASE("optimal strengths track n times the optimal rate") {
    // Coarse coherence between the two optimizers. The gap peaks near the
    // switch to single-bit flips (observed 2.88 at level 667), so this is an
    // absolute bound, not a relative one.
    const int n = 1000;
    auto ks = k_opt_table(n).policy;
    auto ps = p_opt_table(n, RateFamily::Binomial).policy;
    for (int l = 0; l < n; ++l) {
        int k = ks.strength_at(l);
        if (k == n) continue;  // the rate optimum has no full-flip plateau
        CHECK(std::fabs(k - n * ps.rate_at(l)) <= 4.0);
    }
}

TEST_CASE("step anatomy of the halving rule table") {
    auto pol = back_table(1000);
    CHECK(pol.meta.mode == PolicyMode::Back);
    CHECK(pol.rate_at(999) == doctest::Approx(1.0 / 1000.0).epsilon(1e-12));
    CHECK(pol.rate_at(600) == doctest::Approx(1.0 / 202.0).epsilon(1e-12));
    // Below the halfway level the rule falls back to the drift maximizer.
    auto drift = p_drift_table(1000, RateFamily::Binomial);
    CHECK(pol.rate_at(400) == doctest::Approx(drift.rate_at(400)).epsilon(1e-8));
}

TEST_CASE("static tables record their parameter at every level") {
    auto ks = static_strength_table(5, 2);
    for (int l = 0; l < 5; ++l) CHECK(ks.strength_at(l) == 2);
    CHECK(ks.meta.mode == PolicyMode::Static);
    CHECK(ks.meta.static_value == 2.0);

    auto ps = static_rate_table(5, RateFamily::Binomial, 0.2);
    for (int l = 0; l < 5; ++l) CHECK(ps.rate_at(l) == 0.2);
    CHECK(ps.meta.kind == PolicyKind::Rates);
}

TEST_CASE("best static rate beats the 1/n folklore but not per level control") {
    auto best = static_opt_rate(100, RateFamily::Binomial);
    CHECK(best.total_time == doctest::Approx(1057.1515).epsilon(2e-4));
    double folklore =
        total_expected_time(remaining_times(100, static_rate_table(100, RateFamily::Binomial, 0.01)));
    CHECK(best.total_time < folklore);
    CHECK(folklore == doctest::Approx(1070.0).epsilon(1e-3));

    for (int n : {10, 50, 100}) {
        auto opt = static_opt_rate(n, RateFamily::Binomial);
        CHECK(opt.rate > 1.0 / n);
        auto adaptive = p_opt_table(n, RateFamily::Binomial);
        CHECK(total_expected_time(adaptive.times) < opt.total_time);
    }
}

TEST_CASE("best static resampling rate with a free floor is the single flip") {
    auto opt = static_opt_rate(100, RateFamily::ConditionalBinomial, 0.0);
    CHECK(opt.rate == 0.0);
    double rls = total_expected_time(remaining_times(100, static_strength_table(100, 1)));
    CHECK(opt.total_time == doctest::Approx(rls).epsilon(1e-12));
}

TEST_CASE("rate floors propagate into the optimized tables") {
    const int n = 50;
    const double floor = 1.0 / (2.0 * n);
    auto build = p_opt_table(n, RateFamily::ConditionalBinomial, floor);
    CHECK(build.policy.meta.p_min == floor);
    for (int l = 0; l < n; ++l) CHECK(build.policy.rate_at(l) >= floor - 1e-15);
    // The floor binds at the top levels, where the free optimum would be 0.
    CHECK(build.policy.rate_at(n - 1) == doctest::Approx(floor).epsilon(1e-9));

    auto free_build = p_opt_table(n, RateFamily::ConditionalBinomial, 0.0);
    CHECK(total_expected_time(free_build.times) <= total_expected_time(build.times));
}

TEST_CASE("scalar minimizer") {
    OptimizerConfig cfg;
    SUBCASE("finds a quadratic minimum") {
        auto r = minimize_scalar([](double x) { return (x - 0.3) * (x - 0.3); }, 0.01, 1.0, cfg);
        CHECK(r.x == doctest::Approx(0.3).epsilon(1e-7));
        CHECK(r.value <= 1e-14);
    }
    SUBCASE("monotone decreasing objective ends at the upper boundary") {
        auto r = minimize_scalar([](double x) { return -x; }, 0.1, 0.9, cfg);
        CHECK(r.x == doctest::Approx(0.9).epsilon(1e-9));
    }
    SUBCASE("reproduces the level-1 optimal rate at n=3") {
        auto objective = [](double p) {
            auto t = mixed_transition(3, 1, binomial_weights(3, p, 0.0));
            double up = t.probability(2) + t.probability(3);
            if (up <= 0.0) return std::numeric_limits<double>::infinity();
            return (1.0 + t.probability(2) * 6.75) / up;
        };
        auto r = minimize_scalar(objective, 1e-12, 1.0, cfg);
        CHECK(std::fabs(r.x - 2.0 / 3.0) <= 1e-6);
        CHECK(r.value == doctest::Approx(6.75).epsilon(1e-9));
    }
}

TEST_CASE("policy builders reject bad arguments") {
    CHECK_THROWS_AS(k_drift_table(0), DomainError);
    CHECK_THROWS_AS(p_drift_table(3, RateFamily::Binomial, 1.0), DomainError);
    CHECK_THROWS_AS(p_opt_table(3, RateFamily::Binomial, -0.1), DomainError);
    CHECK_THROWS_AS(back_table(1), DomainError);
    CHECK_THROWS_AS(static_strength_table(3, 0), DomainError);
    CHECK_THROWS_AS(static_strength_table(3, 4), DomainError);
    CHECK_THROWS_AS(static_rate_table(3, RateFamily::Binomial, 1.5), DomainError);

    OptimizerConfig bad;
    bad.grid_points = 8;
    CHECK_THROWS_AS(p_opt_table(3, RateFamily::Binomial, 0.0, bad), DomainError);
    OptimizerConfig lax;
    lax.tail_epsilon = 1e-7;
    CHECK_THROWS_AS(p_drift_table(3, RateFamily::Binomial, 0.0, lax), DomainError);

    CHECK_THROWS_AS(minimize_scalar([](double) { return 0.0; }, 0.0, 1.0, OptimizerConfig{}),
                    DomainError);
}
