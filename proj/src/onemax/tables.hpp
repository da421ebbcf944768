#pragma once

#include <cmath>
#include <vector>

#include "errors.hpp"
#include "kernel.hpp"

namespace onemax {

enum class PolicyKind { Strengths, Rates };
enum class RateFamily { Binomial, ConditionalBinomial };
enum class PolicyMode { Drift, Opt, Static, Back };
enum class TieBreak { SmallestK, LargestK };

struct OptimizerConfig {
    int grid_points = 64;
    double refine_tolerance = 1e-10;  // absolute tolerance on the rate
    int max_iterations = 200;
    double tail_epsilon = kDefaultTailEpsilon;  // weight-window truncation

    void validate() const {
        if (grid_points < 16) throw DomainError("grid_points must be >= 16");
        if (!(refine_tolerance > 0.0 && refine_tolerance <= 1e-6))
            throw DomainError("refine_tolerance must lie in (0, 1e-6]");
        if (!(tail_epsilon >= 0.0 && tail_epsilon <= 1e-9))
            throw DomainError("tail_epsilon must lie in [0, 1e-9]");
    }
};

struct PolicyMeta {
    PolicyKind kind = PolicyKind::Strengths;
    RateFamily family = RateFamily::Binomial;  // meaningful for Rates only
    PolicyMode mode = PolicyMode::Static;
    TieBreak tie_break = TieBreak::SmallestK;
    double p_min = 0.0;
    double static_value = 0.0;  // strength or rate for Static mode
    double tail_epsilon = kDefaultTailEpsilon;
    int grid_points = 64;
    double refine_tolerance = 1e-10;
};

// Per-level mutation parameter, for levels 0..n-1. Strength tables hold
// integers stored as doubles (exact below 2^53).
struct PolicyTable {
    int n = 0;
    PolicyMeta meta;
    std::vector<double> values;

    int strength_at(int level) const {
        return static_cast<int>(values[static_cast<size_t>(level)]);
    }
    double rate_at(int level) const { return values[static_cast<size_t>(level)]; }

    MutationLaw law_at(int level) const {
        if (level < 0 || level >= n) throw DomainError("policy level out of range");
        if (meta.kind == PolicyKind::Strengths)
            return MutationLaw::deterministic(n, strength_at(level));
        if (meta.family == RateFamily::Binomial)
            return MutationLaw::binomial(n, rate_at(level));
        return MutationLaw::conditional_binomial(n, rate_at(level));
    }
};

// Expected remaining optimization times per level, times[n] == 0.
struct RemainingTimeTable {
    int n = 0;
    std::vector<double> times;

    double at(int level) const { return times[static_cast<size_t>(level)]; }
};

}  // namespace onemax
