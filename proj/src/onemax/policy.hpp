#pragma once

#include <functional>
#include <span>

#include "tables.hpp"

namespace onemax {

struct PolicyBuild {
    PolicyTable policy;
    RemainingTimeTable times;
};

// Per-level strength maximizing the expected fitness gain; ties within
// relative 1e-12 broken by `tie_break` (smallest by default).
PolicyTable k_drift_table(int n, TieBreak tie_break = TieBreak::SmallestK);

// Backward DP over levels: at each level the strength minimizing the
// self-loop-resolved expected remaining time, given the already optimal
// higher-level times. Returns the policy and those times together.
PolicyBuild k_opt_table(int n, TieBreak tie_break = TieBreak::SmallestK);

// Per-level rate maximizing the mixture drift. For ConditionalBinomial with
// p_min = 0 the flip-1 endpoint competes against the interior optimum.
PolicyTable p_drift_table(int n, RateFamily family, double p_min = 0.0,
                          const OptimizerConfig& cfg = {});

// Backward DP over rates, same endpoint handling as p_drift_table.
PolicyBuild p_opt_table(int n, RateFamily family, double p_min = 0.0,
                        const OptimizerConfig& cfg = {});

// p(level) = 1/(2*level + 2 - n) for level >= n/2, drift-maximizing rate below.
PolicyTable back_table(int n, const OptimizerConfig& cfg = {});

PolicyTable static_strength_table(int n, int k);
PolicyTable static_rate_table(int n, RateFamily family, double p);

// The single rate minimizing the total expected time when used at every
// level, with its total. ConditionalBinomial with p_min = 0 may return the
// flip-1 endpoint p = 0.
struct StaticOpt {
    double rate = 0.0;
    double total_time = 0.0;
};
StaticOpt static_opt_rate(int n, RateFamily family, double p_min = 0.0,
                          const OptimizerConfig& cfg = {});

// Coarse log-spaced grid over [lo, hi] (plus optional extra seeds), then
// golden-section refinement of the best bracket down to refine_tolerance.
// Returns the best point actually evaluated. Objective values of +inf are
// treated as worse than any finite value.
struct ScalarMin {
    double x = 0.0;
    double value = 0.0;
};
ScalarMin minimize_scalar(const std::function<double(double)>& objective, double lo, double hi,
                          const OptimizerConfig& cfg, std::span<const double> extra_seeds = {});

}  // namespace onemax
