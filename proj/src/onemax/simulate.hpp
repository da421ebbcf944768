#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tables.hpp"

namespace onemax {

// SplitMix64 with the published finalizer constants. Small enough to copy,
// fast enough to seed one instance per run; batch streams are derived by
// taking successive outputs of a master instance, never by offsetting the
// state directly (offset streams would overlap shifted copies of each other).
struct SplitMix64 {
    uint64_t state = 0;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53 random bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// One simulated run. `events` holds (evaluations_used, fitness) for the
// initial point and every strict improvement; both coordinates are strictly
// increasing. When the optimum is not reached within the budget,
// reached_optimum is false and total_evaluations equals the cap.
struct RunRecord {
    uint64_t seed = 0;
    int n = 0;
    std::vector<std::pair<uint64_t, int>> events;
    bool reached_optimum = false;
    uint64_t hit_optimum_at = 0;
    uint64_t total_evaluations = 0;
};

// Statistics of one query point of fixed_budget / fixed_target. `count` is
// the number of runs entering mean/stddev; censored runs (fixed_target only)
// are excluded from both and reported separately.
struct AggregateStats {
    double point = 0.0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation
    uint64_t count = 0;
    uint64_t censored = 0;
};

// ceil(100 n ln(max(n,2))), comfortably above any expected time here.
uint64_t default_budget_cap(int n);

// One strength draw. Deterministic laws return without touching the
// generator; sampled laws invert the cumulative weights (resampling-free
// even for the conditional law).
int sample_strength(const MutationLaw& law, SplitMix64& rng);

// One offspring-fitness draw by inversion over the transition mass,
// ascending. Consumes exactly one uniform.
int sample_transition(const TransitionDistribution& t, SplitMix64& rng);

// Simulates on the fitness-level chain: sample k from the policy's law at
// the current level, then the offspring fitness from the exact k-bit
// transition; accept iff the offspring is at least as fit. Each iteration is
// one evaluation. budget_cap must be >= 1.
RunRecord run(const PolicyTable& policy, int n, uint64_t seed, uint64_t budget_cap);

// Same algorithm on an explicit bit string (n <= 64). Exists to validate the
// level-chain reduction; consumes randomness differently, so agreement with
// run() is statistical, not per-trajectory.
RunRecord run_bitstring(const PolicyTable& policy, int n, uint64_t seed, uint64_t budget_cap);

// Independent runs with per-run seeds drawn from a master SplitMix64.
// budget_cap 0 selects default_budget_cap(policy.n).
std::vector<RunRecord> run_batch(const PolicyTable& policy, int runs, uint64_t master_seed,
                                 uint64_t budget_cap = 0);

// Best fitness reached within each budget (a step function over events).
std::vector<AggregateStats> fixed_budget(const std::vector<RunRecord>& records,
                                         const std::vector<uint64_t>& budgets);

// Evaluations used until each target fitness is first reached; runs that
// never reach a target are censored.
std::vector<AggregateStats> fixed_target(const std::vector<RunRecord>& records,
                                         const std::vector<int>& targets);

}  // namespace onemax
