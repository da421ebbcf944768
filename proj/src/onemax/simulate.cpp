#include "simulate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "errors.hpp"
#include "math_util.hpp"

namespace onemax {

namespace {

// Inversion sampling over a contiguous weight window, ascending. The window
// sum is used as the normalizer, so truncated tail mass is redistributed
// proportionally (the same renormalization mixed_transition applies).
int sample_from_weights(const WeightVector& w, SplitMix64& rng) {
    const double u = rng.next_double() * w.sum;
    double acc = 0.0;
    const int hi = w.hi();
    for (int k = w.lo; k < hi; ++k) {
        acc += w.weight(k);
        if (u < acc) return k;
    }
    return hi;
}

// Per-level strength draws against one policy. Deterministic policies read
// the table directly; sampled policies invert lazily cached weight windows,
// costing exactly one uniform per draw.
class StrengthSampler {
public:
    explicit StrengthSampler(const PolicyTable& policy) : policy_(policy) {
        if (policy.meta.kind == PolicyKind::Rates) {
            cache_.resize(static_cast<size_t>(policy.n));
            cached_.assign(static_cast<size_t>(policy.n), 0);
        }
    }

    int draw(int level, SplitMix64& rng) {
        if (policy_.meta.kind == PolicyKind::Strengths) return policy_.strength_at(level);
        auto i = static_cast<size_t>(level);
        if (!cached_[i]) {
            cache_[i] = policy_.law_at(level).weights(policy_.meta.tail_epsilon);
            cached_[i] = 1;
        }
        return sample_from_weights(cache_[i], rng);
    }

private:
    const PolicyTable& policy_;
    std::vector<WeightVector> cache_;
    std::vector<char> cached_;
};

void check_run_arguments(const PolicyTable& policy, int n, uint64_t budget_cap) {
    if (n < 1) throw DomainError("dimension must be >= 1");
    if (policy.n != n) throw DomainError("policy dimension does not match n");
    if (policy.values.size() != static_cast<size_t>(n))
        throw DomainError("policy table has wrong length");
    if (budget_cap < 1) throw DomainError("budget_cap must be >= 1");
}

AggregateStats summarize(double point, const std::vector<double>& xs) {
    AggregateStats s;
    s.point = point;
    s.count = xs.size();
    if (xs.empty()) return s;
    Kahan total;
    for (double x : xs) total.add(x);
    s.mean = total.value() / static_cast<double>(xs.size());
    if (xs.size() >= 2) {
        Kahan ss;
        for (double x : xs) {
            const double d = x - s.mean;
            ss.add(d * d);
        }
        s.stddev = std::sqrt(ss.value() / static_cast<double>(xs.size() - 1));
    }
    return s;
}

}  // namespace

int sample_transition(const TransitionDistribution& t, SplitMix64& rng) {
    const double u = rng.next_double();
    double acc = 0.0;
    const int hi = t.hi();
    for (int j = t.lo; j < hi; ++j) {
        acc += t.probability(j);
        if (u < acc) return j;
    }
    return hi;
}

uint64_t default_budget_cap(int n) {
    if (n < 1) throw DomainError("dimension must be >= 1");
    const double raw = 100.0 * n * std::log(static_cast<double>(std::max(n, 2)));
    return static_cast<uint64_t>(std::ceil(raw));
}

int sample_strength(const MutationLaw& law, SplitMix64& rng) {
    if (law.kind == MutationLaw::Kind::Deterministic) return law.strength;
    return sample_from_weights(law.weights(), rng);
}

RunRecord run(const PolicyTable& policy, int n, uint64_t seed, uint64_t budget_cap) {
    check_run_arguments(policy, n, budget_cap);

    RunRecord rec;
    rec.seed = seed;
    rec.n = n;
    SplitMix64 rng(seed);

    // Uniform initial search point, realized as raw 64-bit words: the level
    // chain only needs the popcount, but drawing whole words keeps the
    // distribution exactly Binomial(n, 1/2).
    int fit = 0;
    const int words = (n + 63) / 64;
    for (int w = 0; w < words; ++w) {
        uint64_t bits = rng.next();
        const int remaining = n - 64 * w;
        if (remaining < 64) bits &= (uint64_t{1} << remaining) - 1;
        fit += std::popcount(bits);
    }
    rec.events.emplace_back(uint64_t{0}, fit);
    if (fit == n) {
        rec.reached_optimum = true;
        return rec;
    }

    StrengthSampler sampler(policy);

    // Deterministic policies revisit the same per-level transition, so cache
    // it; sampled strengths vary per step and are computed fresh.
    std::vector<TransitionDistribution> transitions;
    std::vector<char> have_transition;
    const bool deterministic = policy.meta.kind == PolicyKind::Strengths;
    if (deterministic) {
        transitions.resize(static_cast<size_t>(n));
        have_transition.assign(static_cast<size_t>(n), 0);
    }

    uint64_t evals = 0;
    while (evals < budget_cap) {
        ++evals;
        const int k = sampler.draw(fit, rng);
        int offspring;
        if (deterministic) {
            auto i = static_cast<size_t>(fit);
            if (!have_transition[i]) {
                transitions[i] = hypergeometric_transition(n, fit, k);
                have_transition[i] = 1;
            }
            offspring = sample_transition(transitions[i], rng);
        } else {
            offspring = sample_transition(hypergeometric_transition(n, fit, k), rng);
        }
        // Elitist acceptance: offspring >= parent survives. On the level
        // chain an equal-fitness acceptance changes nothing, so only strict
        // improvements are recorded.
        if (offspring > fit) {
            fit = offspring;
            rec.events.emplace_back(evals, fit);
            if (fit == n) {
                rec.reached_optimum = true;
                rec.hit_optimum_at = evals;
                break;
            }
        }
    }
    rec.total_evaluations = evals;
    return rec;
}

RunRecord run_bitstring(const PolicyTable& policy, int n, uint64_t seed, uint64_t budget_cap) {
    check_run_arguments(policy, n, budget_cap);
    if (n > 64) throw DomainError("bit-string mode supports n <= 64");

    RunRecord rec;
    rec.seed = seed;
    rec.n = n;
    SplitMix64 rng(seed);

    const uint64_t mask = (n == 64) ? ~uint64_t{0} : (uint64_t{1} << n) - 1;
    uint64_t x = rng.next() & mask;
    int fit = std::popcount(x);
    rec.events.emplace_back(uint64_t{0}, fit);
    if (fit == n) {
        rec.reached_optimum = true;
        return rec;
    }

    StrengthSampler sampler(policy);
    std::vector<int> idx(static_cast<size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);

    uint64_t evals = 0;
    while (evals < budget_cap) {
        ++evals;
        const int k = sampler.draw(fit, rng);
        // Partial Fisher-Yates: k distinct positions, one uniform each.
        uint64_t flip = 0;
        for (int i = 0; i < k; ++i) {
            const int j = i + static_cast<int>(rng.next_double() * (n - i));
            std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
            flip |= uint64_t{1} << idx[static_cast<size_t>(i)];
        }
        const uint64_t y = x ^ flip;
        const int yf = std::popcount(y);
        if (yf >= fit) {
            x = y;  // equal fitness replaces the parent (different string)
            if (yf > fit) {
                fit = yf;
                rec.events.emplace_back(evals, fit);
                if (fit == n) {
                    rec.reached_optimum = true;
                    rec.hit_optimum_at = evals;
                    break;
                }
            }
        }
    }
    rec.total_evaluations = evals;
    return rec;
}

std::vector<RunRecord> run_batch(const PolicyTable& policy, int runs, uint64_t master_seed,
                                 uint64_t budget_cap) {
    if (runs < 0) throw DomainError("run count must be >= 0");
    const uint64_t cap = budget_cap == 0 ? default_budget_cap(policy.n) : budget_cap;
    SplitMix64 master(master_seed);
    std::vector<RunRecord> out;
    out.reserve(static_cast<size_t>(runs));
    for (int i = 0; i < runs; ++i) {
        const uint64_t seed = master.next();
        out.push_back(run(policy, policy.n, seed, cap));
    }
    return out;
}

std::vector<AggregateStats> fixed_budget(const std::vector<RunRecord>& records,
                                         const std::vector<uint64_t>& budgets) {
    if (records.empty()) throw DomainError("fixed_budget requires at least one run");
    std::vector<AggregateStats> out;
    out.reserve(budgets.size());
    std::vector<double> xs(records.size());
    for (uint64_t b : budgets) {
        if (b < 1) throw DomainError("budgets must be >= 1");
        for (size_t r = 0; r < records.size(); ++r) {
            const auto& ev = records[r].events;
            // Best fitness after at most b evaluations: the last event at or
            // before b. events[0] sits at 0 evaluations, so the result of
            // upper_bound is never the beginning.
            auto it = std::upper_bound(
                ev.begin(), ev.end(), b,
                [](uint64_t value, const std::pair<uint64_t, int>& e) { return value < e.first; });
            xs[r] = static_cast<double>(std::prev(it)->second);
        }
        out.push_back(summarize(static_cast<double>(b), xs));
    }
    return out;
}

std::vector<AggregateStats> fixed_target(const std::vector<RunRecord>& records,
                                         const std::vector<int>& targets) {
    if (records.empty()) throw DomainError("fixed_target requires at least one run");
    const int n = records.front().n;
    for (const auto& rec : records)
        if (rec.n != n) throw DomainError("runs in one aggregate must share a dimension");

    std::vector<AggregateStats> out;
    out.reserve(targets.size());
    std::vector<double> xs;
    for (int target : targets) {
        if (target < 0 || target > n) throw DomainError("target fitness out of range");
        xs.clear();
        uint64_t censored = 0;
        for (const auto& rec : records) {
            const auto& ev = rec.events;
            // First event at or above the target; fitness is increasing
            // across events.
            auto it = std::lower_bound(
                ev.begin(), ev.end(), target,
                [](const std::pair<uint64_t, int>& e, int t) { return e.second < t; });
            if (it == ev.end())
                ++censored;
            else
                xs.push_back(static_cast<double>(it->first));
        }
        AggregateStats s = summarize(static_cast<double>(target), xs);
        s.censored = censored;
        out.push_back(s);
    }
    return out;
}

}  // namespace onemax
