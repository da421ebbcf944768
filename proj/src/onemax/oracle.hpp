#pragma once

#include <map>
#include <vector>

#include <boost/multiprecision/gmp.hpp>

#include "tables.hpp"

namespace onemax {

// Exact-rational reference path for small n. Everything here recomputes from
// first principles (mask enumeration, rational arithmetic) rather than
// reusing the floating-point kernel, so the two sides can check each other.

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

Integer exact_binomial(int a, int b);

// Offspring fitness law of flipping exactly k of n bits at fitness `level`,
// found by enumerating all C(n,k) flip sets against a canonical parent.
// Requires n <= 20.
std::map<int, Rational> exact_transition(int n, int level, int k);

// One level's mutation law with exact parameters. A conditional law with
// rate 0 denotes the flip-one convention.
struct ExactLaw {
    enum class Kind { Deterministic, Binomial, ConditionalBinomial };
    Kind kind = Kind::Deterministic;
    int strength = 1;
    Rational rate = 0;
};

struct ExactPolicy {
    int n = 0;
    std::vector<ExactLaw> laws;  // levels 0..n-1

    static ExactPolicy strengths(int n, const std::vector<int>& ks);
    static ExactPolicy rates(int n, RateFamily family, const std::vector<Rational>& ps);
    // Strengths tables convert exactly; rate tables would lose precision and
    // are rejected.
    static ExactPolicy from_table(const PolicyTable& table);
};

// P(flip exactly k bits) for k = 0..n, as exact rationals summing to 1.
std::vector<Rational> exact_weights(const ExactLaw& law, int n);

// Mixture of exact transitions under the law's weights.
std::map<int, Rational> exact_mixture(int n, int level, const ExactLaw& law);

// Backward recurrence with self-loops resolved, exactly. Entry l holds
// E[T(l)]; entry n is 0. Requires n <= 16.
std::vector<Rational> exact_remaining_times(const ExactPolicy& policy);

// Expectation over the uniform random initial fitness: sum C(n,l)/2^n T(l).
Rational exact_total_time(const ExactPolicy& policy);

// Global minimum over all n^n deterministic strength tables, evaluated
// exactly; ties resolved toward smaller strengths. Requires n <= 6.
struct ExhaustiveResult {
    std::vector<int> strengths;
    Rational total = 0;
};
ExhaustiveResult exhaustive_optimal_policy(int n);

// Expected hitting times of the all-ones string in the full 2^n-state chain,
// solved class by class with fraction-free elimination. Verifies that states
// of equal fitness share one hitting time and returns that per-level value;
// a violation throws. Requires n <= 10.
std::vector<Rational> full_state_chain_times(const ExactPolicy& policy);

}  // namespace onemax
