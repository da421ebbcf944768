#pragma once

#include <vector>

#include "math_util.hpp"

namespace onemax {

inline constexpr double kDefaultTailEpsilon = 1e-15;

// Distribution of the offspring fitness before selection, for a fixed parent
// fitness level. Dense over [lo, hi]; parity gaps hold exact zeros.
struct TransitionDistribution {
    int n = 0;
    int parent = 0;
    int lo = 0;
    std::vector<double> mass;

    int hi() const { return lo + static_cast<int>(mass.size()) - 1; }

    double probability(int fitness) const {
        if (fitness < lo || fitness > hi()) return 0.0;
        return mass[static_cast<size_t>(fitness - lo)];
    }
};

// Probabilities of flipping exactly k bits, over a contiguous k-window.
// `sum` is the retained mass; at least 1 - tail_epsilon of the law.
struct WeightVector {
    int lo = 0;
    std::vector<double> weights;
    double tail_epsilon = 0.0;
    double sum = 0.0;

    int hi() const { return lo + static_cast<int>(weights.size()) - 1; }

    double weight(int k) const {
        if (k < lo || k > hi()) return 0.0;
        return weights[static_cast<size_t>(k - lo)];
    }
};

// How the mutation strength is chosen at one fitness level.
struct MutationLaw {
    enum class Kind { Deterministic, Binomial, ConditionalBinomial };

    Kind kind = Kind::Deterministic;
    int n = 0;
    int strength = 0;   // Deterministic
    double rate = 0.0;  // Binomial / ConditionalBinomial; conditional p=0 means flip-1

    static MutationLaw deterministic(int n, int k);
    static MutationLaw binomial(int n, double p);
    static MutationLaw conditional_binomial(int n, double p);

    WeightVector weights(double tail_epsilon = kDefaultTailEpsilon) const;
};

// Offspring fitness distribution for flipping exactly k bits at level `level`:
// fitness level + 2i - k with probability C(n-level,i)C(level,k-i)/C(n,k).
TransitionDistribution hypergeometric_transition(int n, int level, int k);

// Expected elitist fitness gain E[max(offspring - level, 0)] of flipping
// exactly k bits, summed over the renormalized transition distribution so
// the two views agree to a few ulps even when the gain is of order n.
double drift_fixed_k(int n, int level, int k);

// Bin(n,p) restricted to a window around the mode that keeps all but at most
// tail_epsilon of the mass; tail_epsilon = 0 keeps all n+1 entries.
WeightVector binomial_weights(int n, double p, double tail_epsilon);

// Bin(n,p) conditioned on k >= 1, normalizer 1-(1-p)^n evaluated via expm1;
// p = 0 denotes the flip-1 convention.
WeightVector conditional_binomial_weights(int n, double p, double tail_epsilon);

// Mixture of hypergeometric transitions under the strength weights w,
// renormalized to account for truncation.
TransitionDistribution mixed_transition(int n, int level, const WeightVector& w);

// sum_k w(k) * drift_fixed_k(n, level, k), the k >= 1 terms.
double drift_mixture(int n, int level, const WeightVector& w);

// Probability that the offspring fitness strictly exceeds the parent's.
double improvement_probability(const TransitionDistribution& d);

// Aggregates over the improving tail of hypergeometric_transition(n,level,k),
// in one anchored ratio-product sweep:
//   improve  = P[offspring > level]
//   weighted = sum over improving j of P[j] * downstream[j]
//   drift    = E[max(offspring - level, 0)]
// downstream is indexed by absolute fitness with downstream[n] == 0; pass
// nullptr to skip the weighted sum. This is the hot path of the policy DP, so
// it takes the log-factorial table by reference instead of re-acquiring it.
struct StrengthStats {
    double improve = 0.0;
    double weighted = 0.0;
    double drift = 0.0;
};
StrengthStats strength_stats(const LogFactorialTable& lf, int n, int level, int k,
                             const double* downstream);

}  // namespace onemax
