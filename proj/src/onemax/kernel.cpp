#include "kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace onemax {

namespace {

void check_dimension(int n) {
    if (n < 1) throw DomainError("dimension must be >= 1, got " + std::to_string(n));
}

void check_level(int n, int level) {
    if (level < 0 || level > n)
        throw DomainError("fitness level " + std::to_string(level) + " outside [0, " +
                          std::to_string(n) + "]");
}

void check_strength(int n, int k, int k_min) {
    if (k < k_min || k > n)
        throw DomainError("mutation strength " + std::to_string(k) + " outside [" +
                          std::to_string(k_min) + ", " + std::to_string(n) + "]");
}

void check_rate(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("rate must lie in [0,1]");
}

// Mode of the hypergeometric count of flipped zero-bits.
int hyper_mode(int n, int level, int k) {
    long long num = static_cast<long long>(k + 1) * (n - level + 1);
    return static_cast<int>(num / (n + 2));
}

double hyper_log_pmf(const LogFactorialTable& lf, int n, int level, int k, int i) {
    return lf.log_choose(n - level, i) + lf.log_choose(level, k - i) - lf.log_choose(n, k);
}

// Ratio pmf(i+1)/pmf(i) of the flipped-zero count; factors stay exact in
// doubles (products of ints below 2^53).
inline double hyper_ratio_up(int n, int level, int k, int i) {
    return (static_cast<double>(n - level - i) * static_cast<double>(k - i)) /
           (static_cast<double>(i + 1) * static_cast<double>(level - k + i + 1));
}

}  // namespace

MutationLaw MutationLaw::deterministic(int n, int k) {
    check_dimension(n);
    check_strength(n, k, 0);
    MutationLaw law;
    law.kind = Kind::Deterministic;
    law.n = n;
    law.strength = k;
    return law;
}

MutationLaw MutationLaw::binomial(int n, double p) {
    check_dimension(n);
    check_rate(p);
    MutationLaw law;
    law.kind = Kind::Binomial;
    law.n = n;
    law.rate = p;
    return law;
}

MutationLaw MutationLaw::conditional_binomial(int n, double p) {
    check_dimension(n);
    check_rate(p);
    MutationLaw law;
    law.kind = Kind::ConditionalBinomial;
    law.n = n;
    law.rate = p;
    return law;
}

WeightVector MutationLaw::weights(double tail_epsilon) const {
    switch (kind) {
        case Kind::Binomial:
            return binomial_weights(n, rate, tail_epsilon);
        case Kind::ConditionalBinomial:
            return conditional_binomial_weights(n, rate, tail_epsilon);
        case Kind::Deterministic:
        default: {
            WeightVector w;
            w.lo = strength;
            w.weights = {1.0};
            w.tail_epsilon = 0.0;
            w.sum = 1.0;
            return w;
        }
    }
}

TransitionDistribution hypergeometric_transition(int n, int level, int k) {
    check_dimension(n);
    check_level(n, level);
    check_strength(n, k, 0);

    TransitionDistribution d;
    d.n = n;
    d.parent = level;
    if (k == 0) {
        d.lo = level;
        d.mass = {1.0};
        return d;
    }

    auto lf = acquire_log_factorials(n);
    int i_lo = std::max(0, k - level);
    int i_hi = std::min(k, n - level);
    d.lo = level + 2 * i_lo - k;
    d.mass.assign(static_cast<size_t>(2 * (i_hi - i_lo)) + 1, 0.0);

    int a = std::clamp(hyper_mode(n, level, k), i_lo, i_hi);
    double anchor = std::exp(hyper_log_pmf(*lf, n, level, k, a));

    double m = anchor;
    for (int i = a; i <= i_hi; ++i) {
        if (i > a) m *= hyper_ratio_up(n, level, k, i - 1);
        d.mass[static_cast<size_t>(2 * (i - i_lo))] = m;
    }
    m = anchor;
    for (int i = a - 1; i >= i_lo; --i) {
        m /= hyper_ratio_up(n, level, k, i);
        d.mass[static_cast<size_t>(2 * (i - i_lo))] = m;
    }

    // Renormalize, adding the two tails smallest-first.
    Kahan total;
    for (int i = i_lo; i < a; ++i) total.add(d.mass[static_cast<size_t>(2 * (i - i_lo))]);
    for (int i = i_hi; i >= a; --i) total.add(d.mass[static_cast<size_t>(2 * (i - i_lo))]);
    double inv = 1.0 / total.value();
    for (double& x : d.mass) x *= inv;
    return d;
}

double drift_fixed_k(int n, int level, int k) {
    check_dimension(n);
    check_level(n, level);
    check_strength(n, k, 1);

    // Evaluating terms independently in log space leaves a common-mode
    // relative error of order 1e-13 that is visible when the gain is large;
    // the renormalized transition does not have that bias.
    TransitionDistribution t = hypergeometric_transition(n, level, k);
    Kahan acc;
    for (int j = t.hi(); j > level; --j) acc.add((j - level) * t.probability(j));
    return acc.value();
}

namespace {

// Sweeps binomial-shaped weights outward from the anchor index, stopping a
// side once its remaining geometric tail is provably below eps_side. `ratio`
// maps k to pmf(k+1)/pmf(k).
template <typename RatioFn>
WeightVector sweep_weights(int lo_bound, int hi_bound, int anchor, double anchor_value,
                           double tail_epsilon, RatioFn ratio) {
    std::vector<double> up, down;  // values at anchor..hi and anchor-1..lo
    up.push_back(anchor_value);
    Kahan total;
    total.add(anchor_value);

    bool truncate = tail_epsilon > 0.0;
    double m = anchor_value;
    for (int k = anchor; k < hi_bound; ++k) {
        double r = ratio(k);
        m *= r;
        if (truncate && r < 0.5 && m <= tail_epsilon * total.value() * 0.125) break;
        up.push_back(m);
        total.add(m);
    }
    m = anchor_value;
    for (int k = anchor - 1; k >= lo_bound; --k) {
        double r = ratio(k);  // pmf(k+1)/pmf(k), so divide to step down
        m /= r;
        double inv = 1.0 / r;
        if (truncate && inv < 0.5 && m <= tail_epsilon * total.value() * 0.125) break;
        down.push_back(m);
        total.add(m);
    }

    WeightVector w;
    w.tail_epsilon = tail_epsilon;
    w.lo = anchor - static_cast<int>(down.size());
    w.weights.resize(down.size() + up.size());
    for (size_t i = 0; i < down.size(); ++i) w.weights[down.size() - 1 - i] = down[i];
    std::copy(up.begin(), up.end(), w.weights.begin() + static_cast<long>(down.size()));
    w.sum = total.value();
    return w;
}

WeightVector degenerate_weights(int n, int k, double tail_epsilon) {
    WeightVector w;
    w.tail_epsilon = tail_epsilon;
    if (tail_epsilon == 0.0) {
        w.lo = 0;
        w.weights.assign(static_cast<size_t>(n) + 1, 0.0);
        w.weights[static_cast<size_t>(k)] = 1.0;
    } else {
        w.lo = k;
        w.weights = {1.0};
    }
    w.sum = 1.0;
    return w;
}

}  // namespace

WeightVector binomial_weights(int n, double p, double tail_epsilon) {
    check_dimension(n);
    check_rate(p);
    if (!(tail_epsilon >= 0.0 && tail_epsilon <= 1e-9))
        throw DomainError("tail_epsilon must lie in [0, 1e-9]");

    if (p == 0.0) return degenerate_weights(n, 0, tail_epsilon);
    if (p == 1.0) return degenerate_weights(n, n, tail_epsilon);

    auto lf = acquire_log_factorials(n);
    double log_p = std::log(p);
    double log_q = std::log1p(-p);
    int mode = std::min(static_cast<int>((n + 1) * p), n);
    double anchor = std::exp(lf->log_choose(n, mode) + mode * log_p + (n - mode) * log_q);
    double odds = p / (1.0 - p);
    auto ratio = [n, odds](int k) {
        return (static_cast<double>(n - k) / static_cast<double>(k + 1)) * odds;
    };
    WeightVector w = sweep_weights(0, n, mode, anchor, tail_epsilon, ratio);
    if (tail_epsilon == 0.0 && (w.lo != 0 || w.hi() != n)) {
        // Pad underflowed-to-zero tails so the full n+1 entries are present.
        std::vector<double> full(static_cast<size_t>(n) + 1, 0.0);
        std::copy(w.weights.begin(), w.weights.end(), full.begin() + w.lo);
        w.lo = 0;
        w.weights = std::move(full);
    }
    return w;
}

WeightVector conditional_binomial_weights(int n, double p, double tail_epsilon) {
    check_dimension(n);
    check_rate(p);
    if (!(tail_epsilon >= 0.0 && tail_epsilon <= 1e-9))
        throw DomainError("tail_epsilon must lie in [0, 1e-9]");

    if (p < 1e-300) {
        // Flip-1 convention for p = 0 (and for rates below double support).
        WeightVector w;
        w.tail_epsilon = tail_epsilon;
        if (tail_epsilon == 0.0) {
            w.lo = 0;
            w.weights.assign(static_cast<size_t>(n) + 1, 0.0);
            w.weights[1] = 1.0;
        } else {
            w.lo = 1;
            w.weights = {1.0};
        }
        w.sum = 1.0;
        return w;
    }
    if (p == 1.0) return degenerate_weights(n, n, tail_epsilon);

    auto lf = acquire_log_factorials(n);
    double log_p = std::log(p);
    double log_q = std::log1p(-p);
    double norm = -std::expm1(n * log_q);  // 1 - (1-p)^n
    int mode = std::clamp(static_cast<int>((n + 1) * p), 1, n);
    double anchor =
        std::exp(lf->log_choose(n, mode) + mode * log_p + (n - mode) * log_q) / norm;
    double odds = p / (1.0 - p);
    auto ratio = [n, odds](int k) {
        return (static_cast<double>(n - k) / static_cast<double>(k + 1)) * odds;
    };
    WeightVector w = sweep_weights(1, n, mode, anchor, tail_epsilon, ratio);
    if (tail_epsilon == 0.0 && (w.lo != 0 || w.hi() != n)) {
        std::vector<double> full(static_cast<size_t>(n) + 1, 0.0);
        std::copy(w.weights.begin(), w.weights.end(), full.begin() + w.lo);
        w.lo = 0;
        w.weights = std::move(full);
    }
    return w;
}

TransitionDistribution mixed_transition(int n, int level, const WeightVector& w) {
    check_dimension(n);
    check_level(n, level);
    if (w.lo < 0 || w.hi() > n) throw DomainError("weight window outside [0, n]");

    auto lf = acquire_log_factorials(n);
    std::vector<double> acc(static_cast<size_t>(n) + 1, 0.0);
    int j_min = n, j_max = 0;
    for (int k = w.lo; k <= w.hi(); ++k) {
        double wk = w.weight(k);
        if (wk == 0.0) continue;
        if (k == 0) {
            acc[static_cast<size_t>(level)] += wk;
            j_min = std::min(j_min, level);
            j_max = std::max(j_max, level);
            continue;
        }
        int i_lo = std::max(0, k - level);
        int i_hi = std::min(k, n - level);
        j_min = std::min(j_min, level + 2 * i_lo - k);
        j_max = std::max(j_max, level + 2 * i_hi - k);
        int a = std::clamp(hyper_mode(n, level, k), i_lo, i_hi);
        double anchor = std::exp(hyper_log_pmf(*lf, n, level, k, a));
        double m = anchor;
        for (int i = a; i <= i_hi; ++i) {
            if (i > a) m *= hyper_ratio_up(n, level, k, i - 1);
            acc[static_cast<size_t>(level + 2 * i - k)] += wk * m;
        }
        m = anchor;
        for (int i = a - 1; i >= i_lo; --i) {
            m /= hyper_ratio_up(n, level, k, i);
            acc[static_cast<size_t>(level + 2 * i - k)] += wk * m;
        }
    }

    TransitionDistribution d;
    d.n = n;
    d.parent = level;
    d.lo = j_min;
    d.mass.assign(acc.begin() + j_min, acc.begin() + j_max + 1);
    Kahan total;
    for (double x : d.mass) total.add(x);
    double inv = 1.0 / total.value();
    for (double& x : d.mass) x *= inv;
    return d;
}

double drift_mixture(int n, int level, const WeightVector& w) {
    check_dimension(n);
    check_level(n, level);
    if (w.lo < 0 || w.hi() > n) throw DomainError("weight window outside [0, n]");

    auto lf = acquire_log_factorials(n);
    Kahan acc;
    for (int k = std::max(1, w.lo); k <= w.hi(); ++k) {
        double wk = w.weight(k);
        if (wk == 0.0) continue;
        acc.add(wk * strength_stats(*lf, n, level, k, nullptr).drift);
    }
    return acc.value();
}

double improvement_probability(const TransitionDistribution& d) {
    Kahan acc;
    for (int j = d.hi(); j > d.parent; --j) acc.add(d.probability(j));
    return acc.value();
}

StrengthStats strength_stats(const LogFactorialTable& lf, int n, int level, int k,
                             const double* downstream) {
    StrengthStats s;
    int i_lo = std::max(k / 2 + 1, k - level);  // first count with positive gain
    int i_hi = std::min(k, n - level);
    if (k <= 0 || i_lo > i_hi) return s;

    int a = std::clamp(hyper_mode(n, level, k), i_lo, i_hi);
    double anchor = std::exp(hyper_log_pmf(lf, n, level, k, a));
    if (anchor == 0.0) return s;  // entire improving tail below double range

    Kahan improve, weighted, drift;
    double m = anchor;
    for (int i = a; i <= i_hi; ++i) {
        if (i > a) m *= hyper_ratio_up(n, level, k, i - 1);
        improve.add(m);
        drift.add(m * (2 * i - k));
        if (downstream) weighted.add(m * downstream[level + 2 * i - k]);
    }
    m = anchor;
    for (int i = a - 1; i >= i_lo; --i) {
        m /= hyper_ratio_up(n, level, k, i);
        improve.add(m);
        drift.add(m * (2 * i - k));
        if (downstream) weighted.add(m * downstream[level + 2 * i - k]);
    }
    s.improve = improve.value();
    s.weighted = weighted.value();
    s.drift = drift.value();
    return s;
}

}  // namespace onemax
