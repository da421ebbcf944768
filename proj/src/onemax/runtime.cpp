#include "runtime.hpp"

#include <cmath>
#include <string>

#include "errors.hpp"
#include "kernel.hpp"
#include "math_util.hpp"

namespace onemax {

namespace {

constexpr double kMinImprovement = 1e-300;

void check_table_shape(int n, const PolicyTable& policy) {
    if (n < 1) throw DomainError("dimension must be >= 1, got " + std::to_string(n));
    if (policy.n != n)
        throw DomainError("policy dimension " + std::to_string(policy.n) +
                          " does not match requested dimension " + std::to_string(n));
    if (policy.values.size() != static_cast<size_t>(n))
        throw DomainError("policy table must hold exactly n per-level values");
}

}  // namespace

RemainingTimeTable remaining_times(int n, const PolicyTable& policy,
                                   const RemainingTimeTable* downstream) {
    check_table_shape(n, policy);
    if (downstream) {
        if (downstream->n != n || downstream->times.size() != static_cast<size_t>(n) + 1)
            throw DomainError("downstream time table has the wrong dimension");
    }

    auto lf = acquire_log_factorials(n);
    RemainingTimeTable out;
    out.n = n;
    out.times.assign(static_cast<size_t>(n) + 1, 0.0);
    const double* src = downstream ? downstream->times.data() : out.times.data();

    for (int level = n - 1; level >= 0; --level) {
        MutationLaw law = policy.law_at(level);
        double loop_weight, improve, weighted;
        if (law.kind == MutationLaw::Kind::Deterministic) {
            StrengthStats s = strength_stats(*lf, n, level, law.strength, src);
            loop_weight = 1.0;
            improve = s.improve;
            weighted = s.weighted;
        } else {
            WeightVector w = law.weights(policy.meta.tail_epsilon);
            Kahan imp, wt;
            for (int k = std::max(1, w.lo); k <= w.hi(); ++k) {
                double wk = w.weight(k);
                if (wk == 0.0) continue;
                StrengthStats s = strength_stats(*lf, n, level, k, src);
                imp.add(wk * s.improve);
                wt.add(wk * s.weighted);
            }
            loop_weight = w.sum;
            improve = imp.value();
            weighted = wt.value();
        }
        if (improve < kMinImprovement)
            throw NoImprovementError(level, "policy cannot improve from fitness level " +
                                                std::to_string(level));
        out.times[static_cast<size_t>(level)] = (loop_weight + weighted) / improve;
    }
    return out;
}

double total_expected_time(const RemainingTimeTable& times) {
    int n = times.n;
    if (n < 1) throw DomainError("time table dimension must be >= 1");
    if (times.times.size() != static_cast<size_t>(n) + 1)
        throw DomainError("time table must hold n+1 entries");

    auto lf = acquire_log_factorials(n);
    const double log_half_pow = n * std::log(2.0);
    Kahan total;
    for (int level = 0; level <= n; ++level)
        total.add(std::exp(lf->log_choose(n, level) - log_half_pow) *
                  times.times[static_cast<size_t>(level)]);
    return total.value();
}

double normalized_time(double total_time, int n) {
    if (n < 2) throw DomainError("normalization requires n >= 2");
    return total_time / (n * std::log(static_cast<double>(n)));
}

std::vector<double> remaining_time_gradient(const RemainingTimeTable& times) {
    int n = times.n;
    if (n < 1 || times.times.size() != static_cast<size_t>(n) + 1)
        throw DomainError("time table must hold n+1 entries");
    std::vector<double> grad(static_cast<size_t>(n));
    for (int level = 1; level <= n; ++level)
        grad[static_cast<size_t>(level - 1)] =
            times.times[static_cast<size_t>(level)] - times.times[static_cast<size_t>(level - 1)];
    return grad;
}

std::vector<double> init_distribution(int n) {
    if (n < 1) throw DomainError("dimension must be >= 1, got " + std::to_string(n));
    auto lf = acquire_log_factorials(n);
    const double log_half_pow = n * std::log(2.0);
    std::vector<double> dist(static_cast<size_t>(n) + 1);
    for (int level = 0; level <= n; ++level)
        dist[static_cast<size_t>(level)] = std::exp(lf->log_choose(n, level) - log_half_pow);
    return dist;
}

}  // namespace onemax
