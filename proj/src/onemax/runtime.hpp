#pragma once

#include <vector>

#include "tables.hpp"

namespace onemax {

// Expected remaining evaluations from each fitness level under a fixed policy,
// computed backward with self-loops resolved. When `downstream` is given its
// entries are used for the levels above the one being solved, which evaluates
// one sweep of the recurrence at a foreign fixed point instead of this
// policy's own.
RemainingTimeTable remaining_times(int n, const PolicyTable& policy,
                                   const RemainingTimeTable* downstream = nullptr);

// Expectation of the remaining time over a uniform random initial search
// point: sum over levels of C(n,l)/2^n * times[l].
double total_expected_time(const RemainingTimeTable& times);

// T / (n ln n), the coupon-collector yardstick. Requires n >= 2.
double normalized_time(double total_time, int n);

// First differences times[l] - times[l-1] for l in [1, n]; entry l-1 of the
// result. Negative entries flag levels whose remaining time grows as fitness
// improves.
std::vector<double> remaining_time_gradient(const RemainingTimeTable& times);

// P(initial fitness = l) for a uniform random bit string: C(n,l)/2^n.
std::vector<double> init_distribution(int n);

}  // namespace onemax
