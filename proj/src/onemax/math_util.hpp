#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <vector>

namespace onemax {

// Kahan compensated accumulator. Used everywhere probabilities or weighted
// times are summed so that results stay reproducible across support sizes.
struct Kahan {
    double sum = 0.0;
    double c = 0.0;

    void add(double x) {
        double y = x - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

// Table of ln(i!) for i = 0..size-1, built by compensated summation of
// std::log so the values are identical on every platform (lgamma is not
// guaranteed to be correctly rounded and differs across libms).
class LogFactorialTable {
public:
    explicit LogFactorialTable(int size) : values_(static_cast<size_t>(size)) {
        Kahan acc;
        values_[0] = 0.0;
        for (int i = 1; i < size; ++i) {
            acc.add(std::log(static_cast<double>(i)));
            values_[static_cast<size_t>(i)] = acc.value();
        }
    }

    int size() const { return static_cast<int>(values_.size()); }

    double log_factorial(int i) const { return values_[static_cast<size_t>(i)]; }

    // ln C(a, b); -inf outside 0 <= b <= a so callers can exp() it safely.
    double log_choose(int a, int b) const {
        if (b < 0 || b > a || a < 0)
            return -std::numeric_limits<double>::infinity();
        // Symmetric form: same rounding for (a,b) and (a,a-b).
        return values_[static_cast<size_t>(a)] -
               (values_[static_cast<size_t>(b)] + values_[static_cast<size_t>(a - b)]);
    }

private:
    std::vector<double> values_;
};

// Shared grow-only cache. Tables are immutable; a request larger than the
// cached table builds a replacement while earlier holders keep theirs.
// Prefixes agree between builds because the cumulative sum is deterministic.
inline std::shared_ptr<const LogFactorialTable> acquire_log_factorials(int max_n) {
    static std::mutex mu;
    static std::shared_ptr<const LogFactorialTable> cached;
    int need = max_n + 1;
    std::lock_guard<std::mutex> lock(mu);
    if (!cached || cached->size() < need) {
        int size = 256;
        while (size < need) size *= 2;
        cached = std::make_shared<const LogFactorialTable>(size);
    }
    return cached;
}

}  // namespace onemax
