#include "oracle.hpp"

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace onemax {

namespace {

void check_capacity(int n, int limit, const char* what) {
    if (n < 1 || n > limit)
        throw CapacityError(std::string(what) + " supports 1 <= n <= " + std::to_string(limit) +
                            ", got " + std::to_string(n));
}

Rational rational_pow(const Rational& base, int exponent) {
    Rational result = 1;
    for (int i = 0; i < exponent; ++i) result *= base;
    return result;
}

// Next bit mask with the same popcount (Gosper). Caller stops once the mask
// no longer fits in n bits.
uint32_t next_mask(uint32_t v) {
    uint32_t c = v & (0u - v);
    uint32_t r = v + c;
    return r | (((v ^ r) >> 2) / c);
}

template <typename Fn>
void for_each_mask(int n, int k, Fn&& fn) {
    if (k == 0) {
        fn(0u);
        return;
    }
    uint32_t limit = 1u << n;
    for (uint32_t v = (1u << k) - 1; v < limit; v = next_mask(v)) fn(v);
}

ExactLaw law_at(const ExactPolicy& policy, int level) {
    return policy.laws[static_cast<size_t>(level)];
}

}  // namespace

Integer exact_binomial(int a, int b) {
    if (b < 0 || b > a || a < 0) return 0;
    Integer result = 1;
    for (int i = 1; i <= b; ++i) {
        result *= a - b + i;
        result /= i;  // exact: product of i consecutive integers is divisible by i!
    }
    return result;
}

std::map<int, Rational> exact_transition(int n, int level, int k) {
    check_capacity(n, 20, "exact_transition");
    if (level < 0 || level > n) throw DomainError("level out of range");
    if (k < 0 || k > n) throw DomainError("strength out of range");

    uint32_t parent = (1u << level) - 1;
    std::map<int, Integer> counts;
    for_each_mask(n, k, [&](uint32_t flips) {
        counts[std::popcount(parent ^ flips)] += 1;
    });
    Integer total = exact_binomial(n, k);
    std::map<int, Rational> law;
    for (const auto& [fitness, count] : counts) law[fitness] = Rational(count, total);
    return law;
}

ExactPolicy ExactPolicy::strengths(int n, const std::vector<int>& ks) {
    if (n < 1) throw DomainError("dimension must be >= 1");
    if (ks.size() != static_cast<size_t>(n)) throw DomainError("need one strength per level");
    ExactPolicy p;
    p.n = n;
    p.laws.resize(static_cast<size_t>(n));
    for (int l = 0; l < n; ++l) {
        if (ks[static_cast<size_t>(l)] < 1 || ks[static_cast<size_t>(l)] > n)
            throw DomainError("strength out of [1, n]");
        p.laws[static_cast<size_t>(l)] = ExactLaw{ExactLaw::Kind::Deterministic,
                                                  ks[static_cast<size_t>(l)], Rational(0)};
    }
    return p;
}

ExactPolicy ExactPolicy::rates(int n, RateFamily family, const std::vector<Rational>& ps) {
    if (n < 1) throw DomainError("dimension must be >= 1");
    if (ps.size() != static_cast<size_t>(n)) throw DomainError("need one rate per level");
    ExactLaw::Kind kind = family == RateFamily::Binomial ? ExactLaw::Kind::Binomial
                                                         : ExactLaw::Kind::ConditionalBinomial;
    ExactPolicy p;
    p.n = n;
    p.laws.resize(static_cast<size_t>(n));
    for (int l = 0; l < n; ++l) {
        const Rational& rate = ps[static_cast<size_t>(l)];
        if (rate < 0 || rate > 1) throw DomainError("rate out of [0, 1]");
        if (kind == ExactLaw::Kind::Binomial && rate == 0)
            throw DomainError("binomial rate 0 never improves");
        p.laws[static_cast<size_t>(l)] = ExactLaw{kind, 1, rate};
    }
    return p;
}

ExactPolicy ExactPolicy::from_table(const PolicyTable& table) {
    if (table.meta.kind != PolicyKind::Strengths)
        throw DomainError("only strength tables convert exactly; build rate policies from rationals");
    std::vector<int> ks(static_cast<size_t>(table.n));
    for (int l = 0; l < table.n; ++l) ks[static_cast<size_t>(l)] = table.strength_at(l);
    return strengths(table.n, ks);
}

std::vector<Rational> exact_weights(const ExactLaw& law, int n) {
    std::vector<Rational> w(static_cast<size_t>(n) + 1, Rational(0));
    switch (law.kind) {
        case ExactLaw::Kind::Deterministic:
            if (law.strength < 0 || law.strength > n) throw DomainError("strength out of range");
            w[static_cast<size_t>(law.strength)] = 1;
            break;
        case ExactLaw::Kind::Binomial: {
            Rational q = Rational(1) - law.rate;
            for (int k = 0; k <= n; ++k)
                w[static_cast<size_t>(k)] =
                    Rational(exact_binomial(n, k)) * rational_pow(law.rate, k) * rational_pow(q, n - k);
            break;
        }
        case ExactLaw::Kind::ConditionalBinomial: {
            if (law.rate == 0) {
                w[1] = 1;
                break;
            }
            Rational q = Rational(1) - law.rate;
            Rational norm = Rational(1) - rational_pow(q, n);
            for (int k = 1; k <= n; ++k)
                w[static_cast<size_t>(k)] = Rational(exact_binomial(n, k)) *
                                            rational_pow(law.rate, k) * rational_pow(q, n - k) / norm;
            break;
        }
    }
    return w;
}

std::map<int, Rational> exact_mixture(int n, int level, const ExactLaw& law) {
    std::vector<Rational> w = exact_weights(law, n);
    std::map<int, Rational> mixture;
    for (int k = 0; k <= n; ++k) {
        if (w[static_cast<size_t>(k)] == 0) continue;
        for (const auto& [fitness, prob] : exact_transition(n, level, k))
            mixture[fitness] += w[static_cast<size_t>(k)] * prob;
    }
    return mixture;
}

std::vector<Rational> exact_remaining_times(const ExactPolicy& policy) {
    check_capacity(policy.n, 16, "exact_remaining_times");
    int n = policy.n;
    std::vector<Rational> times(static_cast<size_t>(n) + 1, Rational(0));
    for (int level = n - 1; level >= 0; --level) {
        std::map<int, Rational> q = exact_mixture(n, level, law_at(policy, level));
        Rational improve = 0, weighted = 0;
        for (const auto& [fitness, prob] : q) {
            if (fitness <= level) continue;
            improve += prob;
            weighted += prob * times[static_cast<size_t>(fitness)];
        }
        if (improve == 0)
            throw NoImprovementError(level, "exact policy cannot improve from level " +
                                                std::to_string(level));
        times[static_cast<size_t>(level)] = (Rational(1) + weighted) / improve;
    }
    return times;
}

Rational exact_total_time(const ExactPolicy& policy) {
    std::vector<Rational> times = exact_remaining_times(policy);
    int n = policy.n;
    Integer denom = Integer(1) << n;
    Rational total = 0;
    for (int level = 0; level <= n; ++level)
        total += Rational(exact_binomial(n, level), denom) * times[static_cast<size_t>(level)];
    return total;
}

ExhaustiveResult exhaustive_optimal_policy(int n) {
    check_capacity(n, 6, "exhaustive_optimal_policy");

    // Per (level, strength) improvement data, shared across all candidates.
    struct Arm {
        Rational improve;
        std::vector<std::pair<int, Rational>> up;  // (target fitness, probability)
    };
    std::vector<std::vector<Arm>> arms(static_cast<size_t>(n));
    for (int level = 0; level < n; ++level) {
        arms[static_cast<size_t>(level)].resize(static_cast<size_t>(n) + 1);
        for (int k = 1; k <= n; ++k) {
            Arm& arm = arms[static_cast<size_t>(level)][static_cast<size_t>(k)];
            for (const auto& [fitness, prob] : exact_transition(n, level, k)) {
                if (fitness <= level) continue;
                arm.improve += prob;
                arm.up.emplace_back(fitness, prob);
            }
        }
    }

    Integer denom = Integer(1) << n;
    std::vector<Rational> times(static_cast<size_t>(n) + 1, Rational(0));
    std::vector<int> strengths(static_cast<size_t>(n), 0);
    ExhaustiveResult best;
    bool have_best = false;

    // Levels are filled from n-1 downward; each level's time depends only on
    // the suffix already chosen. Strengths are tried in ascending order, so
    // with strict improvement the first optimum found is the smallest-k one.
    auto recurse = [&](auto&& self, int level) -> void {
        if (level < 0) {
            Rational total = 0;
            for (int l = 0; l < n; ++l)
                total += Rational(exact_binomial(n, l), denom) * times[static_cast<size_t>(l)];
            if (!have_best || total < best.total) {
                best.total = total;
                best.strengths = strengths;
                have_best = true;
            }
            return;
        }
        for (int k = 1; k <= n; ++k) {
            const Arm& arm = arms[static_cast<size_t>(level)][static_cast<size_t>(k)];
            if (arm.improve == 0) continue;  // infinite expected time
            Rational weighted = 0;
            for (const auto& [fitness, prob] : arm.up)
                weighted += prob * times[static_cast<size_t>(fitness)];
            times[static_cast<size_t>(level)] = (Rational(1) + weighted) / arm.improve;
            strengths[static_cast<size_t>(level)] = k;
            self(self, level - 1);
        }
    };
    recurse(recurse, n - 1);
    return best;
}

std::vector<Rational> full_state_chain_times(const ExactPolicy& policy) {
    check_capacity(policy.n, 10, "full_state_chain_times");
    int n = policy.n;
    uint32_t states = 1u << n;

    // Flip masks grouped by popcount, and exact choose values.
    std::vector<std::vector<uint32_t>> masks_by_pop(static_cast<size_t>(n) + 1);
    for (int d = 0; d <= n; ++d)
        for_each_mask(n, d, [&](uint32_t m) { masks_by_pop[static_cast<size_t>(d)].push_back(m); });
    std::vector<Integer> choose(static_cast<size_t>(n) + 1);
    for (int d = 0; d <= n; ++d) choose[static_cast<size_t>(d)] = exact_binomial(n, d);

    std::vector<Rational> hit(states, Rational(0));  // per-state hitting time
    std::vector<Rational> by_level(static_cast<size_t>(n) + 1, Rational(0));

    for (int level = n - 1; level >= 0; --level) {
        std::vector<Rational> w = exact_weights(law_at(policy, level), n);
        const std::vector<uint32_t>& class_states = masks_by_pop[static_cast<size_t>(level)];
        size_t m = class_states.size();
        std::vector<int> index(states, -1);
        for (size_t i = 0; i < m; ++i) index[class_states[i]] = static_cast<int>(i);

        // Row i: (1 - stay_i) T(s_i) - sum_j inclass P(s_i -> s_j) T(s_j) = b_i
        std::vector<std::vector<Rational>> A(m, std::vector<Rational>(m, Rational(0)));
        std::vector<Rational> b(m, Rational(1));
        for (size_t i = 0; i < m; ++i) {
            uint32_t s = class_states[i];
            Rational stay = 0;
            for (int d = 0; d <= n; ++d) {
                if (w[static_cast<size_t>(d)] == 0) continue;
                Rational per_mask = w[static_cast<size_t>(d)] / Rational(choose[static_cast<size_t>(d)]);
                for (uint32_t f : masks_by_pop[static_cast<size_t>(d)]) {
                    uint32_t t = s ^ f;
                    int ft = std::popcount(t);
                    if (ft > level)
                        b[i] += per_mask * hit[t];
                    else if (ft < level)
                        stay += per_mask;  // rejected offspring
                    else if (t == s)
                        stay += per_mask;  // offspring equals parent (d = 0)
                    else
                        A[i][static_cast<size_t>(index[t])] -= per_mask;
                }
            }
            A[i][i] = Rational(1) - stay;
        }

        // Scale to integers, then fraction-free (Bareiss) elimination.
        Integer scale_a = 1, scale_b = 1;
        for (size_t i = 0; i < m; ++i) {
            for (size_t j = 0; j < m; ++j) scale_a = lcm(scale_a, denominator(A[i][j]));
        }
        for (size_t i = 0; i < m; ++i) {
            Rational scaled = Rational(scale_a) * b[i];
            scale_b = lcm(scale_b, denominator(scaled));
        }
        std::vector<std::vector<Integer>> U(m, std::vector<Integer>(m));
        std::vector<Integer> c(m);
        for (size_t i = 0; i < m; ++i) {
            for (size_t j = 0; j < m; ++j) {
                Rational scaled = A[i][j] * Rational(scale_a);
                U[i][j] = numerator(scaled);
            }
            Rational scaled = b[i] * Rational(scale_a) * Rational(scale_b);
            c[i] = numerator(scaled);
        }

        Integer prev = 1;
        for (size_t r = 0; r + 1 < m; ++r) {
            if (U[r][r] == 0) {
                size_t swap_row = r + 1;
                while (swap_row < m && U[swap_row][r] == 0) ++swap_row;
                if (swap_row == m) throw std::logic_error("singular within-class system");
                std::swap(U[r], U[swap_row]);
                std::swap(c[r], c[swap_row]);
            }
            for (size_t i = r + 1; i < m; ++i) {
                for (size_t j = r + 1; j < m; ++j) {
                    U[i][j] = U[i][j] * U[r][r] - U[i][r] * U[r][j];
                    U[i][j] /= prev;  // exact by the Bareiss identity
                }
                c[i] = c[i] * U[r][r] - U[i][r] * c[r];
                c[i] /= prev;
                U[i][r] = 0;
            }
            prev = U[r][r];
        }

        std::vector<Rational> z(m);
        for (size_t ri = m; ri-- > 0;) {
            Rational acc(c[ri]);
            for (size_t j = ri + 1; j < m; ++j) acc -= Rational(U[ri][j]) * z[j];
            if (U[ri][ri] == 0) throw std::logic_error("singular within-class system");
            z[ri] = acc / Rational(U[ri][ri]);
        }

        for (size_t i = 0; i < m; ++i) {
            Rational t = z[i] / Rational(scale_b);
            if (i > 0 && t != z[0] / Rational(scale_b))
                throw std::logic_error("equal-fitness states disagree on hitting time");
            hit[class_states[i]] = t;
        }
        by_level[static_cast<size_t>(level)] = z.empty() ? Rational(0) : z[0] / Rational(scale_b);
    }
    return by_level;
}

}  // namespace onemax
