#include "policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "runtime.hpp"

namespace onemax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieRel = 1e-12;
constexpr double kRateFloor = 1e-12;  // lower search bracket for interior rates
constexpr double kMinImprovement = 1e-300;

void check_dimension(int n) {
    if (n < 1) throw DomainError("dimension must be >= 1, got " + std::to_string(n));
}

// Smallest (or largest) index whose value lies within relative kTieRel of the
// best. `minimize` selects the direction of optimality.
int pick_index(const std::vector<double>& cand, int k_lo, int k_hi, bool minimize,
               TieBreak tie_break) {
    double best = minimize ? kInf : -kInf;
    for (int k = k_lo; k <= k_hi; ++k) {
        if (minimize ? cand[static_cast<size_t>(k)] < best : cand[static_cast<size_t>(k)] > best)
            best = cand[static_cast<size_t>(k)];
    }
    double bound = minimize ? best * (1.0 + kTieRel) : best * (1.0 - kTieRel);
    if (tie_break == TieBreak::SmallestK) {
        for (int k = k_lo; k <= k_hi; ++k) {
            double v = cand[static_cast<size_t>(k)];
            if (minimize ? v <= bound : v >= bound) return k;
        }
    } else {
        for (int k = k_hi; k >= k_lo; --k) {
            double v = cand[static_cast<size_t>(k)];
            if (minimize ? v <= bound : v >= bound) return k;
        }
    }
    return k_lo;  // unreachable: the best index itself qualifies
}

void fill_stats(const LogFactorialTable& lf, int n, int level, const double* downstream,
                std::vector<StrengthStats>& st) {
    st.resize(static_cast<size_t>(n) + 1);
    st[0] = StrengthStats{};
    for (int k = 1; k <= n; ++k)
        st[static_cast<size_t>(k)] = strength_stats(lf, n, level, k, downstream);
}

WeightVector family_weights(RateFamily family, int n, double p, double tail_epsilon) {
    return family == RateFamily::Binomial ? binomial_weights(n, p, tail_epsilon)
                                          : conditional_binomial_weights(n, p, tail_epsilon);
}

// Self-loop-resolved remaining time at one level for rate p, combining the
// precomputed per-strength aggregates: (S + sum w_k*weighted_k)/(sum w_k*improve_k).
double rate_time(const std::vector<StrengthStats>& st, RateFamily family, int n, double p,
                 double tail_epsilon) {
    WeightVector w = family_weights(family, n, p, tail_epsilon);
    Kahan improve, weighted;
    for (int k = std::max(1, w.lo); k <= w.hi(); ++k) {
        double wk = w.weight(k);
        if (wk == 0.0) continue;
        improve.add(wk * st[static_cast<size_t>(k)].improve);
        weighted.add(wk * st[static_cast<size_t>(k)].weighted);
    }
    if (improve.value() < kMinImprovement) return kInf;
    return (w.sum + weighted.value()) / improve.value();
}

double rate_drift(const std::vector<StrengthStats>& st, RateFamily family, int n, double p,
                  double tail_epsilon) {
    WeightVector w = family_weights(family, n, p, tail_epsilon);
    Kahan drift;
    for (int k = std::max(1, w.lo); k <= w.hi(); ++k) {
        double wk = w.weight(k);
        if (wk == 0.0) continue;
        drift.add(wk * st[static_cast<size_t>(k)].drift);
    }
    return drift.value();
}

int drift_argmax(const std::vector<StrengthStats>& st, int n) {
    int arg = 1;
    double best = st[1].drift;
    for (int k = 2; k <= n; ++k) {
        if (st[static_cast<size_t>(k)].drift > best) {
            best = st[static_cast<size_t>(k)].drift;
            arg = k;
        }
    }
    return arg;
}

PolicyMeta rate_meta(RateFamily family, PolicyMode mode, double p_min,
                     const OptimizerConfig& cfg) {
    PolicyMeta meta;
    meta.kind = PolicyKind::Rates;
    meta.family = family;
    meta.mode = mode;
    meta.p_min = p_min;
    meta.grid_points = cfg.grid_points;
    meta.refine_tolerance = cfg.refine_tolerance;
    meta.tail_epsilon = cfg.tail_epsilon;
    return meta;
}

}  // namespace

PolicyTable k_drift_table(int n, TieBreak tie_break) {
    check_dimension(n);
    auto lf = acquire_log_factorials(n);
    PolicyTable t;
    t.n = n;
    t.meta.kind = PolicyKind::Strengths;
    t.meta.mode = PolicyMode::Drift;
    t.meta.tie_break = tie_break;
    t.values.resize(static_cast<size_t>(n));

    std::vector<double> cand(static_cast<size_t>(n) + 1);
    for (int level = 0; level < n; ++level) {
        for (int k = 1; k <= n; ++k)
            cand[static_cast<size_t>(k)] = strength_stats(*lf, n, level, k, nullptr).drift;
        t.values[static_cast<size_t>(level)] = pick_index(cand, 1, n, false, tie_break);
    }
    return t;
}

PolicyBuild k_opt_table(int n, TieBreak tie_break) {
    check_dimension(n);
    auto lf = acquire_log_factorials(n);
    PolicyBuild out;
    out.policy.n = n;
    out.policy.meta.kind = PolicyKind::Strengths;
    out.policy.meta.mode = PolicyMode::Opt;
    out.policy.meta.tie_break = tie_break;
    out.policy.values.resize(static_cast<size_t>(n));
    out.times.n = n;
    out.times.times.assign(static_cast<size_t>(n) + 1, 0.0);

    std::vector<double> cand(static_cast<size_t>(n) + 1);
    const double* downstream = out.times.times.data();
    for (int level = n - 1; level >= 0; --level) {
        for (int k = 1; k <= n; ++k) {
            StrengthStats s = strength_stats(*lf, n, level, k, downstream);
            cand[static_cast<size_t>(k)] =
                s.improve < kMinImprovement ? kInf : (1.0 + s.weighted) / s.improve;
        }
        int k_star = pick_index(cand, 1, n, true, tie_break);
        out.policy.values[static_cast<size_t>(level)] = k_star;
        out.times.times[static_cast<size_t>(level)] = cand[static_cast<size_t>(k_star)];
    }
    return out;
}

PolicyTable p_drift_table(int n, RateFamily family, double p_min, const OptimizerConfig& cfg) {
    check_dimension(n);
    cfg.validate();
    if (!(p_min >= 0.0 && p_min < 1.0)) throw DomainError("p_min must lie in [0,1)");

    auto lf = acquire_log_factorials(n);
    PolicyTable t;
    t.n = n;
    t.meta = rate_meta(family, PolicyMode::Drift, p_min, cfg);
    t.values.resize(static_cast<size_t>(n));

    double lo = std::max(family == RateFamily::Binomial ? 0.0 : p_min, kRateFloor);
    std::vector<StrengthStats> st;
    double prev = -1.0;
    for (int level = n - 1; level >= 0; --level) {
        fill_stats(*lf, n, level, nullptr, st);
        auto objective = [&](double p) { return -rate_drift(st, family, n, p, t.meta.tail_epsilon); };
        double seeds[2] = {static_cast<double>(drift_argmax(st, n)) / n, prev};
        ScalarMin m = minimize_scalar(objective, lo, 1.0, cfg,
                                      std::span<const double>(seeds, prev > 0.0 ? 2 : 1));
        double chosen_p = m.x;
        double chosen_drift = -m.value;
        if (family == RateFamily::ConditionalBinomial && p_min == 0.0) {
            double flip1 = st[1].drift;
            if (flip1 >= chosen_drift * (1.0 - kTieRel)) {
                chosen_p = 0.0;
                chosen_drift = flip1;
            }
        }
        t.values[static_cast<size_t>(level)] = chosen_p;
        prev = m.x;
    }
    return t;
}

PolicyBuild p_opt_table(int n, RateFamily family, double p_min, const OptimizerConfig& cfg) {
    check_dimension(n);
    cfg.validate();
    if (!(p_min >= 0.0 && p_min < 1.0)) throw DomainError("p_min must lie in [0,1)");

    auto lf = acquire_log_factorials(n);
    PolicyBuild out;
    out.policy.n = n;
    out.policy.meta = rate_meta(family, PolicyMode::Opt, p_min, cfg);
    out.policy.values.resize(static_cast<size_t>(n));
    out.times.n = n;
    out.times.times.assign(static_cast<size_t>(n) + 1, 0.0);

    double lo = std::max(family == RateFamily::Binomial ? 0.0 : p_min, kRateFloor);
    double tail = out.policy.meta.tail_epsilon;
    std::vector<StrengthStats> st;
    double prev = -1.0;
    for (int level = n - 1; level >= 0; --level) {
        fill_stats(*lf, n, level, out.times.times.data(), st);
        auto objective = [&](double p) { return rate_time(st, family, n, p, tail); };
        double seeds[2] = {static_cast<double>(drift_argmax(st, n)) / n, prev};
        ScalarMin m = minimize_scalar(objective, lo, 1.0, cfg,
                                      std::span<const double>(seeds, prev > 0.0 ? 2 : 1));
        double chosen_p = m.x;
        double chosen_t = m.value;
        if (family == RateFamily::ConditionalBinomial && p_min == 0.0) {
            double flip1 = st[1].improve < kMinImprovement
                               ? kInf
                               : (1.0 + st[1].weighted) / st[1].improve;
            if (flip1 <= chosen_t * (1.0 + kTieRel)) {
                chosen_p = 0.0;
                chosen_t = flip1;
            }
        }
        out.policy.values[static_cast<size_t>(level)] = chosen_p;
        out.times.times[static_cast<size_t>(level)] = chosen_t;
        prev = m.x;
    }
    return out;
}

PolicyTable back_table(int n, const OptimizerConfig& cfg) {
    if (n < 2) throw DomainError("back_table requires n >= 2");
    cfg.validate();

    auto lf = acquire_log_factorials(n);
    PolicyTable t;
    t.n = n;
    t.meta = rate_meta(RateFamily::Binomial, PolicyMode::Back, 0.0, cfg);
    t.values.resize(static_cast<size_t>(n));

    std::vector<StrengthStats> st;
    double prev = -1.0;
    for (int level = n - 1; level >= 0; --level) {
        if (2 * level >= n) {
            t.values[static_cast<size_t>(level)] = 1.0 / (2 * level + 2 - n);
            continue;
        }
        fill_stats(*lf, n, level, nullptr, st);
        auto objective = [&](double p) {
            return -rate_drift(st, RateFamily::Binomial, n, p, t.meta.tail_epsilon);
        };
        double seeds[2] = {static_cast<double>(drift_argmax(st, n)) / n, prev};
        ScalarMin m = minimize_scalar(objective, kRateFloor, 1.0, cfg,
                                      std::span<const double>(seeds, prev > 0.0 ? 2 : 1));
        t.values[static_cast<size_t>(level)] = m.x;
        prev = m.x;
    }
    return t;
}

PolicyTable static_strength_table(int n, int k) {
    check_dimension(n);
    if (k < 1 || k > n) throw DomainError("static strength must lie in [1, n]");
    PolicyTable t;
    t.n = n;
    t.meta.kind = PolicyKind::Strengths;
    t.meta.mode = PolicyMode::Static;
    t.meta.static_value = k;
    t.values.assign(static_cast<size_t>(n), static_cast<double>(k));
    return t;
}

PolicyTable static_rate_table(int n, RateFamily family, double p) {
    check_dimension(n);
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("static rate must lie in [0,1]");
    PolicyTable t;
    t.n = n;
    t.meta.kind = PolicyKind::Rates;
    t.meta.family = family;
    t.meta.mode = PolicyMode::Static;
    t.meta.static_value = p;
    t.values.assign(static_cast<size_t>(n), p);
    return t;
}

StaticOpt static_opt_rate(int n, RateFamily family, double p_min, const OptimizerConfig& cfg) {
    check_dimension(n);
    cfg.validate();
    if (!(p_min >= 0.0 && p_min < 1.0)) throw DomainError("p_min must lie in [0,1)");

    auto objective = [&](double p) {
        try {
            PolicyTable pol = static_rate_table(n, family, p);
            pol.meta.tail_epsilon = cfg.tail_epsilon;
            return total_expected_time(remaining_times(n, pol));
        } catch (const NoImprovementError&) {
            return kInf;
        }
    };
    double lo = std::max(family == RateFamily::Binomial ? 0.0 : p_min, kRateFloor);
    double seeds[2] = {1.0 / n, 2.0 / n};
    ScalarMin m = minimize_scalar(objective, lo, 1.0, cfg, std::span<const double>(seeds, 2));

    StaticOpt result{m.x, m.value};
    if (family == RateFamily::ConditionalBinomial && p_min == 0.0) {
        double flip1 = total_expected_time(remaining_times(n, static_strength_table(n, 1)));
        if (flip1 <= result.total_time * (1.0 + kTieRel)) result = StaticOpt{0.0, flip1};
    }
    return result;
}

ScalarMin minimize_scalar(const std::function<double(double)>& objective, double lo, double hi,
                          const OptimizerConfig& cfg, std::span<const double> extra_seeds) {
    cfg.validate();
    if (!(lo > 0.0 && lo < hi)) throw DomainError("minimize_scalar requires 0 < lo < hi");

    std::vector<double> xs;
    xs.reserve(static_cast<size_t>(cfg.grid_points) + extra_seeds.size());
    double llo = std::log(lo), lhi = std::log(hi);
    for (int j = 0; j < cfg.grid_points; ++j)
        xs.push_back(std::exp(llo + (lhi - llo) * j / (cfg.grid_points - 1)));
    xs.front() = lo;
    xs.back() = hi;
    for (double s : extra_seeds)
        if (s > lo && s < hi) xs.push_back(s);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    double best_x = 0.0, best_v = kInf;
    bool have_best = false;
    auto eval = [&](double x) {
        double v = objective(x);
        if (std::isnan(v)) v = kInf;
        if (!have_best || v < best_v || (v == best_v && x < best_x)) {
            best_x = x;
            best_v = v;
            have_best = true;
        }
        return v;
    };

    size_t bi = 0;
    double bv = kInf;
    std::vector<double> vs(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) {
        vs[i] = eval(xs[i]);
        if (vs[i] < bv) {
            bv = vs[i];
            bi = i;
        }
    }
    if (!std::isfinite(bv)) throw ConvergenceError("objective has no finite value on the grid");

    double a = bi == 0 ? xs.front() : xs[bi - 1];
    double b = bi + 1 == xs.size() ? xs.back() : xs[bi + 1];
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = eval(x1);
    double f2 = eval(x2);
    int iterations = 0;
    while (b - a > cfg.refine_tolerance) {
        if (++iterations > cfg.max_iterations)
            throw ConvergenceError("scalar minimization exceeded its iteration cap");
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = eval(x2);
        }
    }

    // Function values alone pin a flat minimum only to O(sqrt(eps)) in x; the
    // central-difference derivative recovers it to O(eps^(2/3)). Bisect the
    // derivative's sign change around the bracketed point; probes stay out of
    // the best-so-far tracking so their rounding noise cannot drag x away.
    double x0 = best_x;
    double window = 1e-4 * x0;
    double h = 6e-6 * x0;
    if (x0 - window > lo && x0 + window < hi) {
        auto slope = [&](double x) {
            double up = objective(x + h), down = objective(x - h);
            if (std::isnan(up) || std::isnan(down)) return std::numeric_limits<double>::quiet_NaN();
            return (up - down) / (2.0 * h);
        };
        double pa = x0 - window, pb = x0 + window;
        double ga = slope(pa), gb = slope(pb);
        if (std::isfinite(ga) && std::isfinite(gb) && ga < 0.0 && gb > 0.0) {
            bool ok = true;
            for (int i = 0; i < 64; ++i) {
                double mid = 0.5 * (pa + pb);
                if (mid <= pa || mid >= pb) break;
                double gm = slope(mid);
                if (!std::isfinite(gm)) {
                    ok = false;
                    break;
                }
                (gm < 0.0 ? pa : pb) = mid;
            }
            if (ok) {
                double xp = 0.5 * (pa + pb);
                double vp = objective(xp);
                if (std::isfinite(vp) && vp <= best_v + 1e-12 * std::abs(best_v))
                    return ScalarMin{xp, vp};
            }
        }
    }
    return ScalarMin{best_x, best_v};
}

}  // namespace onemax
