#include "onemax/onemax.h"

#include <exception>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "onemax/errors.hpp"
#include "onemax/policy.hpp"
#include "onemax/runtime.hpp"
#include "onemax/simulate.hpp"
#include "onemax/tables.hpp"

struct om_policy {
    onemax::PolicyTable table;
};

struct om_times {
    onemax::RemainingTimeTable table;
};

struct om_runs {
    std::vector<onemax::RunRecord> records;
};

namespace {

thread_local std::string t_error;

om_status fail(om_status code, const std::string& message) {
    t_error = message;
    return code;
}

// Runs the body and maps every library exception onto a status code. The
// body returns a status itself so argument checks can short-circuit.
template <typename Fn>
om_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const onemax::NoImprovementError& e) {
        return fail(OM_ENOIMPROVE, e.what());
    } catch (const onemax::ConvergenceError& e) {
        return fail(OM_ECONVERGE, e.what());
    } catch (const onemax::CapacityError& e) {
        return fail(OM_ECAPACITY, e.what());
    } catch (const onemax::DomainError& e) {
        return fail(OM_EDOMAIN, e.what());
    } catch (const std::bad_alloc&) {
        return fail(OM_ENOMEM, "out of memory");
    } catch (const std::exception& e) {
        return fail(OM_EINTERNAL, e.what());
    } catch (...) {
        return fail(OM_EINTERNAL, "unknown failure");
    }
}

onemax::RateFamily family_of(om_algo algo) {
    return algo == OM_ALGO_EA ? onemax::RateFamily::Binomial
                              : onemax::RateFamily::ConditionalBinomial;
}

const onemax::RunRecord* record_at(const om_runs* runs, int run) {
    if (run < 0 || static_cast<size_t>(run) >= runs->records.size()) return nullptr;
    return &runs->records[static_cast<size_t>(run)];
}

}  // namespace

extern "C" {

void om_policy_params_init(om_policy_params* params) {
    if (!params) return;
    params->p_min = 0.0;
    params->static_value = -1.0;
    params->tail_epsilon = onemax::kDefaultTailEpsilon;
    params->grid_points = 64;
    params->refine_tolerance = 1e-10;
    params->tie_break = OM_TIE_SMALLEST_K;
}

om_status om_policy_compute(om_algo algo, om_objective objective, int n,
                            const om_policy_params* params, om_policy** out) {
    if (!out) return fail(OM_EINVAL, "out must not be null");
    om_policy_params defaults;
    om_policy_params_init(&defaults);
    const om_policy_params& p = params ? *params : defaults;

    return guarded([&]() -> om_status {
        using namespace onemax;
        if (algo != OM_ALGO_RLS && algo != OM_ALGO_EA && algo != OM_ALGO_EA_RESAMPLING)
            return fail(OM_EINVAL, "unknown algorithm");
        if (p.tie_break != OM_TIE_SMALLEST_K && p.tie_break != OM_TIE_LARGEST_K)
            return fail(OM_EINVAL, "unknown tie_break");
        if (objective == OM_OBJECTIVE_BACK && algo != OM_ALGO_EA)
            return fail(OM_EINVAL, "objective 'back' is defined for the plain EA only");
        if (p.p_min != 0.0 && algo != OM_ALGO_EA_RESAMPLING)
            return fail(OM_EINVAL, "p_min applies to the resampling EA only");

        OptimizerConfig cfg;
        cfg.grid_points = p.grid_points;
        cfg.refine_tolerance = p.refine_tolerance;
        cfg.tail_epsilon = p.tail_epsilon;
        const TieBreak tie =
            p.tie_break == OM_TIE_LARGEST_K ? TieBreak::LargestK : TieBreak::SmallestK;

        PolicyTable table;
        if (algo == OM_ALGO_RLS) {
            switch (objective) {
                case OM_OBJECTIVE_DRIFT:
                    table = k_drift_table(n, tie);
                    break;
                case OM_OBJECTIVE_TIME:
                    table = k_opt_table(n, tie).policy;
                    break;
                case OM_OBJECTIVE_STATIC: {
                    if (p.static_value < 1.0)
                        return fail(OM_EINVAL, "a static strength in [1, n] is required");
                    const int k = static_cast<int>(p.static_value);
                    if (static_cast<double>(k) != p.static_value)
                        return fail(OM_EINVAL, "static strength must be an integer");
                    table = static_strength_table(n, k);
                    break;
                }
                default:
                    return fail(OM_EINVAL, "unknown objective");
            }
        } else {
            const RateFamily family = family_of(algo);
            const double p_min = algo == OM_ALGO_EA_RESAMPLING ? p.p_min : 0.0;
            switch (objective) {
                case OM_OBJECTIVE_DRIFT:
                    table = p_drift_table(n, family, p_min, cfg);
                    break;
                case OM_OBJECTIVE_TIME:
                    table = p_opt_table(n, family, p_min, cfg).policy;
                    break;
                case OM_OBJECTIVE_BACK:
                    table = back_table(n, cfg);
                    break;
                case OM_OBJECTIVE_STATIC:
                    if (p.static_value < 0.0) {
                        table = static_rate_table(n, family,
                                                  static_opt_rate(n, family, p_min, cfg).rate);
                        table.meta.p_min = p_min;
                    } else {
                        table = static_rate_table(n, family, p.static_value);
                    }
                    table.meta.tail_epsilon = p.tail_epsilon;
                    break;
                default:
                    return fail(OM_EINVAL, "unknown objective");
            }
        }
        *out = new om_policy{std::move(table)};
        return OM_OK;
    });
}

om_status om_policy_from_values(om_algo algo, int n, const double* values, om_policy** out) {
    if (!out || !values) return fail(OM_EINVAL, "values and out must not be null");
    return guarded([&]() -> om_status {
        using namespace onemax;
        if (n < 1) return fail(OM_EDOMAIN, "dimension must be >= 1");
        PolicyTable table;
        table.n = n;
        table.values.assign(values, values + n);
        if (algo == OM_ALGO_RLS) {
            table.meta.kind = PolicyKind::Strengths;
            for (int level = 0; level < n; ++level) {
                const double v = table.values[static_cast<size_t>(level)];
                const int k = static_cast<int>(v);
                if (static_cast<double>(k) != v || k < 1 || k > n)
                    return fail(OM_EDOMAIN, "strengths must be integers in [1, n]");
            }
        } else if (algo == OM_ALGO_EA || algo == OM_ALGO_EA_RESAMPLING) {
            table.meta.kind = PolicyKind::Rates;
            table.meta.family = family_of(algo);
            for (int level = 0; level < n; ++level) {
                const double v = table.values[static_cast<size_t>(level)];
                if (!(v >= 0.0 && v <= 1.0)) return fail(OM_EDOMAIN, "rates must lie in [0, 1]");
            }
        } else {
            return fail(OM_EINVAL, "unknown algorithm");
        }
        table.meta.mode = PolicyMode::Static;
        *out = new om_policy{std::move(table)};
        return OM_OK;
    });
}

om_status om_policy_dimension(const om_policy* policy, int* out) {
    if (!policy || !out) return fail(OM_EINVAL, "policy and out must not be null");
    *out = policy->table.n;
    return OM_OK;
}

om_status om_policy_values(const om_policy* policy, double* out) {
    if (!policy || !out) return fail(OM_EINVAL, "policy and out must not be null");
    for (size_t i = 0; i < policy->table.values.size(); ++i) out[i] = policy->table.values[i];
    return OM_OK;
}

om_status om_policy_is_rates(const om_policy* policy, int* out) {
    if (!policy || !out) return fail(OM_EINVAL, "policy and out must not be null");
    *out = policy->table.meta.kind == onemax::PolicyKind::Rates ? 1 : 0;
    return OM_OK;
}

void om_policy_free(om_policy* policy) { delete policy; }

om_status om_remaining_times(const om_policy* policy, om_times** out) {
    if (!policy || !out) return fail(OM_EINVAL, "policy and out must not be null");
    return guarded([&]() -> om_status {
        *out = new om_times{onemax::remaining_times(policy->table.n, policy->table)};
        return OM_OK;
    });
}

om_status om_times_dimension(const om_times* times, int* out) {
    if (!times || !out) return fail(OM_EINVAL, "times and out must not be null");
    *out = times->table.n;
    return OM_OK;
}

om_status om_times_values(const om_times* times, double* out) {
    if (!times || !out) return fail(OM_EINVAL, "times and out must not be null");
    for (size_t i = 0; i < times->table.times.size(); ++i) out[i] = times->table.times[i];
    return OM_OK;
}

om_status om_times_total(const om_times* times, double* out) {
    if (!times || !out) return fail(OM_EINVAL, "times and out must not be null");
    return guarded([&]() -> om_status {
        *out = onemax::total_expected_time(times->table);
        return OM_OK;
    });
}

om_status om_times_normalized(const om_times* times, double* out) {
    if (!times || !out) return fail(OM_EINVAL, "times and out must not be null");
    return guarded([&]() -> om_status {
        *out = onemax::normalized_time(onemax::total_expected_time(times->table), times->table.n);
        return OM_OK;
    });
}

om_status om_times_gradient(const om_times* times, double* out) {
    if (!times || !out) return fail(OM_EINVAL, "times and out must not be null");
    return guarded([&]() -> om_status {
        const std::vector<double> g = onemax::remaining_time_gradient(times->table);
        for (size_t i = 0; i < g.size(); ++i) out[i] = g[i];
        return OM_OK;
    });
}

void om_times_free(om_times* times) { delete times; }

om_status om_simulate(const om_policy* policy, int runs, uint64_t master_seed,
                      uint64_t budget_cap, om_runs** out) {
    if (!policy || !out) return fail(OM_EINVAL, "policy and out must not be null");
    return guarded([&]() -> om_status {
        if (runs < 1) return fail(OM_EDOMAIN, "at least one run is required");
        *out = new om_runs{onemax::run_batch(policy->table, runs, master_seed, budget_cap)};
        return OM_OK;
    });
}

om_status om_runs_count(const om_runs* runs, int* out) {
    if (!runs || !out) return fail(OM_EINVAL, "runs and out must not be null");
    *out = static_cast<int>(runs->records.size());
    return OM_OK;
}

om_status om_runs_seed(const om_runs* runs, int run, uint64_t* out) {
    if (!runs || !out) return fail(OM_EINVAL, "runs and out must not be null");
    const onemax::RunRecord* rec = record_at(runs, run);
    if (!rec) return fail(OM_EDOMAIN, "run index out of range");
    *out = rec->seed;
    return OM_OK;
}

om_status om_runs_summary(const om_runs* runs, int run, int* reached_optimum,
                          uint64_t* hit_optimum_at, uint64_t* total_evaluations) {
    if (!runs) return fail(OM_EINVAL, "runs must not be null");
    const onemax::RunRecord* rec = record_at(runs, run);
    if (!rec) return fail(OM_EDOMAIN, "run index out of range");
    if (reached_optimum) *reached_optimum = rec->reached_optimum ? 1 : 0;
    if (hit_optimum_at) *hit_optimum_at = rec->hit_optimum_at;
    if (total_evaluations) *total_evaluations = rec->total_evaluations;
    return OM_OK;
}

om_status om_runs_event_count(const om_runs* runs, int run, int* out) {
    if (!runs || !out) return fail(OM_EINVAL, "runs and out must not be null");
    const onemax::RunRecord* rec = record_at(runs, run);
    if (!rec) return fail(OM_EDOMAIN, "run index out of range");
    *out = static_cast<int>(rec->events.size());
    return OM_OK;
}

om_status om_runs_event(const om_runs* runs, int run, int index, uint64_t* evaluations,
                        int* fitness) {
    if (!runs || !evaluations || !fitness)
        return fail(OM_EINVAL, "runs, evaluations and fitness must not be null");
    const onemax::RunRecord* rec = record_at(runs, run);
    if (!rec) return fail(OM_EDOMAIN, "run index out of range");
    if (index < 0 || static_cast<size_t>(index) >= rec->events.size())
        return fail(OM_EDOMAIN, "event index out of range");
    *evaluations = rec->events[static_cast<size_t>(index)].first;
    *fitness = rec->events[static_cast<size_t>(index)].second;
    return OM_OK;
}

om_status om_runs_budget_stats(const om_runs* runs, uint64_t budget, double* mean, double* stddev,
                               uint64_t* count) {
    if (!runs || !mean || !stddev || !count)
        return fail(OM_EINVAL, "runs, mean, stddev and count must not be null");
    return guarded([&]() -> om_status {
        const auto stats = onemax::fixed_budget(runs->records, {budget});
        *mean = stats[0].mean;
        *stddev = stats[0].stddev;
        *count = stats[0].count;
        return OM_OK;
    });
}

om_status om_runs_target_stats(const om_runs* runs, int target, double* mean, double* stddev,
                               uint64_t* count, uint64_t* censored) {
    if (!runs || !mean || !stddev || !count || !censored)
        return fail(OM_EINVAL, "runs, mean, stddev, count and censored must not be null");
    return guarded([&]() -> om_status {
        const auto stats = onemax::fixed_target(runs->records, {target});
        *mean = stats[0].mean;
        *stddev = stats[0].stddev;
        *count = stats[0].count;
        *censored = stats[0].censored;
        return OM_OK;
    });
}

void om_runs_free(om_runs* runs) { delete runs; }

const char* om_last_error(void) { return t_error.c_str(); }

const char* om_version(void) { return "1.0.0"; }

}  // extern "C"
