#ifndef ONEMAX_ONEMAX_H
#define ONEMAX_ONEMAX_H

/*
 * C interface to the OneMax mutation-policy library.
 *
 * All functions that can fail return om_status and write results through out
 * parameters; handles are opaque and must be released with the matching
 * _free function. A failing call leaves every out parameter untouched and
 * stores a human-readable message retrievable with om_last_error() on the
 * same thread.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(__GNUC__)
#define OM_API __attribute__((visibility("default")))
#else
#define OM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum om_status {
    OM_OK = 0,
    OM_EINVAL = 1,     /* null pointer or invalid argument combination */
    OM_EDOMAIN = 2,    /* argument outside its documented range */
    OM_ENOIMPROVE = 3, /* policy cannot leave some reachable fitness level */
    OM_ECONVERGE = 4,  /* iterative optimization failed to converge */
    OM_ECAPACITY = 5,  /* request exceeds a hard size limit */
    OM_ENOMEM = 6,
    OM_EINTERNAL = 7
} om_status;

typedef enum om_algo {
    OM_ALGO_RLS = 0,          /* deterministic per-level mutation strength */
    OM_ALGO_EA = 1,           /* strength ~ Binomial(n, p) */
    OM_ALGO_EA_RESAMPLING = 2 /* strength ~ Binomial(n, p) conditioned on >= 1 */
} om_algo;

typedef enum om_objective {
    OM_OBJECTIVE_TIME = 0,   /* minimize expected remaining time (backward DP) */
    OM_OBJECTIVE_DRIFT = 1,  /* maximize expected one-step fitness gain */
    OM_OBJECTIVE_STATIC = 2, /* one fixed strength or rate for all levels */
    OM_OBJECTIVE_BACK = 3    /* rate 1/(2l+2-n) above n/2, drift below; EA only */
} om_objective;

typedef enum om_tie_break {
    OM_TIE_SMALLEST_K = 0,
    OM_TIE_LARGEST_K = 1
} om_tie_break;

typedef struct om_policy om_policy;
typedef struct om_times om_times;
typedef struct om_runs om_runs;

typedef struct om_policy_params {
    double p_min;            /* lower rate bound, resampling EA only (default 0) */
    double static_value;     /* strength or rate for OM_OBJECTIVE_STATIC; a
                                negative rate requests the optimal static rate */
    double tail_epsilon;     /* binomial weight truncation (default 1e-15) */
    int grid_points;         /* rate optimizer grid size (default 64) */
    double refine_tolerance; /* rate optimizer tolerance (default 1e-10) */
    int tie_break;           /* om_tie_break (default smallest) */
} om_policy_params;

/* Fills params with the defaults above. */
OM_API void om_policy_params_init(om_policy_params* params);

/*
 * Computes a per-level mutation policy for dimension n. params may be NULL
 * for all defaults. Rejected combinations: OM_OBJECTIVE_BACK with any algo
 * but OM_ALGO_EA; nonzero p_min outside OM_ALGO_EA_RESAMPLING; a static
 * strength below 1 for OM_ALGO_RLS (strengths have no optimal-static search).
 */
OM_API om_status om_policy_compute(om_algo algo, om_objective objective, int n,
                                   const om_policy_params* params, om_policy** out);

/*
 * Wraps caller-supplied per-level values (length n): strengths for
 * OM_ALGO_RLS (integers 1..n stored as doubles), otherwise rates in [0,1].
 */
OM_API om_status om_policy_from_values(om_algo algo, int n, const double* values,
                                       om_policy** out);

OM_API om_status om_policy_dimension(const om_policy* policy, int* out);
/* Copies n per-level values into out. */
OM_API om_status om_policy_values(const om_policy* policy, double* out);
/* 1 if the table holds rates, 0 if strengths. */
OM_API om_status om_policy_is_rates(const om_policy* policy, int* out);
OM_API void om_policy_free(om_policy* policy);

/*
 * Expected remaining optimization times under the policy, levels 0..n.
 * Fails with OM_ENOIMPROVE if some level cannot be improved from.
 */
OM_API om_status om_remaining_times(const om_policy* policy, om_times** out);

OM_API om_status om_times_dimension(const om_times* times, int* out);
/* Copies n+1 level times into out. */
OM_API om_status om_times_values(const om_times* times, double* out);
/* Expected optimization time from a uniform random start. */
OM_API om_status om_times_total(const om_times* times, double* out);
/* Total divided by n ln n; requires n >= 2. */
OM_API om_status om_times_normalized(const om_times* times, double* out);
/* Copies n per-level differences time(l) - time(l-1), l = 1..n, into out. */
OM_API om_status om_times_gradient(const om_times* times, double* out);
OM_API void om_times_free(om_times* times);

/*
 * Runs independent simulations of the policy (runs >= 1). Per-run seeds are
 * derived from master_seed, so equal arguments reproduce identical results.
 * budget_cap 0 selects a cap comfortably above the expected optimization
 * time; otherwise each run stops after budget_cap evaluations.
 */
OM_API om_status om_simulate(const om_policy* policy, int runs, uint64_t master_seed,
                             uint64_t budget_cap, om_runs** out);

OM_API om_status om_runs_count(const om_runs* runs, int* out);
OM_API om_status om_runs_seed(const om_runs* runs, int run, uint64_t* out);
/* Any out pointer may be NULL to skip that field. */
OM_API om_status om_runs_summary(const om_runs* runs, int run, int* reached_optimum,
                                 uint64_t* hit_optimum_at, uint64_t* total_evaluations);
OM_API om_status om_runs_event_count(const om_runs* runs, int run, int* out);
/* Event `index` of run `run`: evaluations used and the fitness reached. */
OM_API om_status om_runs_event(const om_runs* runs, int run, int index,
                               uint64_t* evaluations, int* fitness);
/* Mean/sample-stddev of the best fitness within `budget` evaluations. */
OM_API om_status om_runs_budget_stats(const om_runs* runs, uint64_t budget, double* mean,
                                      double* stddev, uint64_t* count);
/*
 * Mean/sample-stddev of evaluations to first reach fitness `target`, over
 * the runs that reached it; the rest are reported in *censored.
 */
OM_API om_status om_runs_target_stats(const om_runs* runs, int target, double* mean,
                                      double* stddev, uint64_t* count, uint64_t* censored);
OM_API void om_runs_free(om_runs* runs);

/* Message of the most recent failing call on this thread ("" if none). */
OM_API const char* om_last_error(void);
OM_API const char* om_version(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ONEMAX_ONEMAX_H */
