#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "onemax/onemax.h"

namespace cli {

// Bad flag combinations and malformed flag values; mapped to a usage exit.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised by obtain_build when --no-cache/--no-compute rule out producing a
// value. The table command turns this into a blank cell; everyone else lets
// it surface as an ordinary error.
struct CacheMissError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Everything that names one policy computation. The cache key is derived
// from exactly these fields, so two runs agree on a key iff they agree on
// every numeric parameter.
struct Selection {
    std::string algo = "rls";  // rls | ea | ea-res
    std::string mode = "opt";  // drift | opt | static | back
    int n = 0;
    double p_min = 0.0;
    double tail_epsilon = 1e-15;
    int grid_points = 64;
    double refine_tolerance = 1e-10;
    std::string tie_break = "min";  // min | max
    double static_value = -1.0;     // mode static; < 0 means optimal static rate
};

om_algo algo_id(const std::string& algo);
om_objective mode_id(const std::string& mode);

// Accepts the presets "0", "1/2n", "1/n" or a plain real literal.
double parse_p_min(const std::string& text, int n);
// Accepts "opt", "1/2n", "1/n" or a plain real literal (a strength for rls).
double parse_static_value(const std::string& text, const std::string& algo, int n);

std::vector<int> parse_dims(const std::string& text);
std::vector<uint64_t> parse_budgets(const std::string& text);
std::vector<int> parse_targets(const std::string& text, int n);

// Policy values with the induced remaining times, fresh or from cache.
struct Build {
    std::vector<double> values;  // n entries
    std::vector<double> times;   // n+1 entries
    double total = 0.0;
    bool from_cache = false;
};

struct CacheConfig {
    std::string dir;
    bool enabled = true;
    bool compute = true;  // false: serve from cache only, misses are errors
};

// Flag value > ONEMAX_CACHE_DIR > ./cache
std::string resolve_cache_dir(const std::string& flag_value);

Build obtain_build(const Selection& s, const CacheConfig& cache);

// RAII over the C handles; the CLI touches the library through these only.
struct PolicyHandle {
    om_policy* ptr = nullptr;
    ~PolicyHandle() { om_policy_free(ptr); }
    PolicyHandle() = default;
    PolicyHandle(const PolicyHandle&) = delete;
    PolicyHandle& operator=(const PolicyHandle&) = delete;
};

struct RunsHandle {
    om_runs* ptr = nullptr;
    ~RunsHandle() { om_runs_free(ptr); }
    RunsHandle() = default;
    RunsHandle(const RunsHandle&) = delete;
    RunsHandle& operator=(const RunsHandle&) = delete;
};

// Throws std::runtime_error with om_last_error() appended when st != OM_OK.
void check(om_status st, const std::string& context);

void compute_policy_handle(const Selection& s, PolicyHandle& out);

// 17 significant digits: enough for exact double round-trips.
std::string format_double(double v);

// The row ids of the wide table command, in presentation order.
const std::vector<std::string>& all_variants();
// Maps a variant id to the selection it denotes at dimension n.
Selection variant_selection(const std::string& id, int n);

// Output helpers. Every writer creates parent directories as needed and
// reports the path it wrote on stdout.
void write_policy_csv(const std::string& path, const std::vector<double>& values);
void write_policy_sidecar(const std::string& csv_path, const Selection& s, const Build& b);
std::string sidecar_path(const std::string& csv_path);

}  // namespace cli
