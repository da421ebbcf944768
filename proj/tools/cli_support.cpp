#include "cli_support.hpp"

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace cli {

namespace {

constexpr int kCacheSchema = 1;

uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex16(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        // tolerate stray spaces around commas
        size_t a = item.find_first_not_of(" \t");
        if (a == std::string::npos) continue;
        size_t b = item.find_last_not_of(" \t");
        out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

double parse_real(const std::string& text, const std::string& what) {
    try {
        size_t pos = 0;
        double v = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw UsageError("cannot parse " + what + " value '" + text + "'");
    }
}

// One canonical string per selection; both the cache key and the stored
// entry reproduce it, so a hash collision cannot serve wrong data.
std::string canonical_key(const Selection& s) {
    std::ostringstream out;
    out << "v" << kCacheSchema << '|' << s.algo << '|' << s.mode << '|' << s.n << '|'
        << format_double(s.p_min) << '|' << format_double(s.tail_epsilon) << '|' << s.grid_points
        << '|' << format_double(s.refine_tolerance) << '|' << s.tie_break << '|'
        << format_double(s.static_value);
    return out.str();
}

std::string payload_checksum(const Build& b) {
    std::ostringstream out;
    out << "values:";
    for (double v : b.values) out << format_double(v) << ',';
    out << "|times:";
    for (double v : b.times) out << format_double(v) << ',';
    out << "|total:" << format_double(b.total);
    return hex16(fnv1a64(out.str()));
}

fs::path cache_file(const std::string& dir, const Selection& s) {
    return fs::path(dir) / ("onemax-" + hex16(fnv1a64(canonical_key(s))) + ".json");
}

bool load_cached(const Selection& s, const std::string& dir, Build& out) {
    const fs::path path = cache_file(dir, s);
    std::ifstream in(path);
    if (!in) return false;
    json entry;
    try {
        in >> entry;
        if (entry.at("schema_version").get<int>() != kCacheSchema) return false;
        Selection stored;
        stored.algo = entry.at("algorithm").get<std::string>();
        stored.mode = entry.at("mode").get<std::string>();
        stored.n = entry.at("n").get<int>();
        stored.p_min = entry.at("p_min").get<double>();
        stored.tail_epsilon = entry.at("tail_epsilon").get<double>();
        stored.grid_points = entry.at("grid_points").get<int>();
        stored.refine_tolerance = entry.at("refine_tolerance").get<double>();
        stored.tie_break = entry.at("tie_break").get<std::string>();
        stored.static_value = entry.at("static_value").get<double>();
        if (canonical_key(stored) != canonical_key(s)) return false;

        Build b;
        b.values = entry.at("payload").at("values").get<std::vector<double>>();
        b.times = entry.at("payload").at("times").get<std::vector<double>>();
        b.total = entry.at("payload").at("total").get<double>();
        if (b.values.size() != static_cast<size_t>(s.n) ||
            b.times.size() != static_cast<size_t>(s.n) + 1)
            return false;
        if (entry.at("checksum").get<std::string>() != payload_checksum(b)) return false;
        b.from_cache = true;
        out = std::move(b);
        return true;
    } catch (const std::exception&) {
        std::fprintf(stderr, "warning: ignoring unreadable cache entry %s\n",
                     path.string().c_str());
        return false;
    }
}

void store_cached(const Selection& s, const std::string& dir, const Build& b) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    json entry = {
        {"schema_version", kCacheSchema},
        {"algorithm", s.algo},
        {"mode", s.mode},
        {"n", s.n},
        {"p_min", s.p_min},
        {"tail_epsilon", s.tail_epsilon},
        {"grid_points", s.grid_points},
        {"refine_tolerance", s.refine_tolerance},
        {"tie_break", s.tie_break},
        {"static_value", s.static_value},
        {"payload", {{"values", b.values}, {"times", b.times}, {"total", b.total}}},
        {"checksum", payload_checksum(b)},
    };
    const fs::path path = cache_file(dir, s);
    const fs::path tmp = path.string() + ".tmp" + std::to_string(::getpid());
    {
        std::ofstream out(tmp);
        if (!out) {
            std::fprintf(stderr, "warning: cannot write cache entry %s\n", path.string().c_str());
            return;
        }
        out << entry.dump(1) << '\n';
    }
    fs::rename(tmp, path, ec);  // atomic publish; failure only costs a recompute
    if (ec) {
        std::fprintf(stderr, "warning: cannot publish cache entry %s\n", path.string().c_str());
        fs::remove(tmp, ec);
    }
}

void ensure_parent(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        fs::create_directories(parent, ec);
    }
}

}  // namespace

om_algo algo_id(const std::string& algo) {
    if (algo == "rls") return OM_ALGO_RLS;
    if (algo == "ea") return OM_ALGO_EA;
    if (algo == "ea-res") return OM_ALGO_EA_RESAMPLING;
    throw UsageError("unknown algorithm '" + algo + "' (expected rls, ea or ea-res)");
}

om_objective mode_id(const std::string& mode) {
    if (mode == "opt") return OM_OBJECTIVE_TIME;
    if (mode == "drift") return OM_OBJECTIVE_DRIFT;
    if (mode == "static") return OM_OBJECTIVE_STATIC;
    if (mode == "back") return OM_OBJECTIVE_BACK;
    throw UsageError("unknown mode '" + mode + "' (expected drift, opt, static or back)");
}

double parse_p_min(const std::string& text, int n) {
    if (text == "0") return 0.0;
    if (text == "1/2n") return 1.0 / (2.0 * n);
    if (text == "1/n") return 1.0 / n;
    double v = parse_real(text, "--p-min");
    if (!(v >= 0.0 && v < 1.0)) throw UsageError("--p-min must lie in [0, 1)");
    return v;
}

double parse_static_value(const std::string& text, const std::string& algo, int n) {
    if (text == "opt") {
        if (algo == "rls") throw UsageError("--static-value opt is not defined for rls");
        return -1.0;
    }
    if (text == "1/n") return 1.0 / n;
    if (text == "1/2n") return 1.0 / (2.0 * n);
    double v = parse_real(text, "--static-value");
    if (algo == "rls") {
        if (v < 1.0 || v > n || v != static_cast<double>(static_cast<int>(v)))
            throw UsageError("--static-value for rls must be an integer in [1, n]");
    } else if (!(v >= 0.0 && v <= 1.0)) {
        throw UsageError("--static-value rate must lie in [0, 1]");
    }
    return v;
}

std::vector<int> parse_dims(const std::string& text) {
    std::vector<int> dims;
    for (const std::string& item : split_list(text)) {
        double v = parse_real(item, "--dims");
        int n = static_cast<int>(v);
        if (v != static_cast<double>(n) || n < 1)
            throw UsageError("--dims entries must be integers >= 1");
        dims.push_back(n);
    }
    return dims;
}

std::vector<uint64_t> parse_budgets(const std::string& text) {
    std::vector<uint64_t> out;
    for (const std::string& item : split_list(text)) {
        try {
            size_t pos = 0;
            unsigned long long v = std::stoull(item, &pos);
            if (pos != item.size() || v < 1) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw UsageError("--budgets entries must be integers >= 1");
        }
    }
    return out;
}

std::vector<int> parse_targets(const std::string& text, int n) {
    std::vector<int> out;
    for (const std::string& item : split_list(text)) {
        double v = parse_real(item, "--targets");
        int t = static_cast<int>(v);
        if (v != static_cast<double>(t) || t < 0 || t > n)
            throw UsageError("--targets entries must be integers in [0, n]");
        out.push_back(t);
    }
    return out;
}

std::string resolve_cache_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("ONEMAX_CACHE_DIR"); env && *env) return env;
    return "./cache";
}

void check(om_status st, const std::string& context) {
    if (st == OM_OK) return;
    throw std::runtime_error(context + ": " + om_last_error());
}

void compute_policy_handle(const Selection& s, PolicyHandle& out) {
    om_policy_params params;
    om_policy_params_init(&params);
    params.p_min = s.p_min;
    params.static_value = s.static_value;
    params.tail_epsilon = s.tail_epsilon;
    params.grid_points = s.grid_points;
    params.refine_tolerance = s.refine_tolerance;
    params.tie_break = s.tie_break == "max" ? OM_TIE_LARGEST_K : OM_TIE_SMALLEST_K;
    check(om_policy_compute(algo_id(s.algo), mode_id(s.mode), s.n, &params, &out.ptr),
          "policy computation");
}

Build obtain_build(const Selection& s, const CacheConfig& cache) {
    Build b;
    if (cache.enabled && load_cached(s, cache.dir, b)) return b;
    if (!cache.compute)
        throw CacheMissError("no cached policy for " + canonical_key(s) +
                             " and --no-compute is set");

    PolicyHandle pol;
    compute_policy_handle(s, pol);
    struct TimesHandle {
        om_times* ptr = nullptr;
        ~TimesHandle() { om_times_free(ptr); }
    } tm;
    check(om_remaining_times(pol.ptr, &tm.ptr), "remaining times");

    b.values.resize(static_cast<size_t>(s.n));
    check(om_policy_values(pol.ptr, b.values.data()), "policy values");
    b.times.resize(static_cast<size_t>(s.n) + 1);
    check(om_times_values(tm.ptr, b.times.data()), "time values");
    check(om_times_total(tm.ptr, &b.total), "total time");
    b.from_cache = false;
    if (cache.enabled) store_cached(s, cache.dir, b);
    return b;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const std::vector<std::string>& all_variants() {
    static const std::vector<std::string> ids = {
        "rls-opt",          "rls-drift",        "rls",
        "ea-res-opt",       "ea-res-opt-p2n",   "ea-res-opt-p1n",
        "ea-res-drift",     "ea-res-drift-p2n", "ea-res-drift-p1n",
        "ea-res-static-p2n", "ea-res-static-p1n",
        "ea-opt",           "ea-drift",         "ea-back",
        "ea-static-opt",    "ea-static-1n",
    };
    return ids;
}

Selection variant_selection(const std::string& id, int n) {
    Selection s;
    s.n = n;
    auto set = [&](const char* algo, const char* mode) {
        s.algo = algo;
        s.mode = mode;
    };
    if (id == "rls") {
        set("rls", "static");
        s.static_value = 1.0;
    } else if (id == "rls-opt") {
        set("rls", "opt");
    } else if (id == "rls-drift") {
        set("rls", "drift");
    } else if (id == "ea-opt") {
        set("ea", "opt");
    } else if (id == "ea-drift") {
        set("ea", "drift");
    } else if (id == "ea-back") {
        set("ea", "back");
    } else if (id == "ea-static-opt") {
        set("ea", "static");
        s.static_value = -1.0;
    } else if (id == "ea-static-1n") {
        set("ea", "static");
        s.static_value = 1.0 / n;
    } else if (id == "ea-res-opt" || id == "ea-res-opt-p2n" || id == "ea-res-opt-p1n") {
        set("ea-res", "opt");
        s.p_min = id == "ea-res-opt" ? 0.0 : (id == "ea-res-opt-p2n" ? 1.0 / (2.0 * n) : 1.0 / n);
    } else if (id == "ea-res-drift" || id == "ea-res-drift-p2n" || id == "ea-res-drift-p1n") {
        set("ea-res", "drift");
        s.p_min =
            id == "ea-res-drift" ? 0.0 : (id == "ea-res-drift-p2n" ? 1.0 / (2.0 * n) : 1.0 / n);
    } else if (id == "ea-res-static-p2n") {
        set("ea-res", "static");
        s.static_value = 1.0 / (2.0 * n);
    } else if (id == "ea-res-static-p1n") {
        set("ea-res", "static");
        s.static_value = 1.0 / n;
    } else {
        throw UsageError("unknown variant '" + id + "'");
    }
    return s;
}

void write_policy_csv(const std::string& path, const std::vector<double>& values) {
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary);  // binary: LF endings everywhere
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "level,value\n";
    for (size_t level = 0; level < values.size(); ++level)
        out << level << ',' << format_double(values[level]) << '\n';
    std::printf("wrote %s\n", path.c_str());
}

std::string sidecar_path(const std::string& csv_path) {
    if (csv_path.size() > 4 && csv_path.substr(csv_path.size() - 4) == ".csv")
        return csv_path.substr(0, csv_path.size() - 4) + ".json";
    return csv_path + ".json";
}

void write_policy_sidecar(const std::string& csv_path, const Selection& s, const Build& b) {
    const std::string path = sidecar_path(csv_path);
    ensure_parent(path);
    json meta = {
        {"algorithm", s.algo},
        {"mode", s.mode},
        {"n", s.n},
        {"p_min", s.p_min},
        {"tail_epsilon", s.tail_epsilon},
        {"grid_points", s.grid_points},
        {"refine_tolerance", s.refine_tolerance},
        {"tie_break", s.tie_break},
        {"static_value", s.static_value},
        {"csv", csv_path},
        {"expected_time", b.total},
        {"from_cache", b.from_cache},
        {"library_version", om_version()},
    };
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << meta.dump(1) << '\n';
    std::printf("wrote %s\n", path.c_str());
}

}  // namespace cli
