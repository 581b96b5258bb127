// nldep command-line tool: measures, tests, LGC maps and simulations over CSV
// data. Output is JSON lines (one record per result) or CSV for tables.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nldep/nldep.h"

using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

int exit_code_for(int status) {
    switch (status) {
        case NLDEP_OK: return kExitOk;
        case NLDEP_E_INVALID_ARGUMENT:
        case NLDEP_E_LAG:
        case NLDEP_E_ALPHA:
        case NLDEP_E_KERNEL:
        case NLDEP_E_BANDWIDTH:
        case NLDEP_E_GAMMA_RANGE:
        case NLDEP_E_PARAM:
        case NLDEP_E_SUBSET:
        case NLDEP_E_PARAM_DOMAIN: return kExitUsage;
        case NLDEP_E_DEGENERATE_SAMPLE:
        case NLDEP_E_TIE:
        case NLDEP_E_SHAPE:
        case NLDEP_E_SAMPLE_TOO_SMALL:
        case NLDEP_E_MISSING_COLUMN:
        case NLDEP_E_PARSE:
        case NLDEP_E_IO:
        case NLDEP_E_DOMAIN: return kExitData;
        default: return kExitNumeric;
    }
}

// Failure carrying an exit code and a machine-readable class.
struct Failure {
    int exit_code;
    std::string kind;
    std::string message;
};

void check(int status) {
    if (status != NLDEP_OK) throw Failure{exit_code_for(status), nldep_status_name(status), nldep_last_error()};
}

[[noreturn]] void usage(const std::string& msg) { throw Failure{kExitUsage, "UsageError", msg}; }

template <typename T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using Paired = std::unique_ptr<nldep_paired, Deleter<nldep_paired, nldep_paired_free>>;
using Series = std::unique_ptr<nldep_series, Deleter<nldep_series, nldep_series_free>>;
using Options = std::unique_ptr<nldep_options, Deleter<nldep_options, nldep_options_free>>;
using Report = std::unique_ptr<nldep_report, Deleter<nldep_report, nldep_report_free>>;
using Map = std::unique_ptr<nldep_lgc_map, Deleter<nldep_lgc_map, nldep_lgc_map_free>>;

struct RunConfig {
    std::string command;
    std::string input;
    std::string x_column;
    std::string y_column;
    std::string series_column;
    std::size_t lag = 0;
    bool log_returns = false;
    std::vector<std::string> names;  // measures or tests
    std::vector<std::string> params;  // [name.]key=value
    std::size_t replicates = 999;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    std::string family;
    std::size_t n = 500;
    std::string output;
    std::string format;
};

std::vector<std::string> split_list(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (const auto& item : items) {
        std::stringstream ss(item);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

// Options for one named measure/test: unscoped keys apply to every name,
// "name.key" only to that name.
Options options_for(const std::string& name, const std::vector<std::string>& params, json* record) {
    nldep_options* raw = nullptr;
    check(nldep_options_new(&raw));
    Options o(raw);
    for (const auto& p : params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos || eq == 0) usage("parameter '" + p + "' is not key=value");
        std::string key = p.substr(0, eq);
        const std::string value = p.substr(eq + 1);
        const auto dot = key.find('.');
        if (dot != std::string::npos) {
            if (key.substr(0, dot) != name) continue;
            key = key.substr(dot + 1);
        }
        check(nldep_options_set(o.get(), key.c_str(), value.c_str()));
        if (record) (*record)[key] = value;
    }
    return o;
}

Series load_series(const RunConfig& c, const std::string& column) {
    nldep_series* raw = nullptr;
    check(nldep_series_from_csv(c.input.c_str(), column.c_str(), &raw));
    Series s(raw);
    if (c.log_returns) {
        nldep_series* r = nullptr;
        check(nldep_series_log_returns(s.get(), &r));
        s.reset(r);
    }
    return s;
}

bool is_series_input(const RunConfig& c) { return !c.series_column.empty() && c.lag == 0; }

Paired load_paired(const RunConfig& c) {
    if (c.input.empty()) usage("--input is required");
    nldep_paired* raw = nullptr;
    if (!c.series_column.empty()) {
        if (c.lag == 0) usage("series input needs --lag to form pairs");
        const Series s = load_series(c, c.series_column);
        check(nldep_series_lag_pairs(s.get(), c.lag, &raw));
        return Paired(raw);
    }
    if (c.x_column.empty() || c.y_column.empty()) usage("paired input needs --x and --y (or --series with --lag)");
    if (!c.log_returns) {
        check(nldep_paired_from_csv(c.input.c_str(), c.x_column.c_str(), c.y_column.c_str(), &raw));
        return Paired(raw);
    }
    const Series a = load_series(c, c.x_column), b = load_series(c, c.y_column);
    check(nldep_series_pair(a.get(), b.get(), &raw));
    return Paired(raw);
}

json input_record(const RunConfig& c) {
    json j;
    j["path"] = c.input;
    if (!c.series_column.empty()) {
        j["series"] = c.series_column;
        if (c.lag) j["lag"] = c.lag;
    } else {
        j["x"] = c.x_column;
        j["y"] = c.y_column;
    }
    j["log_returns"] = c.log_returns;
    return j;
}

json base_record(const RunConfig& c) {
    json j;
    j["version"] = nldep_version();
    j["command"] = c.command;
    j["seed"] = c.seed;
    return j;
}

std::string run_measure(const RunConfig& c) {
    if (c.names.empty()) usage("measure needs --measures");
    if (c.input.empty()) usage("--input is required");
    std::string out;
    const bool series = is_series_input(c);
    Series s;
    Paired p;
    if (series) {
        s = load_series(c, c.series_column);
    } else {
        p = load_paired(c);
    }
    for (const auto& name : c.names) {
        const Options o = options_for(name, c.params, nullptr);
        nldep_report* raw = nullptr;
        check(series ? nldep_series_measure(name.c_str(), s.get(), o.get(), &raw)
                     : nldep_measure(name.c_str(), p.get(), o.get(), &raw));
        const Report r(raw);
        json j = base_record(c);
        j["input"] = input_record(c);
        const json rec = json::parse(nldep_report_json(r.get()));
        for (const auto& [k, v] : rec.items()) j[k] = v;
        out += j.dump() + "\n";
    }
    return out;
}

std::string run_test(const RunConfig& c) {
    if (c.names.empty()) usage("test needs --tests");
    if (c.input.empty()) usage("--input is required");
    std::string out;
    const bool series = is_series_input(c);
    Series s;
    Paired p;
    if (series) {
        s = load_series(c, c.series_column);
    } else {
        p = load_paired(c);
    }
    for (const auto& name : c.names) {
        const Options o = options_for(name, c.params, nullptr);
        nldep_report* raw = nullptr;
        check(series ? nldep_series_test(name.c_str(), s.get(), o.get(), c.replicates, c.seed, &raw)
                     : nldep_test(name.c_str(), p.get(), o.get(), c.replicates, c.seed, &raw));
        const Report r(raw);
        json j = base_record(c);
        j["input"] = input_record(c);
        j["replicates_requested"] = c.replicates;
        const json rec = json::parse(nldep_report_json(r.get()));
        for (const auto& [k, v] : rec.items()) j[k] = v;
        out += j.dump() + "\n";
    }
    return out;
}

std::string run_lgc_map(const RunConfig& c) {
    const Paired p = load_paired(c);
    const Options o = options_for("lgc-map", c.params, nullptr);
    nldep_lgc_map* raw = nullptr;
    check(nldep_lgc_map_run(p.get(), o.get(), &raw));
    const Map m(raw);
    if (c.format == "csv") return nldep_lgc_map_csv(m.get());
    json j = base_record(c);
    j["input"] = input_record(c);
    j["params"] = json::parse(nldep_lgc_map_params_json(m.get()));
    j["points"] = nldep_lgc_map_size(m.get());
    j["failed"] = nldep_lgc_map_failed(m.get());
    json pts = json::array();
    for (std::size_t i = 0; i < nldep_lgc_map_size(m.get()); ++i) {
        double x1 = 0, x2 = 0, rho = 0;
        int conv = 0;
        check(nldep_lgc_map_point(m.get(), i, &x1, &x2, &rho, &conv));
        json pt;
        pt["x1"] = x1;
        pt["x2"] = x2;
        pt["rho"] = conv ? json(rho) : json(nullptr);
        pt["converged"] = conv != 0;
        pts.push_back(pt);
    }
    j["grid"] = pts;
    return j.dump() + "\n";
}

std::string csv_number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string run_simulate(const RunConfig& c) {
    if (c.family.empty()) usage("simulate needs --family");
    const Options o = options_for(c.family, c.params, nullptr);
    std::string out;
    if (nldep_family_is_series(c.family.c_str())) {
        nldep_series* raw = nullptr;
        check(nldep_simulate_series(c.family.c_str(), o.get(), c.n, c.seed, &raw));
        const Series s(raw);
        std::vector<double> v(nldep_series_size(s.get()));
        check(nldep_series_get(s.get(), v.data()));
        out = "value\n";
        for (double x : v) out += csv_number(x) + "\n";
    } else {
        nldep_paired* raw = nullptr;
        check(nldep_simulate_paired(c.family.c_str(), o.get(), c.n, c.seed, &raw));
        const Paired p(raw);
        const std::size_t n = nldep_paired_size(p.get());
        std::vector<double> x(n), y(n);
        check(nldep_paired_get(p.get(), x.data(), y.data()));
        out = "x,y\n";
        for (std::size_t i = 0; i < n; ++i) out += csv_number(x[i]) + "," + csv_number(y[i]) + "\n";
    }
    return out;
}

// Fills unset flags from the config file.
void apply_config(const std::string& path, RunConfig& c, const std::map<std::string, bool>& given) {
    std::ifstream in(path);
    if (!in) throw Failure{kExitData, "IoError", "cannot open config '" + path + "'"};
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Failure{kExitData, "ParseError", "config '" + path + "': " + e.what()};
    }
    if (!j.is_object()) throw Failure{kExitData, "ParseError", "config '" + path + "' must hold an object"};
    auto take = [&](const char* key, auto& field) {
        if (!j.contains(key) || given.at(key)) return;
        try {
            j.at(key).get_to(field);
        } catch (const json::exception&) {
            usage(std::string("config key '") + key + "' has the wrong type");
        }
    };
    static const std::vector<std::string> known{"input", "x",      "y",      "series", "lag",    "log_returns",
                                                "measures", "tests", "params", "replicates", "seed", "threads",
                                                "family", "n",      "output", "format"};
    for (auto& [k, v] : j.items())
        if (std::find(known.begin(), known.end(), k) == known.end()) usage("unknown config key '" + k + "'");
    take("input", c.input);
    take("x", c.x_column);
    take("y", c.y_column);
    take("series", c.series_column);
    take("lag", c.lag);
    take("log_returns", c.log_returns);
    if (c.command == "measure") take("measures", c.names);
    if (c.command == "test") take("tests", c.names);
    take("replicates", c.replicates);
    take("seed", c.seed);
    take("threads", c.threads);
    take("family", c.family);
    take("n", c.n);
    take("output", c.output);
    take("format", c.format);
    // Config params come first so flags with the same key win.
    if (j.contains("params")) {
        if (!j["params"].is_object()) usage("config key 'params' must be an object");
        std::vector<std::string> merged;
        for (auto& [k, v] : j["params"].items()) merged.push_back(k + "=" + (v.is_string() ? v.get<std::string>() : v.dump()));
        merged.insert(merged.end(), c.params.begin(), c.params.end());
        c.params = merged;
    }
}

void emit_error(const Failure& f, const std::string& command) {
    json j;
    j["version"] = nldep_version();
    j["command"] = command;
    j["error"] = {{"kind", f.kind}, {"message", f.message}};
    j["exit_code"] = f.exit_code;
    std::cerr << j.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig c;
    CLI::App app{"nldep: nonlinear dependence measures and tests"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(nldep_version()));

    std::string config_path;
    std::optional<std::uint64_t> seed_flag;
    auto* o_seed = app.add_option("--seed", seed_flag, "RNG seed (default: $NLDEP_SEED, else 0)");
    auto* o_threads = app.add_option("--threads", c.threads, "Worker cap (0: hardware concurrency)");
    app.add_option("--config", config_path, "JSON config file; flags take precedence");
    auto* o_output = app.add_option("--output,-o", c.output, "Output file (default: stdout)");
    auto* o_format = app.add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

    auto add_data = [&](CLI::App* sub) {
        sub->add_option("--input,-i", c.input, "CSV file with a header row");
        sub->add_option("--x", c.x_column, "X column");
        sub->add_option("--y", c.y_column, "Y column");
        sub->add_option("--series", c.series_column, "Series column");
        sub->add_option("--lag", c.lag, "Pair a series with its lag-k values");
        sub->add_flag("--log-returns", c.log_returns, "Convert price columns to log returns");
    };
    auto add_params = [&](CLI::App* sub) {
        sub->add_option("--param,-p", c.params, "[name.]key=value");
    };

    auto* measure = app.add_subcommand("measure", "Compute dependence measures");
    add_data(measure);
    add_params(measure);
    auto* o_measures = measure->add_option("--measures,-m", c.names, "Comma-separated names");

    auto* test = app.add_subcommand("test", "Run resampling tests");
    add_data(test);
    add_params(test);
    auto* o_tests = test->add_option("--tests,-t", c.names, "Comma-separated names");
    auto* o_reps = test->add_option("--replicates,-R", c.replicates, "Resampling replicates (>= 99)");

    auto* map = app.add_subcommand("lgc-map", "Local Gaussian correlation map");
    add_data(map);
    add_params(map);

    auto* sim = app.add_subcommand("simulate", "Generate synthetic data as CSV");
    auto* o_family = sim->add_option("--family,-f", c.family, "Generator family");
    auto* o_n = sim->add_option("--n,-n", c.n, "Sample size");
    add_params(sim);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    for (auto* sub : app.get_subcommands()) c.command = sub->get_name();
    try {
        // The options map holds the last subcommand's pointers; use the parsed one.
        CLI::App* active = app.get_subcommands().front();
        auto given = [&](const std::string& flag) {
            const auto* opt = active->get_option_no_throw(flag);
            return opt && opt->count() > 0;
        };
        std::map<std::string, bool> set{{"input", given("--input")},
                                        {"x", given("--x")},
                                        {"y", given("--y")},
                                        {"series", given("--series")},
                                        {"lag", given("--lag")},
                                        {"log_returns", given("--log-returns")},
                                        {"measures", o_measures->count() > 0},
                                        {"tests", o_tests->count() > 0},
                                        {"replicates", o_reps->count() > 0},
                                        {"seed", o_seed->count() > 0},
                                        {"threads", o_threads->count() > 0},
                                        {"family", o_family->count() > 0},
                                        {"n", o_n->count() > 0},
                                        {"output", o_output->count() > 0},
                                        {"format", o_format->count() > 0}};
        if (const char* env = std::getenv("NLDEP_SEED"); env && *env) {
            char* end = nullptr;
            const unsigned long long v = std::strtoull(env, &end, 10);
            if (*end != '\0') usage("NLDEP_SEED must be an unsigned integer");
            c.seed = v;
        }
        if (!config_path.empty()) apply_config(config_path, c, set);
        if (seed_flag) c.seed = *seed_flag;
        c.names = split_list(c.names);
        if (c.format.empty()) c.format = c.command == "lgc-map" || c.command == "simulate" ? "csv" : "json";
        if (c.format != "json" && c.format != "csv") usage("--format must be json or csv");
        if ((c.command == "measure" || c.command == "test") && c.format != "json")
            usage(c.command + " writes JSON lines only");
        if (c.command == "simulate" && c.format != "csv") usage("simulate writes CSV only");
        nldep_set_max_threads(c.threads);

        std::string out;
        if (c.command == "measure") {
            out = run_measure(c);
        } else if (c.command == "test") {
            out = run_test(c);
        } else if (c.command == "lgc-map") {
            out = run_lgc_map(c);
        } else {
            out = run_simulate(c);
        }
        if (c.output.empty()) {
            std::cout << out;
        } else {
            std::ofstream f(c.output, std::ios::binary);
            if (!f) throw Failure{kExitData, "IoError", "cannot write '" + c.output + "'"};
            f << out;
        }
        return kExitOk;
    } catch (const Failure& f) {
        emit_error(f, c.command);
        return f.exit_code;
    }
}
