#include "nldep/nldep.h"

#include <cmath>
#include <exception>
#include <limits>
#include <new>
#include <string>

#include "json.hpp"
#include "nldep/error.hpp"
#include "nldep/io.hpp"
#include "nldep/lgc.hpp"
#include "nldep/registry.hpp"
#include "nldep/rng.hpp"
#include "util.hpp"

#ifndef NLDEP_VERSION
#define NLDEP_VERSION "0.0.0"
#endif

struct nldep_paired {
    nldep::PairedSample sample;
};
struct nldep_series {
    nldep::SeriesSample sample;
};
struct nldep_options {
    nldep::Options values;
};
struct nldep_report {
    double value = 0.0;
    double p_value = std::numeric_limits<double>::quiet_NaN();
    std::string json;
};
struct nldep_lgc_map {
    nldep::LgcMap map;
    std::string csv;
    std::string params_json;
};

namespace {

thread_local std::string g_last_error;

using ordered_json = nlohmann::ordered_json;

template <typename F>
int guarded(F&& f) {
    try {
        f();
        return NLDEP_OK;
    } catch (const nldep::Error& e) {
        g_last_error = e.what();
        return static_cast<int>(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return NLDEP_E_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return NLDEP_E_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (!p) throw nldep::InvalidArgumentError(std::string(what) + " is NULL");
}

const nldep::Options& opts_of(const nldep_options* o) {
    static const nldep::Options empty;
    return o ? o->values : empty;
}

ordered_json settings_json(const nldep::Settings& s) {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : s) j[k] = v;
    return j;
}

nldep::ResampleConfig config(size_t replicates, uint64_t seed) {
    nldep::ResampleConfig c;
    c.replicates = replicates;
    c.seed = seed;
    return c;
}

nldep_report* test_report(const nldep::TestReport& r, const nldep::Settings& params) {
    ordered_json j = ordered_json::parse(nldep::to_json(r));
    j["params"] = settings_json(params);
    auto* out = new nldep_report;
    out->value = r.statistic;
    out->p_value = r.p_value;
    out->json = j.dump();
    return out;
}

nldep_report* measure_report(const nldep::MeasureRecord& m) {
    ordered_json j;
    j["measure"] = m.name;
    j["value"] = m.value;
    j["params"] = settings_json(m.settings);
    auto* out = new nldep_report;
    out->value = m.value;
    out->json = j.dump();
    return out;
}

}  // namespace

extern "C" {

const char* nldep_version(void) { return NLDEP_VERSION; }
const char* nldep_rng_name(void) { return nldep::Rng::kName; }
const char* nldep_last_error(void) { return g_last_error.c_str(); }

const char* nldep_status_name(int status) {
    if (status == NLDEP_OK) return "ok";
    if (status >= NLDEP_E_INVALID_ARGUMENT && status <= NLDEP_E_DOMAIN)
        return nldep::error_code_name(static_cast<nldep::ErrorCode>(status));
    return "InternalError";
}

void nldep_set_max_threads(size_t n) { nldep::set_max_threads(n); }

int nldep_options_new(nldep_options** out) {
    return guarded([&] {
        need(out, "out");
        *out = new nldep_options;
    });
}

int nldep_options_set(nldep_options* o, const char* key, const char* value) {
    return guarded([&] {
        need(o, "options");
        need(key, "key");
        need(value, "value");
        o->values[key] = value;
    });
}

void nldep_options_free(nldep_options* o) { delete o; }

int nldep_paired_new(const double* x, const double* y, size_t n, nldep_paired** out) {
    return guarded([&] {
        need(out, "out");
        need(x, "x");
        need(y, "y");
        *out = new nldep_paired{nldep::PairedSample({x, x + n}, {y, y + n})};
    });
}

int nldep_paired_from_csv(const char* path, const char* x_column, const char* y_column, nldep_paired** out) {
    return guarded([&] {
        need(out, "out");
        need(path, "path");
        need(x_column, "x_column");
        need(y_column, "y_column");
        *out = new nldep_paired{nldep::ingest_paired(path, x_column, y_column)};
    });
}

size_t nldep_paired_size(const nldep_paired* p) { return p ? p->sample.size() : 0; }

int nldep_paired_get(const nldep_paired* p, double* x, double* y) {
    return guarded([&] {
        need(p, "paired");
        for (size_t i = 0; i < p->sample.size(); ++i) {
            if (x) x[i] = p->sample.x()[i];
            if (y) y[i] = p->sample.y()[i];
        }
    });
}

int nldep_paired_to_z(const nldep_paired* p, nldep_paired** out) {
    return guarded([&] {
        need(p, "paired");
        need(out, "out");
        *out = new nldep_paired{nldep::to_z_scale(p->sample)};
    });
}

void nldep_paired_free(nldep_paired* p) { delete p; }

int nldep_series_new(const double* v, size_t n, nldep_series** out) {
    return guarded([&] {
        need(out, "out");
        need(v, "values");
        *out = new nldep_series{nldep::SeriesSample({v, v + n})};
    });
}

int nldep_series_from_csv(const char* path, const char* column, nldep_series** out) {
    return guarded([&] {
        need(out, "out");
        need(path, "path");
        need(column, "column");
        *out = new nldep_series{nldep::ingest_series(path, column)};
    });
}

size_t nldep_series_size(const nldep_series* s) { return s ? s->sample.size() : 0; }

int nldep_series_get(const nldep_series* s, double* v) {
    return guarded([&] {
        need(s, "series");
        need(v, "values");
        for (size_t i = 0; i < s->sample.size(); ++i) v[i] = s->sample.values()[i];
    });
}

int nldep_series_log_returns(const nldep_series* prices, nldep_series** out) {
    return guarded([&] {
        need(prices, "series");
        need(out, "out");
        auto r = nldep::log_returns(prices->sample);
        if (r.size() < 2) throw nldep::SampleTooSmallError("log_returns: need at least 3 prices for a series");
        *out = new nldep_series{nldep::SeriesSample(std::move(r))};
    });
}

int nldep_series_lag_pairs(const nldep_series* s, size_t k, nldep_paired** out) {
    return guarded([&] {
        need(s, "series");
        need(out, "out");
        *out = new nldep_paired{nldep::lag_pairs(s->sample, k)};
    });
}

int nldep_series_pair(const nldep_series* x, const nldep_series* y, nldep_paired** out) {
    return guarded([&] {
        need(x, "x");
        need(y, "y");
        need(out, "out");
        const auto a = x->sample.values(), b = y->sample.values();
        *out = new nldep_paired{nldep::PairedSample({a.begin(), a.end()}, {b.begin(), b.end()})};
    });
}

void nldep_series_free(nldep_series* s) { delete s; }

int nldep_measure(const char* name, const nldep_paired* p, const nldep_options* o, nldep_report** out) {
    return guarded([&] {
        need(name, "name");
        need(p, "paired");
        need(out, "out");
        *out = measure_report(nldep::compute_measure(name, p->sample, opts_of(o)));
    });
}

int nldep_series_measure(const char* name, const nldep_series* s, const nldep_options* o, nldep_report** out) {
    return guarded([&] {
        need(name, "name");
        need(s, "series");
        need(out, "out");
        *out = measure_report(nldep::compute_series_measure(name, s->sample, opts_of(o)));
    });
}

int nldep_test(const char* name, const nldep_paired* p, const nldep_options* o, size_t replicates, uint64_t seed,
               nldep_report** out) {
    return guarded([&] {
        need(name, "name");
        need(p, "paired");
        need(out, "out");
        nldep::Settings params;
        const auto r = nldep::run_test(name, p->sample, opts_of(o), config(replicates, seed), &params);
        *out = test_report(r, params);
    });
}

int nldep_series_test(const char* name, const nldep_series* s, const nldep_options* o, size_t replicates,
                      uint64_t seed, nldep_report** out) {
    return guarded([&] {
        need(name, "name");
        need(s, "series");
        need(out, "out");
        nldep::Settings params;
        const auto r = nldep::run_series_test(name, s->sample, opts_of(o), config(replicates, seed), &params);
        *out = test_report(r, params);
    });
}

double nldep_report_value(const nldep_report* r) { return r ? r->value : std::numeric_limits<double>::quiet_NaN(); }
double nldep_report_p_value(const nldep_report* r) {
    return r ? r->p_value : std::numeric_limits<double>::quiet_NaN();
}
const char* nldep_report_json(const nldep_report* r) { return r ? r->json.c_str() : ""; }
void nldep_report_free(nldep_report* r) { delete r; }

int nldep_lgc_map_run(const nldep_paired* p, const nldep_options* o, nldep_lgc_map** out) {
    return guarded([&] {
        need(p, "paired");
        need(out, "out");
        nldep::Settings params;
        auto* m = new nldep_lgc_map{nldep::run_lgc_map(p->sample, opts_of(o), &params), {}, {}};
        m->csv = nldep::lgc_map_csv(m->map);
        m->params_json = settings_json(params).dump();
        *out = m;
    });
}

size_t nldep_lgc_map_size(const nldep_lgc_map* m) { return m ? m->map.points.size() : 0; }
size_t nldep_lgc_map_failed(const nldep_lgc_map* m) { return m ? m->map.failed() : 0; }

int nldep_lgc_map_point(const nldep_lgc_map* m, size_t i, double* x1, double* x2, double* rho, int* converged) {
    return guarded([&] {
        need(m, "map");
        if (i >= m->map.points.size()) throw nldep::InvalidArgumentError("lgc map index out of range");
        const auto& pt = m->map.points[i];
        if (x1) *x1 = pt.point.first;
        if (x2) *x2 = pt.point.second;
        if (rho) *rho = pt.converged ? pt.fit.params.rho : std::numeric_limits<double>::quiet_NaN();
        if (converged) *converged = pt.converged ? 1 : 0;
    });
}

const char* nldep_lgc_map_csv(const nldep_lgc_map* m) { return m ? m->csv.c_str() : ""; }
const char* nldep_lgc_map_params_json(const nldep_lgc_map* m) { return m ? m->params_json.c_str() : "{}"; }
void nldep_lgc_map_free(nldep_lgc_map* m) { delete m; }

int nldep_simulate_paired(const char* family, const nldep_options* o, size_t n, uint64_t seed, nldep_paired** out) {
    return guarded([&] {
        need(family, "family");
        need(out, "out");
        *out = new nldep_paired{nldep::generate_paired(nldep::generator_spec(family, opts_of(o), n, seed))};
    });
}

int nldep_simulate_series(const char* family, const nldep_options* o, size_t n, uint64_t seed, nldep_series** out) {
    return guarded([&] {
        need(family, "family");
        need(out, "out");
        *out = new nldep_series{nldep::generate_series(nldep::generator_spec(family, opts_of(o), n, seed))};
    });
}

int nldep_family_is_series(const char* family) { return family && std::string(family) == "garch" ? 1 : 0; }

}  // extern "C"
