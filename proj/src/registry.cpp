#include "nldep/registry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "nldep/classical.hpp"
#include "nldep/density.hpp"
#include "nldep/distance_covariance.hpp"
#include "nldep/ecdf_functionals.hpp"
#include "nldep/error.hpp"
#include "nldep/hsic.hpp"
#include "nldep/lgc.hpp"
#include "nldep/local_aggregation.hpp"
#include "util.hpp"

namespace nldep {

// ---------------------------------------------------------------------------
// OptionReader

const std::string* OptionReader::lookup(const std::string& key) {
    read_.insert(key);
    const auto it = opts_.find(key);
    return it == opts_.end() ? nullptr : &it->second;
}

std::string OptionReader::text(const std::string& key, const std::string& def) {
    const std::string* v = lookup(key);
    std::string out = v ? *v : def;
    used_.emplace_back(key, out);
    return out;
}

double OptionReader::real(const std::string& key, double def) {
    const std::string* v = lookup(key);
    double out = def;
    if (v) {
        char* end = nullptr;
        out = std::strtod(v->c_str(), &end);
        if (v->empty() || *end != '\0' || std::isnan(out))
            throw InvalidArgumentError(context_ + ": option " + key + "='" + *v + "' is not a number");
    }
    used_.emplace_back(key, detail::num(out));
    return out;
}

std::size_t OptionReader::count(const std::string& key, std::size_t def) {
    const std::string* v = lookup(key);
    std::size_t out = def;
    if (v) {
        char* end = nullptr;
        const long long r = std::strtoll(v->c_str(), &end, 10);
        if (v->empty() || *end != '\0' || r < 0)
            throw InvalidArgumentError(context_ + ": option " + key + "='" + *v + "' is not a count");
        out = static_cast<std::size_t>(r);
    }
    used_.emplace_back(key, std::to_string(out));
    return out;
}

bool OptionReader::flag(const std::string& key, bool def) {
    const std::string* v = lookup(key);
    bool out = def;
    if (v) {
        if (*v == "true" || *v == "1") {
            out = true;
        } else if (*v == "false" || *v == "0") {
            out = false;
        } else {
            throw InvalidArgumentError(context_ + ": option " + key + "='" + *v + "' is not a boolean");
        }
    }
    used_.emplace_back(key, out ? "true" : "false");
    return out;
}

void OptionReader::finish() const {
    for (const auto& [k, v] : opts_)
        if (!read_.count(k)) throw InvalidArgumentError(context_ + ": unknown option '" + k + "'");
}

// ---------------------------------------------------------------------------
// Parameter parsing

namespace {

[[noreturn]] void bad_choice(const std::string& ctx, const std::string& key, const std::string& v) {
    throw InvalidArgumentError(ctx + ": unsupported " + key + " '" + v + "'");
}

template <typename T>
T choose(OptionReader& r, const std::string& ctx, const std::string& key, const std::string& def,
         const std::vector<std::pair<std::string, T>>& table) {
    const std::string v = r.text(key, def);
    for (const auto& [name, val] : table)
        if (name == v) return val;
    bad_choice(ctx, key, v);
}

KernelSpec kernel_for(OptionReader& r, const std::string& ctx, const std::string& axis, std::span<const double> v) {
    KernelSpec k;
    k.kind = choose<KernelKind>(r, ctx, "kernel", "gaussian",
                                {{"gaussian", KernelKind::gaussian}, {"laplace", KernelKind::laplace}});
    // 0 selects the median heuristic.
    const double s = r.real("sigma_" + axis, 0.0);
    k.sigma = s == 0.0 ? median_heuristic_sigma(VectorSample::from_column(v)) : s;
    return k;
}

KdeSpec kde_for(OptionReader& r, const PairedSample& p) {
    KdeSpec spec = silverman_bandwidths(p);
    const double b1 = r.real("b1", 0.0), b2 = r.real("b2", 0.0);
    if (b1 != 0.0) spec.bandwidths[0] = b1;
    if (b2 != 0.0) spec.bandwidths[1] = b2;
    return spec;
}

DivergenceKind divergence_for(OptionReader& r, const std::string& ctx) {
    DivergenceKind k;
    k.kind = choose<DivergenceKindTag>(
        r, ctx, "divergence", "kl",
        {{"kl", DivergenceKindTag::kl}, {"hellinger", DivergenceKindTag::hellinger}, {"gamma", DivergenceKindTag::gamma}});
    if (k.kind == DivergenceKindTag::gamma) k.gamma = r.real("gamma", 0.5);
    return k;
}

LgcTestSpec lgc_spec_for(OptionReader& r, const std::string& ctx, bool series) {
    LgcTestSpec s;
    s.q_low = r.real("q_low", s.q_low);
    s.q_high = r.real("q_high", s.q_high);
    s.h = choose<LgcFunctional>(r, ctx, "h", "rho2",
                                {{"rho2", LgcFunctional::rho_squared},
                                 {"abs_rho", LgcFunctional::rho_abs},
                                 {"rho", LgcFunctional::rho}});
    s.mode = choose<LgcMode>(r, ctx, "mode", "simplified2",
                             {{"simplified2", LgcMode::simplified2}, {"full5", LgcMode::full5}});
    const double b1 = r.real("b1", 0.0), b2 = r.real("b2", 0.0);
    if (b1 != 0.0 || b2 != 0.0) s.bandwidths = Bandwidths{b1 != 0.0 ? b1 : b2, b2 != 0.0 ? b2 : b1};
    if (series) {
        s.lag_first = r.count("lag_first", 1);
        s.lag_last = r.count("lag_last", s.lag_first);
        s.aggregate =
            choose<LagAggregate>(r, ctx, "aggregate", "sum", {{"sum", LagAggregate::sum}, {"max", LagAggregate::max}});
    }
    return s;
}

Scheme scheme_for(OptionReader& r, const std::string& ctx) {
    return choose<Scheme>(r, ctx, "resampling", "permutation",
                          {{"permutation", Scheme::permutation},
                           {"iid_bootstrap", Scheme::iid_bootstrap},
                           {"block_bootstrap", Scheme::block_bootstrap}});
}

std::optional<CorrelationKind> correlation_kind(const std::string& name) {
    if (name == "pearson") return CorrelationKind::pearson;
    if (name == "spearman") return CorrelationKind::spearman;
    if (name == "kendall") return CorrelationKind::kendall;
    if (name == "van_der_waerden") return CorrelationKind::van_der_waerden;
    return std::nullopt;
}

EmbeddingSpec embedding_for(OptionReader& r, const SeriesSample& s) {
    EmbeddingSpec e;
    e.k = r.count("k", e.k);
    // Radius in units of the series standard deviation.
    e.epsilon = r.real("epsilon_sd", 1.0) * population_sd(s.values());
    return e;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

// ---------------------------------------------------------------------------
// Catalogs

const std::vector<std::string>& paired_measure_names() {
    static const std::vector<std::string> v{"pearson", "spearman", "kendall",    "van_der_waerden",
                                            "conditional_correlation", "dcor",   "dcov",
                                            "hsic",    "cvm",      "ks",         "hhg",
                                            "canova",  "divergence", "lgc"};
    return v;
}

const std::vector<std::string>& series_measure_names() {
    static const std::vector<std::string> v{"acf", "correlation_integral", "bds", "cvm_lag", "lgc_serial"};
    return v;
}

const std::vector<std::string>& paired_test_names() {
    static const std::vector<std::string> v{"pearson", "spearman", "kendall", "van_der_waerden", "dcov", "hsic",
                                            "cvm",     "density",  "hhg",     "canova",          "lgc"};
    return v;
}

const std::vector<std::string>& series_test_names() {
    static const std::vector<std::string> v{"acf", "bds", "cvm_lag", "lgc_serial"};
    return v;
}

bool is_series_measure(const std::string& name) { return contains(series_measure_names(), name); }
bool is_series_test(const std::string& name) { return contains(series_test_names(), name); }

// ---------------------------------------------------------------------------
// Dispatch

MeasureRecord compute_measure(const std::string& name, const PairedSample& p, const Options& o) {
    OptionReader r(o, name);
    double v = 0.0;
    if (const auto k = correlation_kind(name)) {
        r.finish();
        v = correlation(p, *k);
    } else if (name == "conditional_correlation") {
        Region g;
        g.x_low = r.real("x_low", g.x_low);
        g.x_high = r.real("x_high", g.x_high);
        g.y_low = r.real("y_low", g.y_low);
        g.y_high = r.real("y_high", g.y_high);
        r.finish();
        v = conditional_correlation(p, g);
    } else if (name == "dcor" || name == "dcov") {
        const double alpha = r.real("alpha", 1.0);
        r.finish();
        v = name == "dcor" ? dcor(p, alpha) : dcov_dcor(p, alpha).v2_xy;
    } else if (name == "hsic") {
        const KernelSpec kx = kernel_for(r, name, "x", p.x());
        const double sy = r.real("sigma_y", 0.0);
        r.finish();
        const KernelSpec ky{kx.kind, sy == 0.0 ? median_heuristic_sigma(VectorSample::from_column(p.y())) : sy};
        v = hsic_statistic(VectorSample::from_column(p.x()), VectorSample::from_column(p.y()), kx, ky);
    } else if (name == "cvm" || name == "ks") {
        r.finish();
        v = name == "cvm" ? cvm_statistic(p) : ks_statistic(p);
    } else if (name == "hhg") {
        const auto d = choose<HhgDistance>(r, name, "distance", "euclidean",
                                           {{"euclidean", HhgDistance::euclidean}, {"rank", HhgDistance::rank}});
        r.finish();
        v = hhg_statistic(p, d);
    } else if (name == "canova") {
        const std::size_t k = r.count("k", kDefaultCanovaK);
        r.finish();
        v = canova_statistic(p, k);
    } else if (name == "divergence") {
        const DivergenceKind kind = divergence_for(r, name);
        const KdeSpec spec = kde_for(r, p);
        const double trim = r.real("trim", kDefaultTrim);
        r.finish();
        v = divergence_estimate(p, kind, spec, trim);
    } else if (name == "lgc") {
        const LgcTestSpec spec = lgc_spec_for(r, name, false);
        r.finish();
        v = lgc_functional(p, spec);
    } else {
        throw InvalidArgumentError("unknown measure '" + name + "'");
    }
    return {name, v, r.used()};
}

MeasureRecord compute_series_measure(const std::string& name, const SeriesSample& s, const Options& o) {
    OptionReader r(o, name);
    double v = 0.0;
    if (name == "acf") {
        const std::size_t lag = r.count("lag", 1);
        const bool sq = r.flag("squared", false);
        r.finish();
        v = acf(s, lag, sq);
    } else if (name == "correlation_integral" || name == "bds") {
        const EmbeddingSpec e = embedding_for(r, s);
        r.finish();
        v = name == "bds" ? bds_statistic(s, e) : correlation_integral(s, e);
    } else if (name == "cvm_lag") {
        const std::size_t k = r.count("k_max", 1);
        const bool w = r.flag("weighted", false);
        r.finish();
        v = cvm_lag_aggregate(s, k, w);
    } else if (name == "lgc_serial") {
        const LgcTestSpec spec = lgc_spec_for(r, name, true);
        r.finish();
        v = lgc_functional(s, spec);
    } else {
        throw InvalidArgumentError("unknown series measure '" + name + "'");
    }
    return {name, v, r.used()};
}

TestReport run_test(const std::string& name, const PairedSample& p, const Options& o, const ResampleConfig& cfg,
                    Settings* params) {
    OptionReader r(o, name);
    TestReport rep;
    if (const auto k = correlation_kind(name)) {
        r.finish();
        rep = correlation_test(p, *k, cfg);
    } else if (name == "dcov") {
        const double alpha = r.real("alpha", 1.0);
        r.finish();
        rep = dcov_test(p, alpha, cfg);
    } else if (name == "hsic") {
        const KernelSpec kx = kernel_for(r, name, "x", p.x());
        const double sy = r.real("sigma_y", 0.0);
        r.finish();
        const KernelSpec ky{kx.kind, sy == 0.0 ? median_heuristic_sigma(VectorSample::from_column(p.y())) : sy};
        rep = hsic_test(VectorSample::from_column(p.x()), VectorSample::from_column(p.y()), kx, ky, cfg);
    } else if (name == "cvm") {
        r.finish();
        rep = cvm_test(p, cfg);
    } else if (name == "density") {
        const DivergenceKind kind = divergence_for(r, name);
        const KdeSpec spec = kde_for(r, p);
        const double trim = r.real("trim", kDefaultTrim);
        r.finish();
        rep = density_test(p, kind, spec, trim, cfg);
    } else if (name == "hhg") {
        const auto d = choose<HhgDistance>(r, name, "distance", "euclidean",
                                           {{"euclidean", HhgDistance::euclidean}, {"rank", HhgDistance::rank}});
        r.finish();
        rep = hhg_test(p, d, cfg);
    } else if (name == "canova") {
        const std::size_t k = r.count("k", kDefaultCanovaK);
        r.finish();
        rep = canova_test(p, k, cfg);
    } else if (name == "lgc") {
        LgcTestSpec spec = lgc_spec_for(r, name, false);
        spec.resampling = scheme_for(r, name);
        spec.block_length = r.count("block_length", 0);
        r.finish();
        rep = lgc_test(p, spec, cfg);
    } else {
        throw InvalidArgumentError("unknown test '" + name + "'");
    }
    if (params) *params = r.used();
    return rep;
}

TestReport run_series_test(const std::string& name, const SeriesSample& s, const Options& o,
                           const ResampleConfig& cfg, Settings* params) {
    OptionReader r(o, name);
    TestReport rep;
    if (name == "acf") {
        const std::size_t lag = r.count("lag", 1);
        const bool sq = r.flag("squared", false);
        r.finish();
        rep = acf_test(s, lag, sq, cfg);
    } else if (name == "bds") {
        const EmbeddingSpec e = embedding_for(r, s);
        r.finish();
        rep = bds_test(s, e, cfg);
    } else if (name == "cvm_lag") {
        const std::size_t k = r.count("k_max", 1);
        const bool w = r.flag("weighted", false);
        r.finish();
        rep = cvm_lag_test(s, k, w, cfg);
    } else if (name == "lgc_serial") {
        LgcTestSpec spec = lgc_spec_for(r, name, true);
        spec.resampling = scheme_for(r, name);
        r.finish();
        rep = lgc_test(s, spec, cfg);
    } else {
        throw InvalidArgumentError("unknown series test '" + name + "'");
    }
    if (params) *params = r.used();
    return rep;
}

// ---------------------------------------------------------------------------
// Generators and maps

const std::vector<std::string>& family_names() {
    static const std::vector<std::string> v{"gaussian", "t",       "garch",          "parabola",
                                            "circle",   "clayton", "gaussian_copula"};
    return v;
}

GeneratorSpec generator_spec(const std::string& family, const Options& o, std::size_t n, std::uint64_t seed,
                             Settings* params) {
    OptionReader r(o, family);
    GeneratorSpec spec;
    spec.n = n;
    spec.seed = seed;
    if (family == "gaussian") {
        spec.family = GaussianFamily{r.real("rho", 0.0)};
    } else if (family == "t") {
        const double nu = r.real("nu", 4.0);
        spec.family = StudentTFamily{nu, r.real("rho", 0.0)};
    } else if (family == "garch") {
        const GarchFamily d;
        const double a = r.real("alpha", d.alpha), b = r.real("beta", d.beta);
        spec.family = GarchFamily{a, b, r.real("gamma", d.gamma)};
    } else if (family == "parabola") {
        spec.family = ParabolaFamily{r.real("sigma_eps", 1.0)};
    } else if (family == "circle") {
        spec.family = CircleFamily{r.real("sigma_n", CircleFamily{}.sigma_n)};
    } else if (family == "clayton") {
        spec.family = ClaytonFamily{r.real("theta", 1.0)};
    } else if (family == "gaussian_copula") {
        spec.family = GaussianCopulaFamily{r.real("rho", 0.0)};
    } else {
        throw InvalidArgumentError("unknown family '" + family + "'");
    }
    r.finish();
    validate(spec);
    if (params) *params = r.used();
    return spec;
}

LgcMap run_lgc_map(const PairedSample& p, const Options& o, Settings* params) {
    OptionReader r(o, "lgc-map");
    GridSpec g;
    g.nx = r.count("nx", g.nx);
    g.ny = r.count("ny", g.ny);
    g.q_low = r.real("q_low", g.q_low);
    g.q_high = r.real("q_high", g.q_high);
    const LgcScale scale = choose<LgcScale>(r, "lgc-map", "scale", "z", {{"z", LgcScale::z}, {"raw", LgcScale::raw}});
    const LgcMode mode =
        choose<LgcMode>(r, "lgc-map", "mode", "full5", {{"full5", LgcMode::full5}, {"simplified2", LgcMode::simplified2}});
    const double b1 = r.real("b1", 0.0), b2 = r.real("b2", 0.0);
    r.finish();
    std::optional<Bandwidths> bw;
    if (b1 != 0.0 || b2 != 0.0) bw = Bandwidths{b1 != 0.0 ? b1 : b2, b2 != 0.0 ? b2 : b1};
    LgcMap m = lgc_map(p, g, scale, bw, mode);
    if (params) {
        *params = r.used();
        params->emplace_back("b1_used", detail::num(m.bandwidths.b1));
        params->emplace_back("b2_used", detail::num(m.bandwidths.b2));
    }
    return m;
}

}  // namespace nldep
