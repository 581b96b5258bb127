#include "nldep/resampling.hpp"

#include <atomic>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include <json.hpp>

#include "nldep/error.hpp"
#include "parallel.hpp"

namespace nldep {

namespace {
std::atomic<std::size_t> g_max_threads{0};

void check_replicates(std::size_t r) {
    if (r < kMinReplicates)
        throw ParamError("resampling: replicates must be >= " + std::to_string(kMinReplicates) + ", got " +
                         std::to_string(r));
}
}  // namespace

const char* tail_name(Tail t) { return t == Tail::right ? "right" : "left"; }

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::permutation: return "permutation";
        case Scheme::iid_bootstrap: return "iid_bootstrap";
        case Scheme::block_bootstrap: return "block_bootstrap";
    }
    return "unknown";
}

void set_max_threads(std::size_t n) { g_max_threads.store(n); }

std::size_t max_threads() {
    const std::size_t n = g_max_threads.load();
    if (n != 0) return n;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

double add_one_p_value(double observed, std::span<const double> null_draws, Tail tail) {
    std::size_t count = 0;
    for (double d : null_draws) {
        if (tail == Tail::right ? d >= observed : d <= observed) ++count;
    }
    return static_cast<double>(1 + count) / static_cast<double>(null_draws.size() + 1);
}

TestReport run_resampling(double observed, const std::function<double(Rng&, std::size_t)>& replicate,
                          const ResampleConfig& cfg, Scheme scheme) {
    check_replicates(cfg.replicates);
    TestReport rep;
    rep.statistic = observed;
    rep.replicates = cfg.replicates;
    rep.scheme = scheme;
    rep.tail = cfg.tail;
    rep.seed = cfg.seed;
    rep.null_draws.assign(cfg.replicates, 0.0);
    detail::parallel_for(cfg.replicates, [&](std::size_t r) {
        Rng rng(cfg.seed, r + 1);
        rep.null_draws[r] = replicate(rng, r);
    });
    rep.p_value = add_one_p_value(observed, rep.null_draws, cfg.tail);
    return rep;
}

TestReport permute_test_indexed(const IndexStatistic& stat, std::size_t n, const ResampleConfig& cfg) {
    check_replicates(cfg.replicates);
    std::vector<std::size_t> id(n);
    std::iota(id.begin(), id.end(), std::size_t{0});
    const double observed = stat(id);
    return run_resampling(
        observed, [&](Rng& rng, std::size_t) { return stat(rng.permutation(n)); }, cfg, Scheme::permutation);
}

TestReport permute_test(const std::function<double(const PairedSample&)>& stat, const PairedSample& p,
                        const ResampleConfig& cfg) {
    const auto x = p.x();
    const auto y = p.y();
    std::vector<double> xs(x.begin(), x.end());
    return permute_test_indexed(
        [&](std::span<const std::size_t> perm) {
            std::vector<double> yp(perm.size());
            for (std::size_t i = 0; i < perm.size(); ++i) yp[i] = y[perm[i]];
            return stat(PairedSample(xs, std::move(yp)));
        },
        p.size(), cfg);
}

TestReport series_permute_test(const std::function<double(const SeriesSample&)>& stat, const SeriesSample& s,
                               const ResampleConfig& cfg) {
    const auto v = s.values();
    return permute_test_indexed(
        [&](std::span<const std::size_t> perm) {
            std::vector<double> w(perm.size());
            for (std::size_t i = 0; i < perm.size(); ++i) w[i] = v[perm[i]];
            return stat(SeriesSample(std::move(w)));
        },
        s.size(), cfg);
}

std::size_t default_block_length(std::size_t n) {
    return static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(n)) - 1e-12));
}

std::vector<std::size_t> block_bootstrap_indices(std::size_t n, std::size_t block_length, Rng& rng) {
    if (block_length < 1 || block_length > n)
        throw ParamError("block_bootstrap: block length must lie in [1, n]");
    std::vector<std::size_t> idx;
    idx.reserve(n);
    while (idx.size() < n) {
        const std::size_t start = static_cast<std::size_t>(rng.uniform_index(n));
        for (std::size_t j = 0; j < block_length && idx.size() < n; ++j) idx.push_back((start + j) % n);
    }
    return idx;
}

BlockBootstrap::BlockBootstrap(const SeriesSample& s, std::size_t block_length, std::size_t replicates,
                               std::uint64_t seed)
    : values_(s.values().begin(), s.values().end()),
      block_length_(block_length),
      replicates_(replicates),
      seed_(seed) {
    if (block_length < 1 || block_length > values_.size())
        throw ParamError("block_bootstrap: block length must lie in [1, n]");
}

std::vector<std::size_t> BlockBootstrap::indices(std::size_t r) const {
    if (r >= replicates_) throw ParamError("block_bootstrap: replicate index out of range");
    Rng rng(seed_, r + 1);
    return block_bootstrap_indices(values_.size(), block_length_, rng);
}

SeriesSample BlockBootstrap::operator[](std::size_t r) const {
    const auto idx = indices(r);
    std::vector<double> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = values_[idx[i]];
    return SeriesSample(std::move(out));
}

std::string to_json(const TestReport& r, bool include_null_draws) {
    nlohmann::ordered_json j;
    j["test"] = r.test;
    j["statistic"] = r.statistic;
    j["p_value"] = r.p_value;
    j["replicates"] = r.replicates;
    j["scheme"] = scheme_name(r.scheme);
    j["tail"] = tail_name(r.tail);
    j["seed"] = r.seed;
    j["rng"] = Rng::kName;
    nlohmann::ordered_json settings = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.settings) settings[k] = v;
    j["settings"] = settings;
    if (include_null_draws) j["null_draws"] = r.null_draws;
    return j.dump();
}

}  // namespace nldep
