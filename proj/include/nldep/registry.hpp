#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "nldep/datagen.hpp"
#include "nldep/lgc.hpp"
#include "nldep/resampling.hpp"
#include "nldep/samples.hpp"

namespace nldep {

// String key/value parameters for name-based dispatch.
using Options = std::map<std::string, std::string>;

// Typed reads with defaults; finish() rejects keys nobody read.
class OptionReader {
public:
    OptionReader(const Options& o, std::string context) : opts_(o), context_(std::move(context)) {}

    bool has(const std::string& key) const { return opts_.count(key) != 0; }
    std::string text(const std::string& key, const std::string& def);
    double real(const std::string& key, double def);
    std::size_t count(const std::string& key, std::size_t def);
    bool flag(const std::string& key, bool def);
    void finish() const;
    // Parameter set as actually used, defaults included.
    const Settings& used() const { return used_; }

private:
    const std::string* lookup(const std::string& key);

    const Options& opts_;
    std::string context_;
    std::set<std::string> read_;
    Settings used_;
};

struct MeasureRecord {
    std::string name;
    double value = 0.0;
    Settings settings;
};

const std::vector<std::string>& paired_measure_names();
const std::vector<std::string>& series_measure_names();
const std::vector<std::string>& paired_test_names();
const std::vector<std::string>& series_test_names();

bool is_series_measure(const std::string& name);
bool is_series_test(const std::string& name);

// Unknown names and option keys raise InvalidArgumentError.
MeasureRecord compute_measure(const std::string& name, const PairedSample& p, const Options& o);
MeasureRecord compute_series_measure(const std::string& name, const SeriesSample& s, const Options& o);
// params, when given, receives the full parameter set including defaults.
TestReport run_test(const std::string& name, const PairedSample& p, const Options& o, const ResampleConfig& cfg,
                    Settings* params = nullptr);
TestReport run_series_test(const std::string& name, const SeriesSample& s, const Options& o,
                           const ResampleConfig& cfg, Settings* params = nullptr);

const std::vector<std::string>& family_names();
// Family parameters by key (rho, nu, alpha, beta, gamma, sigma_eps, sigma_n, theta).
GeneratorSpec generator_spec(const std::string& family, const Options& o, std::size_t n, std::uint64_t seed,
                             Settings* params = nullptr);

// Keys: nx, ny, q_low, q_high, scale (z|raw), mode (full5|simplified2), b1, b2.
LgcMap run_lgc_map(const PairedSample& p, const Options& o, Settings* params = nullptr);

}  // namespace nldep
