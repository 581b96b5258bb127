#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nldep/rng.hpp"
#include "nldep/samples.hpp"

namespace nldep {

enum class Tail { right, left };
enum class Scheme { permutation, iid_bootstrap, block_bootstrap };

const char* tail_name(Tail t);
const char* scheme_name(Scheme s);

using Settings = std::vector<std::pair<std::string, std::string>>;

struct TestReport {
    std::string test;
    double statistic = 0.0;
    std::size_t replicates = 0;
    std::vector<double> null_draws;
    double p_value = 1.0;
    Scheme scheme = Scheme::permutation;
    Tail tail = Tail::right;
    std::uint64_t seed = 0;
    Settings settings;
};

inline constexpr std::size_t kDefaultReplicates = 999;
inline constexpr std::size_t kMinReplicates = 99;

struct ResampleConfig {
    std::size_t replicates = kDefaultReplicates;
    std::uint64_t seed = 0;
    Tail tail = Tail::right;
};

// Cap on worker threads for replicate loops; 0 restores the default
// (hardware concurrency). Results never depend on this value.
void set_max_threads(std::size_t n);
std::size_t max_threads();

// (1 + #{null >= observed}) / (R + 1); the left tail counts null <= observed.
double add_one_p_value(double observed, std::span<const double> null_draws, Tail tail);

// Generic engine: replicate r draws from Rng(seed, r + 1).
TestReport run_resampling(double observed, const std::function<double(Rng&, std::size_t)>& replicate,
                          const ResampleConfig& cfg, Scheme scheme);

// Statistic of the pairing (x_i, y_{perm[i]}).
using IndexStatistic = std::function<double(std::span<const std::size_t>)>;

TestReport permute_test_indexed(const IndexStatistic& stat, std::size_t n, const ResampleConfig& cfg);
TestReport permute_test(const std::function<double(const PairedSample&)>& stat, const PairedSample& p,
                        const ResampleConfig& cfg);
// Permutes the whole series (iid null).
TestReport series_permute_test(const std::function<double(const SeriesSample&)>& stat, const SeriesSample& s,
                               const ResampleConfig& cfg);

std::size_t default_block_length(std::size_t n);

// Circular moving-block resampling indices of length n.
std::vector<std::size_t> block_bootstrap_indices(std::size_t n, std::size_t block_length, Rng& rng);

// Replicate r of a circular block bootstrap, reproducible by index.
class BlockBootstrap {
public:
    BlockBootstrap(const SeriesSample& s, std::size_t block_length, std::size_t replicates, std::uint64_t seed);

    std::size_t size() const noexcept { return replicates_; }
    std::size_t block_length() const noexcept { return block_length_; }
    std::vector<std::size_t> indices(std::size_t r) const;
    SeriesSample operator[](std::size_t r) const;

private:
    std::vector<double> values_;
    std::size_t block_length_;
    std::size_t replicates_;
    std::uint64_t seed_;
};

std::string to_json(const TestReport& r, bool include_null_draws = false);

}  // namespace nldep
