#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nldep {

// n aligned observation pairs; n >= 2 and all entries finite.
class PairedSample {
public:
    PairedSample(std::vector<double> x, std::vector<double> y);

    std::size_t size() const noexcept { return x_.size(); }
    std::span<const double> x() const noexcept { return x_; }
    std::span<const double> y() const noexcept { return y_; }

    PairedSample swapped() const { return PairedSample(y_, x_); }

private:
    std::vector<double> x_;
    std::vector<double> y_;
};

// Univariate time series; n >= 2 and all entries finite.
class SeriesSample {
public:
    explicit SeriesSample(std::vector<double> values);

    std::size_t size() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }

private:
    std::vector<double> values_;
};

enum class ScoreKind { rank, uniform, normal };
enum class TiePolicy { average, error };

struct ScoreVector {
    std::vector<double> scores;
    ScoreKind kind = ScoreKind::rank;
    TiePolicy tie_policy = TiePolicy::average;
};

ScoreVector ranks(std::span<const double> v, TiePolicy policy = TiePolicy::average);
// rank_i / (n + 1).
ScoreVector uniform_scores(std::span<const double> v, TiePolicy policy = TiePolicy::average);
// Phi^-1 of the uniform scores.
ScoreVector normal_scores(std::span<const double> v, TiePolicy policy = TiePolicy::average);

// Population-divisor standardization: mean 0, variance 1 with divisor n.
std::vector<double> standardize(std::span<const double> v);

double ecdf(std::span<const double> v, double t);

// Pairs (values[t], values[t-k]) for t = k+1..n; requires 1 <= k <= n-2.
PairedSample lag_pairs(const SeriesSample& s, std::size_t k);

double mean(std::span<const double> v);
// Population (divide by n) standard deviation.
double population_sd(std::span<const double> v);
// Type-7 (linear interpolation) sample quantile, level in [0,1].
double quantile(std::span<const double> v, double level);

}  // namespace nldep
