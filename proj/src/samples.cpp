#include "nldep/samples.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nldep/error.hpp"
#include "nldep/normal.hpp"

namespace nldep {

namespace {

void require_finite(std::span<const double> v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]))
            throw InvalidArgumentError(std::string(what) + ": non-finite entry at index " + std::to_string(i));
    }
}

}  // namespace

PairedSample::PairedSample(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size()) throw ShapeError("PairedSample: x and y differ in length");
    if (x_.size() < 2) throw SampleTooSmallError("PairedSample: need at least 2 pairs");
    require_finite(x_, "PairedSample.x");
    require_finite(y_, "PairedSample.y");
}

SeriesSample::SeriesSample(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) throw SampleTooSmallError("SeriesSample: need at least 2 values");
    require_finite(values_, "SeriesSample");
}

ScoreVector ranks(std::span<const double> v, TiePolicy policy) {
    if (v.empty()) throw InvalidArgumentError("ranks: empty input");
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    ScoreVector out{std::vector<double>(n), ScoreKind::rank, policy};
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && v[order[j]] == v[order[i]]) ++j;
        if (j - i > 1 && policy == TiePolicy::error) throw TieError("ranks: tied values present");
        // Positions i..j-1 hold ranks i+1..j; their average is (i+1+j)/2.
        const double r = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) out.scores[order[k]] = r;
        i = j;
    }
    return out;
}

ScoreVector uniform_scores(std::span<const double> v, TiePolicy policy) {
    ScoreVector out = ranks(v, policy);
    const double denom = static_cast<double>(v.size() + 1);
    for (double& s : out.scores) s /= denom;
    out.kind = ScoreKind::uniform;
    return out;
}

ScoreVector normal_scores(std::span<const double> v, TiePolicy policy) {
    ScoreVector out = uniform_scores(v, policy);
    for (double& s : out.scores) s = norm_quantile(s);
    out.kind = ScoreKind::normal;
    return out;
}

double mean(std::span<const double> v) {
    if (v.empty()) throw InvalidArgumentError("mean: empty input");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double population_sd(std::span<const double> v) {
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

double quantile(std::span<const double> v, double level) {
    if (v.empty()) throw InvalidArgumentError("quantile: empty input");
    if (!(level >= 0.0 && level <= 1.0)) throw ParamError("quantile: level outside [0,1]");
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    const double h = level * static_cast<double>(s.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

std::vector<double> standardize(std::span<const double> v) {
    const double m = mean(v);
    const double sd = population_sd(v);
    if (!(sd > 0.0)) throw DegenerateSampleError("standardize: zero variance");
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - m) / sd;
    return out;
}

double ecdf(std::span<const double> v, double t) {
    if (v.empty()) throw InvalidArgumentError("ecdf: empty input");
    std::size_t c = 0;
    for (double x : v) c += x <= t ? 1 : 0;
    return static_cast<double>(c) / static_cast<double>(v.size());
}

PairedSample lag_pairs(const SeriesSample& s, std::size_t k) {
    const std::size_t n = s.size();
    if (k < 1 || k + 2 > n) throw LagError("lag_pairs: lag " + std::to_string(k) + " outside [1, n-2]");
    const auto v = s.values();
    std::vector<double> lead(v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    std::vector<double> lagged(v.begin(), v.end() - static_cast<std::ptrdiff_t>(k));
    return PairedSample(std::move(lead), std::move(lagged));
}

}  // namespace nldep
