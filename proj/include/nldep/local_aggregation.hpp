#pragma once

#include <cstddef>

#include "nldep/distance_covariance.hpp"
#include "nldep/resampling.hpp"
#include "nldep/samples.hpp"

namespace nldep {

struct EmbeddingSpec {
    std::size_t k = 2;
    double epsilon = 1.0;
};

// 2/(n(n-1)) times the number of delay-vector pairs s < t (both >= k) within
// sup-norm distance epsilon (strict).
double correlation_integral(const SeriesSample& s, const EmbeddingSpec& spec);
// C_k - C_1^k.
double bds_statistic(const SeriesSample& s, const EmbeddingSpec& spec);
// Right-tailed against series permutations: repeated patterns (volatility
// clustering) push C_k above C_1^k.
TestReport bds_test(const SeriesSample& s, const EmbeddingSpec& spec, const ResampleConfig& cfg);

enum class HhgDistance { euclidean, rank };

// Sum over ordered pairs (i, j) of the 2x2 Pearson chi-square built from
// 1{d(x_i, .) <= d(x_i, x_j)} and 1{d(y_i, .) <= d(y_i, y_j)} over the other
// n - 2 points. Zero-margin tables contribute 0. O(n^2 log n).
double hhg_statistic(const VectorSample& x, const VectorSample& y);
double hhg_statistic(const PairedSample& p, HhgDistance d = HhgDistance::euclidean);
TestReport hhg_test(const PairedSample& p, HhgDistance d, const ResampleConfig& cfg);
TestReport hhg_test(const VectorSample& x, const VectorSample& y, const ResampleConfig& cfg);

inline constexpr std::size_t kDefaultCanovaK = 4;

// Sum of (Y_i - Y_j)^2 over pairs with |rank(X_i) - rank(X_j)| < K.
double canova_statistic(const PairedSample& p, std::size_t k = kDefaultCanovaK);
// Left-tailed permutation test.
TestReport canova_test(const PairedSample& p, std::size_t k, const ResampleConfig& cfg);

}  // namespace nldep
