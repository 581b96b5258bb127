#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nldep/resampling.hpp"
#include "nldep/samples.hpp"

namespace nldep {

// Mean over observations of (F_XY - F_X F_Y)^2, n^-1 normalized ECDFs.
double cvm_statistic(const PairedSample& p);
// Sup over the observation grid of |F_XY - F_X F_Y|.
double ks_statistic(const PairedSample& p);
// Sum of lag-i CvM statistics, i = 1..k_max; weighted multiplies term i by (n - i).
double cvm_lag_aggregate(const SeriesSample& s, std::size_t k_max, bool weighted);

TestReport cvm_test(const PairedSample& p, const ResampleConfig& cfg);
TestReport cvm_lag_test(const SeriesSample& s, std::size_t k_max, bool weighted, const ResampleConfig& cfg);

struct CvmNullSpec {
    std::size_t truncation = 200;
    std::size_t mc_draws = 5000;
    std::uint64_t seed = 0;
};

// Draws of sum_{i,j<=M} eta_i eta_j W_ij^2 with eta_m = (m pi)^-2. Cells are
// generated in shells max(i,j) = 1..M so draws for a smaller M with the same
// seed use the same normals on the shared cells.
std::vector<double> cvm_null_draws(const CvmNullSpec& spec);
double cvm_null_quantile(const CvmNullSpec& spec, double level);
double cvm_null_mean(const CvmNullSpec& spec);

// Subset A of the coordinates {0..k-1}, |A| >= 2.
struct SubsetIndex {
    std::vector<std::size_t> members;
    std::size_t k = 0;
};

// Plug-in mu_A at each evaluation point (each of length k).
std::vector<double> moebius_statistic(const std::vector<std::vector<double>>& samples, const SubsetIndex& a,
                                      const std::vector<std::vector<double>>& eval_points);
// max |mu_A| over the sample points; coordinates 1..k-1 permuted independently.
TestReport moebius_test(const std::vector<std::vector<double>>& samples, const SubsetIndex& a,
                        const ResampleConfig& cfg);

}  // namespace nldep
