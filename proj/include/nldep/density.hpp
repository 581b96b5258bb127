#pragma once

#include <span>
#include <vector>

#include "nldep/distance_covariance.hpp"
#include "nldep/resampling.hpp"
#include "nldep/samples.hpp"

namespace nldep {

enum class DensityKernel { gaussian };

struct KdeSpec {
    std::vector<double> bandwidths;
    DensityKernel kernel = DensityKernel::gaussian;
};

// Product Gaussian kernel estimate at one point.
double kde(const VectorSample& points, const KdeSpec& spec, std::span<const double> at);

// Normal-reference rule per coordinate: sd_i * (4 / ((d + 2) n))^(1 / (d + 4)).
// For d = 2 this is sd_i * n^(-1/6).
KdeSpec silverman_bandwidths(const VectorSample& points);
KdeSpec silverman_bandwidths(const PairedSample& p);

enum class DivergenceKindTag { hellinger, kl, gamma };

struct DivergenceKind {
    DivergenceKindTag kind = DivergenceKindTag::kl;
    double gamma = 0.5;
};

inline constexpr double kDefaultTrim = 3.0;

// Trimmed empirical average n^-1 sum_i B(f_XY, f_X, f_Y)(X_i, Y_i) w_i with
// w_i = 1{|X_i - mean X| <= c sd_X} 1{|Y_i - mean Y| <= c sd_Y}.
double divergence_estimate(const PairedSample& p, const DivergenceKind& kind, const KdeSpec& spec,
                           double trim_c = kDefaultTrim);

TestReport density_test(const PairedSample& p, const DivergenceKind& kind, const KdeSpec& spec, double trim_c,
                        const ResampleConfig& cfg);

}  // namespace nldep
