#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nldep/datagen.hpp"
#include "nldep/density.hpp"
#include "nldep/lgc.hpp"
#include "nldep/local_measures.hpp"

using namespace nldep;

// Targets the estimators as specified do not reach. These run as a separate
// ctest entry and are expected to fail; see the README.

namespace {

double map_mad(const LgcMap& m, double rho) {
    double s = 0;
    int k = 0;
    for (const auto& pt : m.points)
        if (pt.converged) {
            s += std::fabs(pt.fit.params.rho - rho);
            ++k;
        }
    return s / k;
}

}  // namespace

// Single samples at n = 5000 scatter with sd near 0.2 around the smoothed
// value rho / ((1 + b^2)^2 - rho^2), so most land outside the band.
TEST(Unattained, LdfGaussianCentreAtN5000) {
    int within = 0;
    const int seeds = 20;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        const auto p = generate_paired({GaussianFamily{0.5}, 5000, seed});
        const double g = local_dependence_function(p, {{0.0, 0.0}}, silverman_bandwidths(p)).gamma[0];
        within += std::fabs(g - 0.5 / (1 - 0.25)) < 0.15;
    }
    EXPECT_GE(within, 18);
}

// The leave-one-out log score favours the smallest live bandwidth, whose maps
// are far noisier than the plug-in choice.
TEST(Unattained, CvBandwidthNoWorseThanPlugin) {
    const auto cands = log_spaced(0.1, 1.5, 8);
    int ok = 0;
    const int seeds = 3;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        const auto p = to_z_scale(generate_paired({GaussianFamily{-0.5}, 784, seed}));
        GridSpec g;
        g.nx = g.ny = 9;
        const auto cv = lgc_map(p, g, LgcScale::z, bandwidth_cv(p, cands), LgcMode::full5);
        const auto plug = lgc_map(p, g, LgcScale::z, std::nullopt, LgcMode::full5);
        ok += map_mad(cv, -0.5) <= map_mad(plug, -0.5) + 0.05;
    }
    EXPECT_EQ(ok, seeds);
}
