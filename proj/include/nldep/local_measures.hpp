#pragma once

#include <utility>
#include <vector>

#include "nldep/density.hpp"
#include "nldep/samples.hpp"

namespace nldep {

struct CurveEstimate {
    std::vector<double> grid;
    std::vector<double> values;
    double bandwidth = 0.0;
};

// rho(x) = beta(x) sd_X / sqrt((beta(x) sd_X)^2 + s2(x)) with beta the
// local-linear slope and s2 the kernel-weighted variance of Y at x.
CurveEstimate correlation_curve(const PairedSample& p, const std::vector<double>& grid, double bandwidth);

struct LdfGrid {
    std::vector<std::pair<double, double>> points;
    std::vector<double> gamma;  // NaN where the density fell below the floor
    std::vector<bool> ok;
    std::vector<double> bandwidths;
};

inline constexpr double kLdfDensityFloor = 1e-12;

// d^2/dxdy ln f at each grid point, from the product Gaussian KDE.
LdfGrid local_dependence_function(const PairedSample& p, const std::vector<std::pair<double, double>>& grid,
                                  const KdeSpec& spec);

}  // namespace nldep
