#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "nldep/resampling.hpp"
#include "nldep/samples.hpp"

namespace nldep {

// Axis-aligned box; a pair is inside when low < v <= high on both axes.
struct Region {
    double x_low = -std::numeric_limits<double>::infinity();
    double x_high = std::numeric_limits<double>::infinity();
    double y_low = -std::numeric_limits<double>::infinity();
    double y_high = std::numeric_limits<double>::infinity();

    bool contains(double x, double y) const { return x > x_low && x <= x_high && y > y_low && y <= y_high; }
};

struct QuadrantMap {
    std::vector<std::pair<double, double>> points;
    std::vector<double> values;
};

double pearson(const PairedSample& p);
double spearman(const PairedSample& p);
// tau_a with ties counted as neither concordant nor discordant; O(n log n).
double kendall(const PairedSample& p);
double van_der_waerden(const PairedSample& p);
double conditional_correlation(const PairedSample& p, const Region& r);
double acf(const SeriesSample& s, std::size_t k, bool squared);
QuadrantMap quadrant_map(const PairedSample& p, const std::vector<std::pair<double, double>>& grid);
enum class CorrelationKind { pearson, spearman, kendall, van_der_waerden };

const char* correlation_name(CorrelationKind k);
double correlation(const PairedSample& p, CorrelationKind k);

// Two-sided permutation tests: the statistic is |correlation|.
TestReport correlation_test(const PairedSample& p, CorrelationKind k, const ResampleConfig& cfg);
// |acf(k)| against series permutations.
TestReport acf_test(const SeriesSample& s, std::size_t k, bool squared, const ResampleConfig& cfg);

// |population covariance - integral of (F_XY - F_X F_Y)| over the plane.
double hoeffding_covariance_identity_check(const PairedSample& p);

}  // namespace nldep
