#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "nldep/matrix.hpp"
#include "nldep/resampling.hpp"
#include "nldep/rng.hpp"
#include "nldep/samples.hpp"

namespace nldep {

// n points in R^p, stored row-major.
class VectorSample {
public:
    VectorSample(std::size_t n, std::size_t p, std::vector<double> data);
    static VectorSample from_column(std::span<const double> v);
    static VectorSample from_columns(std::span<const double> a, std::span<const double> b);

    std::size_t size() const noexcept { return n_; }
    std::size_t dim() const noexcept { return p_; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * p_, p_}; }
    std::span<const double> data() const noexcept { return data_; }

private:
    std::size_t n_;
    std::size_t p_;
    std::vector<double> data_;
};

// Euclidean norm of a - b computed with max-abs scaling.
double euclidean_distance(std::span<const double> a, std::span<const double> b);

struct CenteredDistanceMatrix {
    Matrix a;
    double alpha = 1.0;
};

Matrix distance_matrix(const VectorSample& v, double alpha = 1.0);
CenteredDistanceMatrix double_center(const Matrix& d, double alpha = 1.0);

struct DcovResult {
    double v2_xy = 0.0;
    double v2_x = 0.0;
    double v2_y = 0.0;
    // Empty when V(X) V(Y) = 0.
    std::optional<double> r2;
};

DcovResult dcov_dcor(const VectorSample& x, const VectorSample& y, double alpha = 1.0);
DcovResult dcov_dcor(const PairedSample& p, double alpha = 1.0);
// Distance correlation R_n (square root of R_n^2); throws DegenerateSampleError
// when either sample is constant.
double dcor(const PairedSample& p, double alpha = 1.0);

struct DcovTerms {
    double s1 = 0.0;
    double s2 = 0.0;
    double s3 = 0.0;
};

DcovTerms dcov_terms(const VectorSample& x, const VectorSample& y, double alpha = 1.0);

using PairSampler = std::function<std::pair<double, double>(Rng&)>;

struct DcovPopulationEstimate {
    double v2_xy = 0.0;
    double v2_x = 0.0;
    double v2_y = 0.0;
    double r = 0.0;  // R(X,Y), 0 when the denominator vanishes
    double se_v2_xy = 0.0;
    std::size_t blocks = 0;
};

// Population V^2 from the three expectation terms, each estimated by
// U-statistics over disjoint blocks of distinct draws.
DcovPopulationEstimate dcov_population_mc(const PairSampler& sampler, double alpha, std::size_t draws,
                                          std::uint64_t seed, std::size_t block_size = 1000);

TestReport dcov_test(const VectorSample& x, const VectorSample& y, double alpha, const ResampleConfig& cfg);
TestReport dcov_test(const PairedSample& p, double alpha, const ResampleConfig& cfg);

}  // namespace nldep
