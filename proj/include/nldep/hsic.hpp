#pragma once

#include "nldep/distance_covariance.hpp"
#include "nldep/matrix.hpp"
#include "nldep/resampling.hpp"

namespace nldep {

enum class KernelKind { gaussian, laplace };

struct KernelSpec {
    KernelKind kind = KernelKind::gaussian;
    double sigma = 1.0;
};

// Gaussian exp(-|x-y|^2 / (2 sigma^2)); Laplace exp(-|x-y| / sigma).
Matrix gram_matrix(const VectorSample& v, const KernelSpec& k);

// (n-1)^-2 tr(K H L H).
double hsic_statistic(const VectorSample& x, const VectorSample& y, const KernelSpec& kx, const KernelSpec& ky);
// Empirical version of the three-expectation decomposition:
// n^-2 sum K L + n^-4 sum K sum L - 2 n^-3 sum_i K_i. L_i.
double hsic_three_term(const VectorSample& x, const VectorSample& y, const KernelSpec& kx, const KernelSpec& ky);

TestReport hsic_test(const VectorSample& x, const VectorSample& y, const KernelSpec& kx, const KernelSpec& ky,
                     const ResampleConfig& cfg);

double median_heuristic_sigma(const VectorSample& v);

}  // namespace nldep
