#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nldep/classical.hpp"
#include "nldep/resampling.hpp"
#include "nldep/samples.hpp"

namespace nldep {

struct LgcParams {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double sigma1 = 1.0;
    double sigma2 = 1.0;
    double rho = 0.0;
};

struct Bandwidths {
    double b1 = 1.0;
    double b2 = 1.0;
};

enum class LgcMode { full5, simplified2 };

const char* lgc_mode_name(LgcMode m);

struct LocalLoglik {
    double value = 0.0;
    // d/d(mu1, mu2, sigma1, sigma2, rho)
    std::array<double, 5> gradient{};
};

// L(theta) = n^-1 sum_i w_i ln psi(X_i; theta) - 2 pi b1 b2 N2(x; mu, Sigma + diag(b^2))
// with w_i = exp(-|(X_i - x) / b|^2 / 2). The kernel is normalized to unit
// peak, so L is 2 pi b1 b2 times the objective with a density kernel: same
// maximizer, and the penalty tends to 1 as b grows.
LocalLoglik local_loglik(const PairedSample& p, std::pair<double, double> point, const LgcParams& params,
                         const Bandwidths& bw);

struct LgcFit {
    std::pair<double, double> point{};
    LgcParams params;
    Bandwidths bandwidths;
    bool converged = false;
    double objective = 0.0;
    double gradient_norm = 0.0;
    std::size_t iterations = 0;
    double mass = 0.0;  // sum of kernel weights
};

inline constexpr double kLgcTolerance = 1e-6;
inline constexpr std::size_t kLgcMaxIterations = 500;
inline constexpr double kLgcMinMass = 5.0;

struct FitOptions {
    std::optional<LgcParams> warm_start;
};

// Multi-start local likelihood fit. Throws SupportError when the kernel mass is
// at most kLgcMinMass and ConvergenceError when no start converges.
LgcFit lgc_fit_point(const PairedSample& p, std::pair<double, double> point, const Bandwidths& bw, LgcMode mode,
                     const FitOptions& opts = {});

PairedSample to_z_scale(const PairedSample& p);

// 1.75 n^(-1/6), for Z-scale data.
double bandwidth_plugin(std::size_t n);

struct CvOptions {
    std::size_t max_eval = 500;  // held-out points; evenly spaced subsample beyond this
    LgcMode mode = LgcMode::full5;
};

// Candidates are multipliers c of the per-coordinate standard deviations,
// b = (c sd_X, c sd_Y). Picks the largest mean leave-one-out log density
// ln psi(X_i; theta_{-i}(X_i)); ties go to the earlier candidate.
Bandwidths bandwidth_cv(const PairedSample& p, const std::vector<double>& candidates, const CvOptions& opts = {});
// Mean held-out log density per candidate; -inf marks a failed candidate.
std::vector<double> bandwidth_cv_scores(const PairedSample& p, const std::vector<double>& candidates,
                                        const CvOptions& opts = {});
std::vector<double> log_spaced(double lo, double hi, std::size_t count);

enum class LgcScale { raw, z };

struct GridSpec {
    std::size_t nx = 15;
    std::size_t ny = 15;
    double q_low = 0.025;
    double q_high = 0.975;
    // Explicit axes override the quantile box when non-empty.
    std::vector<double> x_axis;
    std::vector<double> y_axis;
};

struct LgcMapPoint {
    std::pair<double, double> point{};
    bool converged = false;
    LgcFit fit;
    std::string failure;
};

struct LgcMap {
    LgcScale scale = LgcScale::z;
    LgcMode mode = LgcMode::full5;
    Bandwidths bandwidths;
    std::vector<double> x_axis;
    std::vector<double> y_axis;
    // Row-major: points[iy * nx + ix].
    std::vector<LgcMapPoint> points;

    std::size_t failed() const;
};

// Per-point fits; each row is swept left to right with the previous converged
// fit as warm start. Default bandwidths: plug-in on the Z-scale, plug-in times
// the marginal sd on the raw scale.
LgcMap lgc_map(const PairedSample& p, const GridSpec& grid, LgcScale scale, std::optional<Bandwidths> bw,
               LgcMode mode);
// Flat table x1,x2,rho,mu1,mu2,sigma1,sigma2,converged.
std::string lgc_map_csv(const LgcMap& m);

struct ClaytonCopula {
    double theta = 1.0;
};
struct GaussianCopula {
    double rho = 0.0;
};
using Copula = std::variant<ClaytonCopula, GaussianCopula>;

// Canonical local correlation on the Z-scale diagonal (d, d).
double copula_diagonal_rho(const Copula& c, double d);

enum class LgcFunctional { rho_squared, rho_abs, rho };
enum class LagAggregate { sum, max };

struct LgcTestSpec {
    // Boxes in Z-scale coordinates; when empty the quantile box is used.
    std::vector<Region> boxes;
    double q_low = 0.1;
    double q_high = 0.9;
    LgcFunctional h = LgcFunctional::rho_squared;
    std::size_t lag_first = 1;
    std::size_t lag_last = 1;
    LagAggregate aggregate = LagAggregate::sum;
    Scheme resampling = Scheme::permutation;
    std::size_t block_length = 0;  // 0 selects ceil(n^(1/3))
    LgcMode mode = LgcMode::simplified2;
    std::optional<Bandwidths> bandwidths;  // default: plug-in
};

// Observed test functional n^-1 sum_{i: Z_i in S} h(theta(Z_i)) on the Z-scale.
double lgc_functional(const PairedSample& p, const LgcTestSpec& spec);
double lgc_functional(const SeriesSample& s, const LgcTestSpec& spec);

TestReport lgc_test(const PairedSample& p, const LgcTestSpec& spec, const ResampleConfig& cfg);
TestReport lgc_test(const SeriesSample& s, const LgcTestSpec& spec, const ResampleConfig& cfg);

}  // namespace nldep
