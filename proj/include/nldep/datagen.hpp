#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>

#include "nldep/samples.hpp"

namespace nldep {

// (Z1, rho Z1 + sqrt(1 - rho^2) Z2).
struct GaussianFamily {
    double rho = 0.0;
};
// Gaussian pair with correlation rho divided by sqrt(chi2_nu / nu).
struct StudentTFamily {
    double nu = 4.0;
    double rho = 0.0;
};
// X_t = eps_t sqrt(h_t), h_t = alpha + beta h_{t-1} + gamma X_{t-1}^2.
struct GarchFamily {
    double alpha = 0.1;
    double beta = 0.7;
    double gamma = 0.2;
};
// X ~ N(0,1), Y = X^2 + sigma_eps eps.
struct ParabolaFamily {
    double sigma_eps = 1.0;
};
// Uniform angle, radius 1 + sigma_n Z.
struct CircleFamily {
    double sigma_n = 0.3;
};
// Uniform margins with copula max(u^-theta + v^-theta - 1, 0)^(-1/theta).
struct ClaytonFamily {
    double theta = 1.0;
};
// (Phi(X), Phi(Y)) for a Gaussian pair with correlation rho.
struct GaussianCopulaFamily {
    double rho = 0.0;
};

using Family = std::variant<GaussianFamily, StudentTFamily, GarchFamily, ParabolaFamily, CircleFamily, ClaytonFamily,
                            GaussianCopulaFamily>;

struct GeneratorSpec {
    Family family;
    std::size_t n = 0;
    std::uint64_t seed = 0;
};

inline constexpr std::size_t kGarchBurnIn = 500;

std::string family_name(const Family& f);
bool is_series_family(const Family& f);

// Throws ParamError on domain violations.
void validate(const GeneratorSpec& spec);

std::variant<PairedSample, SeriesSample> generate(const GeneratorSpec& spec);
PairedSample generate_paired(const GeneratorSpec& spec);
SeriesSample generate_series(const GeneratorSpec& spec);

}  // namespace nldep
