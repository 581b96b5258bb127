#include "nldep/datagen.hpp"

#include <cmath>
#include <numbers>
#include <tuple>
#include <vector>

#include "nldep/error.hpp"
#include "nldep/normal.hpp"
#include "nldep/rng.hpp"

namespace nldep {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const char* msg) {
    if (!ok) throw ParamError(msg);
}

std::pair<double, double> gaussian_pair(Rng& rng, double rho) {
    const double z1 = rng.normal(), z2 = rng.normal();
    return {z1, rho * z1 + std::sqrt(1.0 - rho * rho) * z2};
}

// Inverse of v -> dC/du at fixed u, evaluated at t.
double clayton_conditional_inverse(double u, double t, double theta) {
    if (theta == -1.0) return 1.0 - u;
    const double a = std::pow(u, -theta) * (std::pow(t, -theta / (1.0 + theta)) - 1.0) + 1.0;
    return std::pow(a, -1.0 / theta);
}

}  // namespace

std::string family_name(const Family& f) {
    return std::visit(overloaded{[](const GaussianFamily&) { return "gaussian"; },
                                 [](const StudentTFamily&) { return "t"; },
                                 [](const GarchFamily&) { return "garch"; },
                                 [](const ParabolaFamily&) { return "parabola"; },
                                 [](const CircleFamily&) { return "circle"; },
                                 [](const ClaytonFamily&) { return "clayton"; },
                                 [](const GaussianCopulaFamily&) { return "gaussian_copula"; }},
                      f);
}

bool is_series_family(const Family& f) { return std::holds_alternative<GarchFamily>(f); }

void validate(const GeneratorSpec& spec) {
    require(spec.n >= 2, "generate: need n >= 2");
    std::visit(overloaded{
                   [](const GaussianFamily& g) { require(std::fabs(g.rho) <= 1.0, "gaussian: need |rho| <= 1"); },
                   [](const StudentTFamily& t) {
                       require(t.nu > 0.0 && std::isfinite(t.nu), "t: need nu > 0");
                       require(std::fabs(t.rho) <= 1.0, "t: need |rho| <= 1");
                   },
                   [](const GarchFamily& g) {
                       require(g.alpha > 0.0 && std::isfinite(g.alpha), "garch: need alpha > 0");
                       require(g.beta >= 0.0 && g.gamma >= 0.0, "garch: need beta, gamma >= 0");
                       require(g.beta + g.gamma < 1.0, "garch: need beta + gamma < 1");
                   },
                   [](const ParabolaFamily& p) {
                       require(p.sigma_eps >= 0.0 && std::isfinite(p.sigma_eps), "parabola: need sigma_eps >= 0");
                   },
                   [](const CircleFamily& c) {
                       require(c.sigma_n >= 0.0 && std::isfinite(c.sigma_n), "circle: need sigma_n >= 0");
                   },
                   [](const ClaytonFamily& c) {
                       require(std::isfinite(c.theta) && c.theta >= -1.0 && c.theta != 0.0,
                               "clayton: need theta in [-1, inf) without 0");
                   },
                   [](const GaussianCopulaFamily& g) {
                       require(std::fabs(g.rho) <= 1.0, "gaussian_copula: need |rho| <= 1");
                   }},
               spec.family);
}

PairedSample generate_paired(const GeneratorSpec& spec) {
    validate(spec);
    if (is_series_family(spec.family)) throw ParamError("generate_paired: " + family_name(spec.family) + " is a series family");
    Rng rng(spec.seed);
    const std::size_t n = spec.n;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::visit(overloaded{[&](const GaussianFamily& g) { std::tie(x[i], y[i]) = gaussian_pair(rng, g.rho); },
                              [&](const StudentTFamily& t) {
                                  const auto [a, b] = gaussian_pair(rng, t.rho);
                                  const double s = std::sqrt(rng.chi_square(t.nu) / t.nu);
                                  x[i] = a / s;
                                  y[i] = b / s;
                              },
                              [](const GarchFamily&) {},
                              [&](const ParabolaFamily& p) {
                                  x[i] = rng.normal();
                                  y[i] = x[i] * x[i] + p.sigma_eps * rng.normal();
                              },
                              [&](const CircleFamily& c) {
                                  const double angle = 2.0 * std::numbers::pi * rng.uniform();
                                  const double r = 1.0 + c.sigma_n * rng.normal();
                                  x[i] = r * std::cos(angle);
                                  y[i] = r * std::sin(angle);
                              },
                              [&](const ClaytonFamily& c) {
                                  const double u = rng.uniform_open();
                                  x[i] = u;
                                  y[i] = clayton_conditional_inverse(u, rng.uniform_open(), c.theta);
                              },
                              [&](const GaussianCopulaFamily& g) {
                                  const auto [a, b] = gaussian_pair(rng, g.rho);
                                  x[i] = norm_cdf(a);
                                  y[i] = norm_cdf(b);
                              }},
                   spec.family);
    }
    return PairedSample(std::move(x), std::move(y));
}

SeriesSample generate_series(const GeneratorSpec& spec) {
    validate(spec);
    const auto* g = std::get_if<GarchFamily>(&spec.family);
    if (!g) throw ParamError("generate_series: " + family_name(spec.family) + " is a paired family");
    Rng rng(spec.seed);
    double h = g->alpha / (1.0 - g->beta - g->gamma);
    double prev = 0.0;
    std::vector<double> out(spec.n);
    for (std::size_t t = 0; t < kGarchBurnIn + spec.n; ++t) {
        if (t > 0) h = g->alpha + g->beta * h + g->gamma * prev * prev;
        prev = rng.normal() * std::sqrt(h);
        if (t >= kGarchBurnIn) out[t - kGarchBurnIn] = prev;
    }
    return SeriesSample(std::move(out));
}

std::variant<PairedSample, SeriesSample> generate(const GeneratorSpec& spec) {
    if (is_series_family(spec.family)) return generate_series(spec);
    return generate_paired(spec);
}

}  // namespace nldep
