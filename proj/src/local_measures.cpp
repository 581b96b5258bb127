#include "nldep/local_measures.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "nldep/error.hpp"

namespace nldep {

namespace {
constexpr double kMinCurveMass = 2.0;
constexpr double kInv2Pi = 0.15915494309189533577;
}  // namespace

CurveEstimate correlation_curve(const PairedSample& p, const std::vector<double>& grid, double bandwidth) {
    if (!(bandwidth > 0.0)) throw BandwidthError("correlation_curve: bandwidth must be positive");
    const auto x = p.x();
    const auto y = p.y();
    const double sx = population_sd(x);
    if (!(sx > 0.0)) throw DegenerateSampleError("correlation_curve: X has zero variance");
    CurveEstimate out{grid, {}, bandwidth};
    out.values.reserve(grid.size());
    const std::size_t n = p.size();
    std::vector<double> w(n);
    for (double g : grid) {
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, t0 = 0.0, t1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x[i] - g;
            const double u = d / bandwidth;
            w[i] = std::exp(-0.5 * u * u);
            s0 += w[i];
            s1 += w[i] * d;
            s2 += w[i] * d * d;
            t0 += w[i] * y[i];
            t1 += w[i] * d * y[i];
        }
        const double det = s0 * s2 - s1 * s1;
        if (s0 <= kMinCurveMass || !(det > 0.0))
            throw SupportError("correlation_curve: no effective data mass near x = " + std::to_string(g));
        const double beta = (s0 * t1 - s1 * t0) / det;
        const double mu = t0 / s0;
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += w[i] * (y[i] - mu) * (y[i] - mu);
        var = std::max(var / s0, 1e-12);
        const double bs = beta * sx;
        out.values.push_back(bs / std::sqrt(bs * bs + var));
    }
    return out;
}

LdfGrid local_dependence_function(const PairedSample& p, const std::vector<std::pair<double, double>>& grid,
                                  const KdeSpec& spec) {
    if (spec.bandwidths.size() != 2) throw ShapeError("ldf: need two bandwidths");
    for (double b : spec.bandwidths)
        if (!(b > 0.0)) throw BandwidthError("ldf: bandwidths must be positive");
    const double b1 = spec.bandwidths[0], b2 = spec.bandwidths[1];
    const auto x = p.x();
    const auto y = p.y();
    const double nn = static_cast<double>(p.size());
    const double norm = kInv2Pi / (b1 * b2);
    LdfGrid out;
    out.points = grid;
    out.bandwidths = spec.bandwidths;
    for (const auto& [gx, gy] : grid) {
        double f = 0.0, fx = 0.0, fy = 0.0, fxy = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double u = (gx - x[i]) / b1, v = (gy - y[i]) / b2;
            const double g = norm * std::exp(-0.5 * (u * u + v * v));
            f += g;
            fx -= g * u / b1;
            fy -= g * v / b2;
            fxy += g * u * v / (b1 * b2);
        }
        f /= nn;
        fx /= nn;
        fy /= nn;
        fxy /= nn;
        if (f < kLdfDensityFloor) {
            out.gamma.push_back(std::numeric_limits<double>::quiet_NaN());
            out.ok.push_back(false);
            continue;
        }
        out.gamma.push_back(fxy / f - fx * fy / (f * f));
        out.ok.push_back(true);
    }
    return out;
}

}  // namespace nldep
