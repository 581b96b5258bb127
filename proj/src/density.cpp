#include "nldep/density.hpp"

#include <cmath>
#include <numbers>

#include "nldep/error.hpp"
#include "util.hpp"

namespace nldep {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void check_spec(const KdeSpec& spec, std::size_t dim) {
    if (spec.bandwidths.size() != dim) throw ShapeError("kde: bandwidth count differs from dimension");
    for (double b : spec.bandwidths)
        if (!(b > 0.0) || !std::isfinite(b)) throw BandwidthError("kde: bandwidths must be positive");
}

void check_kind(const DivergenceKind& k) {
    if (k.kind == DivergenceKindTag::gamma && !(k.gamma > 0.0 && k.gamma < 1.0))
        throw GammaRangeError("divergence: gamma must lie in (0, 1)");
}

double integrand(const DivergenceKind& k, double fxy, double fx, double fy) {
    const double w = fx * fy / fxy;
    switch (k.kind) {
        case DivergenceKindTag::hellinger: return 2.0 * (1.0 - std::sqrt(w));
        case DivergenceKindTag::kl: return std::log(fxy / (fx * fy));
        case DivergenceKindTag::gamma: return (1.0 - std::pow(w, k.gamma)) / (1.0 - k.gamma);
    }
    return 0.0;
}

const char* kind_name(DivergenceKindTag k) {
    switch (k) {
        case DivergenceKindTag::hellinger: return "hellinger";
        case DivergenceKindTag::kl: return "kl";
        case DivergenceKindTag::gamma: return "gamma";
    }
    return "unknown";
}

// Precomputed kernel matrices and trimming indicators for one sample.
struct DensityState {
    std::size_t n = 0;
    std::vector<double> kx, ky;  // n x n, kernel weights phi_b(.)/b
    std::vector<double> fx, fy;  // marginal KDE at each observation
    std::vector<char> wx, wy;    // trimming indicators
};

DensityState prepare(const PairedSample& p, const KdeSpec& spec, double trim_c) {
    check_spec(spec, 2);
    if (p.size() < 20) throw SampleTooSmallError("divergence: need n >= 20");
    if (!(trim_c > 0.0)) throw ParamError("divergence: trim constant must be positive");
    DensityState s;
    const std::size_t n = p.size();
    s.n = n;
    auto fill = [n](std::span<const double> v, double b, std::vector<double>& k, std::vector<double>& f) {
        k.assign(n * n, 0.0);
        f.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                const double u = (v[i] - v[j]) / b;
                const double e = kInvSqrt2Pi * std::exp(-0.5 * u * u) / b;
                k[i * n + j] = e;
                k[j * n + i] = e;
            }
        for (std::size_t i = 0; i < n; ++i) {
            double t = 0.0;
            for (std::size_t j = 0; j < n; ++j) t += k[i * n + j];
            f[i] = t / static_cast<double>(n);
        }
    };
    fill(p.x(), spec.bandwidths[0], s.kx, s.fx);
    fill(p.y(), spec.bandwidths[1], s.ky, s.fy);
    auto trim = [n, trim_c](std::span<const double> v, std::vector<char>& w) {
        const double m = mean(v), sd = population_sd(v);
        w.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i) w[i] = std::fabs(v[i] - m) <= trim_c * sd ? 1 : 0;
    };
    trim(p.x(), s.wx);
    trim(p.y(), s.wy);
    return s;
}

// Estimate for the pairing (x_i, y_perm[i]).
double evaluate(const DensityState& s, const DivergenceKind& kind, std::span<const std::size_t> perm) {
    const std::size_t n = s.n;
    double total = 0.0;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t pi = perm[i];
        if (!s.wx[i] || !s.wy[pi]) continue;
        const double* kxi = s.kx.data() + i * n;
        const double* kyi = s.ky.data() + pi * n;
        double fxy = 0.0;
        for (std::size_t k = 0; k < n; ++k) fxy += kxi[k] * kyi[perm[k]];
        fxy /= static_cast<double>(n);
        total += integrand(kind, fxy, s.fx[i], s.fy[pi]);
        ++kept;
    }
    if (kept == 0) throw RegionTooSmallError("divergence: every observation trimmed");
    return total / static_cast<double>(n);
}

}  // namespace

double kde(const VectorSample& points, const KdeSpec& spec, std::span<const double> at) {
    check_spec(spec, points.dim());
    if (at.size() != points.dim()) throw ShapeError("kde: evaluation point dimension mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto r = points.row(i);
        double prod = 1.0;
        for (std::size_t d = 0; d < r.size(); ++d) {
            const double u = (at[d] - r[d]) / spec.bandwidths[d];
            prod *= kInvSqrt2Pi * std::exp(-0.5 * u * u) / spec.bandwidths[d];
        }
        total += prod;
    }
    return total / static_cast<double>(points.size());
}

KdeSpec silverman_bandwidths(const VectorSample& points) {
    const std::size_t n = points.size(), d = points.dim();
    const double factor = std::pow(4.0 / (static_cast<double>(d + 2) * static_cast<double>(n)),
                                   1.0 / static_cast<double>(d + 4));
    KdeSpec spec;
    for (std::size_t j = 0; j < d; ++j) {
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = points.row(i)[j];
        const double sd = population_sd(col);
        if (!(sd > 0.0)) throw DegenerateSampleError("silverman_bandwidths: zero variance coordinate");
        spec.bandwidths.push_back(sd * factor);
    }
    return spec;
}

KdeSpec silverman_bandwidths(const PairedSample& p) {
    return silverman_bandwidths(VectorSample::from_columns(p.x(), p.y()));
}

double divergence_estimate(const PairedSample& p, const DivergenceKind& kind, const KdeSpec& spec, double trim_c) {
    check_kind(kind);
    const DensityState s = prepare(p, spec, trim_c);
    std::vector<std::size_t> id(p.size());
    for (std::size_t i = 0; i < id.size(); ++i) id[i] = i;
    return evaluate(s, kind, id);
}

TestReport density_test(const PairedSample& p, const DivergenceKind& kind, const KdeSpec& spec, double trim_c,
                        const ResampleConfig& cfg) {
    check_kind(kind);
    const DensityState s = prepare(p, spec, trim_c);
    ResampleConfig c = cfg;
    c.tail = Tail::right;
    TestReport r =
        permute_test_indexed([&](std::span<const std::size_t> perm) { return evaluate(s, kind, perm); }, p.size(), c);
    r.test = std::string("density-") + kind_name(kind.kind);
    r.settings = {{"kind", kind_name(kind.kind)},
                  {"b1", detail::num(spec.bandwidths[0])},
                  {"b2", detail::num(spec.bandwidths[1])},
                  {"trim_c", detail::num(trim_c)}};
    if (kind.kind == DivergenceKindTag::gamma) r.settings.emplace_back("gamma", detail::num(kind.gamma));
    return r;
}

}  // namespace nldep
