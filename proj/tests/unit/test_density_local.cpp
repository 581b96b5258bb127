#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nldep/classical.hpp"
#include "nldep/datagen.hpp"
#include "nldep/density.hpp"
#include "nldep/error.hpp"
#include "nldep/local_measures.hpp"
#include "oracles.hpp"

using namespace nldep;

namespace {

std::vector<double> vec(std::span<const double> s) { return {s.begin(), s.end()}; }

// Direct trimmed plug-in estimate with the same KDEs.
double divergence_oracle(const PairedSample& p, double b1, double b2, double c,
                         const std::function<double(double, double, double)>& integrand) {
    const auto x = vec(p.x()), y = vec(p.y());
    const std::size_t n = x.size();
    const double mx = oracle::mean(x), my = oracle::mean(y);
    double vx = 0, vy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        vx += (x[i] - mx) * (x[i] - mx) / n;
        vy += (y[i] - my) * (y[i] - my) / n;
    }
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::fabs(x[i] - mx) > c * std::sqrt(vx) || std::fabs(y[i] - my) > c * std::sqrt(vy)) continue;
        double fxy = 0, fx = 0, fy = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const double a = oracle::norm_pdf((x[i] - x[k]) / b1) / b1;
            const double b = oracle::norm_pdf((y[i] - y[k]) / b2) / b2;
            fxy += a * b / n;
            fx += a / n;
            fy += b / n;
        }
        total += integrand(fxy, fx, fy);
    }
    return total / n;
}

PairedSample parabola(std::size_t n, std::uint64_t seed) { return generate_paired({ParabolaFamily{1.0}, n, seed}); }

}  // namespace

TEST(Kde, Examples) {
    // Samples hold at least two points; a doubled point has the same estimate.
    const VectorSample origin(2, 2, {0.0, 0.0, 0.0, 0.0});
    const std::vector<double> at0{0.0, 0.0};
    EXPECT_NEAR(kde(origin, {{1.0, 1.0}}, at0), 1.0 / (2 * M_PI), 1e-16);
    const auto pm = VectorSample::from_column(std::vector<double>{-1.0, 1.0});
    EXPECT_NEAR(kde(pm, {{1.0}}, std::vector<double>{0.0}), oracle::norm_pdf(1.0), 1e-16);
    Rng r(1);
    std::vector<double> d(40), shifted(40);
    for (std::size_t i = 0; i < 40; ++i) {
        d[i] = r.normal();
        shifted[i] = d[i] + (i % 2 ? 3.0 : -1.5);
    }
    const VectorSample s(20, 2, d), t(20, 2, shifted);
    EXPECT_NEAR(kde(s, {{0.4, 0.7}}, std::vector<double>{0.2, -0.1}),
                kde(t, {{0.4, 0.7}}, std::vector<double>{0.2 - 1.5, -0.1 + 3.0}), 1e-15);
    EXPECT_THROW(kde(s, {{0.4}}, std::vector<double>{0.0, 0.0}), ShapeError);
    EXPECT_THROW(kde(s, {{0.4, -1.0}}, std::vector<double>{0.0, 0.0}), BandwidthError);
}

TEST(Kde, SilvermanRule) {
    const auto p = generate_paired({GaussianFamily{0.2}, 64, 2});
    const auto b = silverman_bandwidths(p).bandwidths;
    EXPECT_NEAR(b[0], population_sd(p.x()) / 2.0, 1e-15);
    EXPECT_NEAR(b[1], population_sd(p.y()) / 2.0, 1e-15);
}

TEST(Divergence, MatchesDirectEvaluation) {
    const auto p = generate_paired({StudentTFamily{4.0, 0.4}, 80, 3});
    const double b1 = 0.5, b2 = 0.7;
    const KdeSpec spec{{b1, b2}};
    EXPECT_NEAR(divergence_estimate(p, {DivergenceKindTag::kl}, spec, 2.0),
                divergence_oracle(p, b1, b2, 2.0, [](double f, double a, double b) { return std::log(f / (a * b)); }),
                1e-12);
    EXPECT_NEAR(divergence_estimate(p, {DivergenceKindTag::hellinger}, spec),
                divergence_oracle(p, b1, b2, 3.0,
                                  [](double f, double a, double b) { return 2 * (1 - std::sqrt(a * b / f)); }),
                1e-12);
    EXPECT_NEAR(divergence_estimate(p, {DivergenceKindTag::gamma, 0.3}, spec),
                divergence_oracle(p, b1, b2, 3.0,
                                  [](double f, double a, double b) { return (1 - std::pow(a * b / f, 0.3)) / 0.7; }),
                1e-12);
}

TEST(Divergence, GammaHalfIsHellinger) {
    const auto p = generate_paired({GaussianFamily{0.6}, 120, 4});
    const auto spec = silverman_bandwidths(p);
    EXPECT_NEAR(divergence_estimate(p, {DivergenceKindTag::gamma, 0.5}, spec),
                divergence_estimate(p, {DivergenceKindTag::hellinger}, spec), 1e-12);
    EXPECT_TRUE(std::isfinite(divergence_estimate(generate_paired({GaussianFamily{0.0}, 120, 5}),
                                                  {DivergenceKindTag::hellinger}, spec)));
    EXPECT_THROW(divergence_estimate(p, {DivergenceKindTag::gamma, 1.5}, spec), GammaRangeError);
}

TEST(Divergence, KlInvariantUnderAffineMaps) {
    const auto p = generate_paired({GaussianFamily{0.5}, 100, 6});
    const KdeSpec spec{{0.4, 0.5}};
    const double base = divergence_estimate(p, {DivergenceKindTag::kl}, spec);
    Rng r(7);
    for (int t = 0; t < 5; ++t) {
        const double a = r.normal(), c = r.normal();
        const double s = 0.1 + 5 * r.uniform(), u = -(0.1 + 5 * r.uniform());
        std::vector<double> x, y;
        for (double v : p.x()) x.push_back(a + s * v);
        for (double v : p.y()) y.push_back(c + u * v);
        EXPECT_NEAR(divergence_estimate({x, y}, {DivergenceKindTag::kl}, {{0.4 * s, 0.5 * -u}}), base, 1e-9);
    }
}

TEST(Divergence, HellingerDetectsComonotone) {
    int reject = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto g = generate_paired({GaussianFamily{0.0}, 500, seed});
        std::vector<double> y;
        for (double v : g.x()) y.push_back(v * v * v);
        const PairedSample p(vec(g.x()), y);
        reject += density_test(p, {DivergenceKindTag::hellinger}, silverman_bandwidths(p), kDefaultTrim, {99, seed})
                      .p_value <= 0.05;
    }
    EXPECT_GE(reject, 10);
}

TEST(Divergence, KlDetectsGarchLagDependence) {
    int reject = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto p = lag_pairs(generate_series({GarchFamily{}, 501, seed}), 1);
        reject +=
            density_test(p, {DivergenceKindTag::kl}, silverman_bandwidths(p), kDefaultTrim, {99, seed}).p_value <=
            0.05;
    }
    EXPECT_GE(reject, 14);
}

// ---------------------------------------------------------------------------
// Correlation curve

TEST(CorrelationCurve, LinearIsConstantPearson) {
    const auto g = generate_paired({GaussianFamily{0.0}, 2000, 8});
    std::vector<double> y;
    for (std::size_t i = 0; i < g.size(); ++i) y.push_back(2 * g.x()[i] + g.y()[i]);
    const PairedSample p(vec(g.x()), y);
    const auto c = correlation_curve(p, {-1.0, -0.5, 0.0, 0.5, 1.0}, 0.4);
    for (double v : c.values) EXPECT_NEAR(v, pearson(p), 0.1);
}

TEST(CorrelationCurve, ParabolaShape) {
    const auto p = parabola(2000, 9);
    const auto c = correlation_curve(p, {-1.0, 0.0, 1.0}, 0.3);
    EXPECT_LT(c.values[0], 0.0);
    EXPECT_LT(std::fabs(c.values[1]), 0.1);
    EXPECT_GT(c.values[2], 0.0);
    for (double v : correlation_curve(p, {-2.0, -1.5, -0.2, 0.7, 1.8}, 0.3).values) {
        EXPECT_GE(v, -1.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(CorrelationCurve, NotSymmetric) {
    const auto p = parabola(500, 10);
    const auto a = correlation_curve(p, {0.5, 1.0}, 0.4);
    const auto b = correlation_curve(p.swapped(), {0.5, 1.0}, 0.4);
    EXPECT_GT(std::fabs(a.values[0] - b.values[0]) + std::fabs(a.values[1] - b.values[1]), 0.05);
    EXPECT_THROW(correlation_curve(p, {0.0}, 0.0), BandwidthError);
    EXPECT_THROW(correlation_curve(p, {100.0}, 0.1), SupportError);
}

// ---------------------------------------------------------------------------
// Local dependence function

TEST(Ldf, GaussianSmoothedLimit) {
    // E f_hat is the Gaussian density with covariance Sigma + b^2 I, whose
    // local dependence is rho / ((1 + b^2)^2 - rho^2).
    const double b = 0.55;
    const auto p = generate_paired({GaussianFamily{0.5}, 5000, 11});
    const auto g = local_dependence_function(p, {{0.0, 0.0}}, {{b, b}});
    EXPECT_NEAR(g.gamma[0], 0.5 / ((1 + b * b) * (1 + b * b) - 0.25), 0.1);
}

TEST(Ldf, GaussianRecoversPopulationValueAtLargeN) {
    // The population value rho / (1 - rho^2) needs a small bandwidth; the
    // variance of the mixed partial at b = 0.15 only settles for millions of points.
    const auto p = generate_paired({GaussianFamily{0.5}, 4000000, 12});
    const auto g = local_dependence_function(p, {{0.0, 0.0}}, {{0.15, 0.15}});
    EXPECT_NEAR(g.gamma[0], 0.5 / 0.75, 0.15);
}

TEST(Ldf, GaussianMeanOverSamplesAtN5000) {
    double sum = 0;
    const int seeds = 40;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        const auto p = generate_paired({GaussianFamily{0.5}, 5000, 100 + seed});
        sum += local_dependence_function(p, {{0.0, 0.0}}, silverman_bandwidths(p)).gamma[0];
    }
    EXPECT_NEAR(sum / seeds, 0.5 / 0.75, 0.15);
}

TEST(Ldf, IndependentIsFlat) {
    const auto p = generate_paired({GaussianFamily{0.0}, 5000, 13});
    const auto g = local_dependence_function(p, {{0.0, 0.0}, {0.5, -0.5}, {-0.5, 0.3}}, {{0.55, 0.55}});
    for (double v : g.gamma) EXPECT_LT(std::fabs(v), 0.15);
}

TEST(Ldf, ParabolaSignFollowsX) {
    const auto p = parabola(5000, 14);
    std::vector<std::pair<double, double>> grid;
    for (double x : {-1.0, -0.5, 0.5, 1.0})
        for (double dy : {-0.5, 0.0, 0.5}) grid.emplace_back(x, x * x + dy + 0.5);
    const auto g = local_dependence_function(p, grid, silverman_bandwidths(p));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        ASSERT_TRUE(g.ok[i]);
        EXPECT_EQ(g.gamma[i] > 0, grid[i].first > 0) << grid[i].first << "," << grid[i].second;
    }
}

TEST(Ldf, AnalyticMatchesFiniteDifferences) {
    const auto p = generate_paired({StudentTFamily{4.0, 0.3}, 300, 15});
    const auto v = VectorSample::from_columns(p.x(), p.y());
    const KdeSpec spec{{0.45, 0.6}};
    const double h = 1e-4;
    auto lnf = [&](double a, double b) { return std::log(kde(v, spec, std::vector<double>{a, b})); };
    for (double x : {-0.8, 0.0, 0.6})
        for (double y : {-0.5, 0.2, 1.0}) {
            const double fd =
                (lnf(x + h, y + h) - lnf(x + h, y - h) - lnf(x - h, y + h) + lnf(x - h, y - h)) / (4 * h * h);
            const double an = local_dependence_function(p, {{x, y}}, spec).gamma[0];
            EXPECT_NEAR(an, fd, 1e-5 * std::max(1.0, std::fabs(fd)));
        }
}

TEST(Ldf, FloorMarksTailPoints) {
    const auto p = generate_paired({GaussianFamily{0.0}, 100, 16});
    const auto g = local_dependence_function(p, {{40.0, 40.0}}, {{0.3, 0.3}});
    EXPECT_FALSE(g.ok[0]);
    EXPECT_TRUE(std::isnan(g.gamma[0]));
}
