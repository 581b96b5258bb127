#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "nldep/classical.hpp"
#include "nldep/datagen.hpp"
#include "nldep/error.hpp"
#include "nldep/resampling.hpp"
#include "oracles.hpp"

using namespace nldep;

namespace {

std::vector<double> vec(std::span<const double> s) { return {s.begin(), s.end()}; }

double ks_uniform(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    double d = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        d = std::max({d, std::fabs(v[i] - double(i) / v.size()), std::fabs(v[i] - double(i + 1) / v.size())});
    return d;
}

double kurtosis_excess(std::span<const double> v) {
    const double m = mean(v), s = population_sd(v);
    double k = 0;
    for (double a : v) k += std::pow((a - m) / s, 4) / v.size();
    return k - 3;
}

}  // namespace

TEST(PValue, AddOneConvention) {
    const std::vector<double> null{1, 2, 3, 4};
    EXPECT_DOUBLE_EQ(add_one_p_value(10, null, Tail::right), 1.0 / 5.0);
    EXPECT_DOUBLE_EQ(add_one_p_value(2, null, Tail::right), 4.0 / 5.0);
    EXPECT_DOUBLE_EQ(add_one_p_value(2, null, Tail::left), 3.0 / 5.0);
    EXPECT_DOUBLE_EQ(add_one_p_value(-1, null, Tail::left), 1.0 / 5.0);
}

TEST(PermuteTest, ComonotonePearsonIsMinimal) {
    std::vector<double> x(30);
    for (std::size_t i = 0; i < 30; ++i) x[i] = double(i);
    const auto r = permute_test([](const PairedSample& p) { return pearson(p); }, {x, x}, {199, 5});
    EXPECT_DOUBLE_EQ(r.p_value, 1.0 / 200.0);
    EXPECT_EQ(r.null_draws.size(), 199u);
    EXPECT_EQ(r.scheme, Scheme::permutation);
    EXPECT_THROW(permute_test([](const PairedSample& p) { return pearson(p); }, {x, x}, {98, 5}), ParamError);
}

TEST(PermuteTest, NullPValuesUniform) {
    std::vector<double> ps;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
        const auto p = generate_paired({GaussianFamily{0.0}, 40, seed});
        ps.push_back(correlation_test(p, CorrelationKind::pearson, {99, seed + 1000}).p_value);
    }
    EXPECT_LT(ks_uniform(ps), 0.1);
}

TEST(PermuteTest, DeterministicAcrossThreadCounts) {
    const auto p = generate_paired({GaussianFamily{0.2}, 60, 7});
    const auto a = correlation_test(p, CorrelationKind::kendall, {199, 3});
    set_max_threads(1);
    const auto b = correlation_test(p, CorrelationKind::kendall, {199, 3});
    set_max_threads(0);
    EXPECT_EQ(a.null_draws, b.null_draws);
    EXPECT_EQ(a.p_value, b.p_value);
    EXPECT_EQ(to_json(a, true), to_json(b, true));
    EXPECT_NE(a.null_draws, correlation_test(p, CorrelationKind::kendall, {199, 4}).null_draws);
}

TEST(RunResampling, ReplicateStreams) {
    // Replicate r sees Rng(seed, r + 1).
    const auto r = run_resampling(0.5, [](Rng& g, std::size_t) { return g.uniform(); }, {99, 42},
                                  Scheme::iid_bootstrap);
    for (std::size_t i = 0; i < 99; ++i) {
        Rng g(42, i + 1);
        EXPECT_EQ(r.null_draws[i], g.uniform());
    }
    EXPECT_EQ(r.seed, 42u);
}

TEST(BlockBootstrap, EdgeCases) {
    const SeriesSample s({1, 2, 3, 4, 5, 6, 7});
    BlockBootstrap full(s, 7, 20, 1);
    for (std::size_t r = 0; r < full.size(); ++r) {
        const auto idx = full.indices(r);
        for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(idx[i], (idx[0] + i) % 7);
    }
    BlockBootstrap iid(s, 1, 200, 2);
    std::vector<int> hits(7, 0);
    for (std::size_t r = 0; r < iid.size(); ++r) {
        const auto rep = iid[r];
        for (double v : rep.values()) {
            ASSERT_TRUE(v >= 1 && v <= 7 && v == std::floor(v));
            ++hits[static_cast<int>(v) - 1];
        }
    }
    for (int h : hits) EXPECT_NEAR(h, 200, 60);
    BlockBootstrap mid(s, 3, 5, 3);
    const auto orig = vec(s.values());
    for (std::size_t r = 0; r < mid.size(); ++r) {
        const auto rep = mid[r];
        for (double v : rep.values()) EXPECT_NE(std::find(orig.begin(), orig.end(), v), orig.end());
    }
    EXPECT_EQ(mid.indices(2), BlockBootstrap(s, 3, 5, 3).indices(2));
    EXPECT_THROW(BlockBootstrap(s, 0, 5, 1), ParamError);
    EXPECT_THROW(BlockBootstrap(s, 8, 5, 1), ParamError);
    EXPECT_EQ(default_block_length(1000), 10u);
    EXPECT_EQ(default_block_length(1001), 11u);
}

TEST(Report, JsonRoundFields) {
    const auto p = generate_paired({GaussianFamily{0.2}, 30, 1});
    const auto r = correlation_test(p, CorrelationKind::spearman, {99, 9});
    const std::string j = to_json(r);
    EXPECT_NE(j.find("\"test\""), std::string::npos);
    EXPECT_NE(j.find("\"p_value\""), std::string::npos);
    EXPECT_EQ(j.find("null_draws"), std::string::npos);
    EXPECT_NE(to_json(r, true).find("null_draws"), std::string::npos);
}

// ---------------------------------------------------------------------------
// Generators

TEST(Datagen, Reproducible) {
    for (const auto& name : {Family{GaussianFamily{0.3}}, Family{StudentTFamily{}}, Family{ParabolaFamily{}},
                             Family{CircleFamily{}}, Family{ClaytonFamily{2.0}}, Family{GaussianCopulaFamily{0.4}}}) {
        const auto a = generate_paired({name, 50, 3}), b = generate_paired({name, 50, 3});
        EXPECT_EQ(vec(a.x()), vec(b.x())) << family_name(name);
        EXPECT_EQ(vec(a.y()), vec(b.y()));
        EXPECT_NE(vec(a.x()), vec(generate_paired({name, 50, 4}).x()));
    }
    const auto g = generate_series({GarchFamily{}, 100, 1});
    EXPECT_EQ(vec(g.values()), vec(generate_series({GarchFamily{}, 100, 1}).values()));
    EXPECT_TRUE(std::holds_alternative<SeriesSample>(generate({GarchFamily{}, 10, 1})));
}

TEST(Datagen, ValidatesParameters) {
    EXPECT_THROW(generate_paired({GaussianFamily{1.5}, 10, 1}), ParamError);
    EXPECT_THROW(generate_paired({StudentTFamily{0.0, 0.0}, 10, 1}), ParamError);
    EXPECT_THROW(generate_series({GarchFamily{0.1, 0.8, 0.3}, 10, 1}), ParamError);
    EXPECT_THROW(generate_paired({ClaytonFamily{-1.5}, 10, 1}), ParamError);
    EXPECT_THROW(generate_paired({GaussianFamily{0.0}, 1, 1}), ParamError);
    EXPECT_THROW(generate_paired({GarchFamily{}, 10, 1}), ParamError);
}

TEST(Datagen, GaussianCorrelation) {
    int close = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed)
        close += std::fabs(pearson(generate_paired({GaussianFamily{-0.5}, 784, seed})) + 0.5) < 0.07;
    EXPECT_GE(close, 45);
}

TEST(Datagen, ClaytonKendallMatchesNumericIntegration) {
    for (double th : {0.5, 0.96, 2.0}) {
        // tau = 1 + 4 int_0^1 phi(t) / phi'(t) dt for the generator phi(t) = (t^-theta - 1) / theta.
        auto phi = [th](double t) { return (std::pow(t, -th) - 1) / th; };
        const double integral = oracle::simpson(
            [&](double t) { return t <= 0 ? 0.0 : phi(t) / oracle::deriv(phi, t, 1e-6 * t); }, 0.0, 1.0, 2000);
        const double tau = 1 + 4 * integral;
        EXPECT_NEAR(tau, th / (th + 2), 1e-6);
        const auto p = generate_paired({ClaytonFamily{th}, 5000, 11});
        EXPECT_NEAR(kendall(p), tau, 0.05) << "theta " << th;
        for (double u : p.x()) ASSERT_TRUE(u > 0 && u < 1);
    }
}

// The sample Pearson sd is about sqrt(15 / (3 n)) here.
TEST(Datagen, ParabolaIsUncorrelated) {
    int small = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed)
        small += std::fabs(pearson(generate_paired({ParabolaFamily{1.0}, 5000, seed}))) < 0.1;
    EXPECT_GE(small, 45);
}

TEST(Datagen, GarchLevelsUncorrelatedSquaresNot) {
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto s = generate_series({GarchFamily{}, 2000, seed});
        ok += std::fabs(acf(s, 1, false)) < 0.08 && acf(s, 1, true) > 0.0;
    }
    EXPECT_GE(ok, 27);
}

TEST(Datagen, StudentTHasHeavyTails) {
    int heavy = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
        heavy += kurtosis_excess(generate_paired({StudentTFamily{4.0, 0.0}, 5000, seed}).x()) > 0.5;
    EXPECT_GE(heavy, 18);
}

TEST(Datagen, CircleShape) {
    const auto p = generate_paired({CircleFamily{}, 2000, 5});
    double rr = 0;
    for (std::size_t i = 0; i < p.size(); ++i) rr += std::hypot(p.x()[i], p.y()[i]) / p.size();
    EXPECT_NEAR(rr, 1.0, 0.03);
    EXPECT_LT(std::fabs(pearson(p)), 0.1);
}

TEST(Datagen, GaussianCopulaMargins) {
    const auto p = generate_paired({GaussianCopulaFamily{0.6}, 4000, 6});
    EXPECT_NEAR(mean(p.x()), 0.5, 0.02);
    EXPECT_NEAR(population_sd(p.y()), std::sqrt(1.0 / 12), 0.01);
    EXPECT_NEAR(spearman(p), 6 / M_PI * std::asin(0.3), 0.04);
}
