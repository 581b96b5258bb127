#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nldep/classical.hpp"
#include "nldep/datagen.hpp"
#include "nldep/distance_covariance.hpp"
#include "nldep/error.hpp"
#include "nldep/hsic.hpp"
#include "oracles.hpp"

using namespace nldep;

namespace {

oracle::Mat rows(const VectorSample& v) {
    oracle::Mat m;
    for (std::size_t i = 0; i < v.size(); ++i) m.emplace_back(v.row(i).begin(), v.row(i).end());
    return m;
}

VectorSample random_sample(std::size_t n, std::size_t p, Rng& r) {
    std::vector<double> d(n * p);
    for (auto& a : d) a = r.normal();
    return {n, p, d};
}

// Rotation by angle t in the first two coordinates, then translation.
VectorSample rotate_shift(const VectorSample& v, double t, double shift) {
    std::vector<double> d(v.data().begin(), v.data().end());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double* r = d.data() + i * v.dim();
        const double a = r[0], b = r[1];
        r[0] = std::cos(t) * a - std::sin(t) * b + shift;
        r[1] = std::sin(t) * a + std::cos(t) * b - shift;
    }
    return {v.size(), v.dim(), d};
}

}  // namespace

TEST(DistanceMatrix, Examples) {
    const auto d = distance_matrix(VectorSample::from_column(std::vector<double>{0, 3, 4}));
    EXPECT_EQ(d(0, 1), 3.0);
    EXPECT_EQ(d(0, 2), 4.0);
    EXPECT_EQ(d(1, 2), 1.0);
    EXPECT_EQ(d(1, 1), 0.0);
    const auto e = distance_matrix(VectorSample(2, 2, {0, 0, 3, 4}));
    EXPECT_EQ(e(0, 1), 5.0);
    const auto f = distance_matrix(VectorSample::from_column(std::vector<double>{0, 4}), 0.5);
    EXPECT_EQ(f(0, 1), 2.0);
    EXPECT_THROW(distance_matrix(VectorSample::from_column(std::vector<double>{0, 4}), 2.0), AlphaError);
    EXPECT_EQ(euclidean_distance(std::vector<double>{1e300, 0}, std::vector<double>{-1e300, 0}), 2e300);
}

TEST(DoubleCenter, Examples) {
    Matrix c(3, 3, 2.5);
    for (double v : double_center(c).a.data) EXPECT_NEAR(v, 0.0, 1e-15);
    Matrix t(2, 2, 0.0);
    t(0, 1) = t(1, 0) = 3.0;
    const auto a = double_center(t).a;
    EXPECT_DOUBLE_EQ(a(0, 0), -1.5);
    EXPECT_DOUBLE_EQ(a(0, 1), 1.5);
    EXPECT_DOUBLE_EQ(a(1, 0), 1.5);
    EXPECT_DOUBLE_EQ(a(1, 1), -1.5);
    Rng r(1);
    const auto big = double_center(distance_matrix(random_sample(50, 2, r))).a;
    for (std::size_t i = 0; i < 50; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < 50; ++j) s += big(i, j);
        EXPECT_LT(std::fabs(s), 1e-10);
    }
}

TEST(Dcov, SelfCorrelationIsOne) {
    Rng r(2);
    const auto x = random_sample(40, 2, r);
    EXPECT_NEAR(*dcov_dcor(x, x).r2, 1.0, 1e-12);
}

TEST(Dcov, FourPointOracle) {
    const auto x = VectorSample::from_column(std::vector<double>{0, 1, 2, 3});
    const auto y = VectorSample::from_column(std::vector<double>{0, 1, 4, 9});
    const auto t = oracle::dcov_terms(rows(x), rows(y), 1.0);
    EXPECT_NEAR(dcov_dcor(x, y).v2_xy, t.s1 + t.s2 - 2 * t.s3, 1e-10);
}

TEST(Dcov, TwoPointTerms) {
    // a = b = [[0,1],[1,0]]: S1 = 2/4, S2 = (2/4)^2, S3 = 2/8.
    const auto x = VectorSample::from_column(std::vector<double>{0, 1});
    const auto t = dcov_terms(x, x, 1.0);
    EXPECT_DOUBLE_EQ(t.s1, 0.5);
    EXPECT_DOUBLE_EQ(t.s2, 0.25);
    EXPECT_DOUBLE_EQ(t.s3, 0.25);
    EXPECT_DOUBLE_EQ(dcov_dcor(x, x).v2_xy, 0.25);
    const auto o = oracle::dcov_terms(rows(x), rows(x), 1.0);
    EXPECT_DOUBLE_EQ(o.s3, 0.25);
}

TEST(Dcov, ConstantSampleGivesZero) {
    const auto x = VectorSample::from_column(std::vector<double>{2, 2, 2, 2});
    const auto y = VectorSample::from_column(std::vector<double>{1, 5, 2, 0});
    const auto t = dcov_terms(x, y);
    EXPECT_EQ(t.s1, 0.0);
    EXPECT_EQ(t.s2, 0.0);
    EXPECT_EQ(t.s3, 0.0);
    const auto d = dcov_dcor(x, y);
    EXPECT_EQ(d.v2_xy, 0.0);
    EXPECT_FALSE(d.r2.has_value());
    EXPECT_THROW(dcor(PairedSample({2, 2, 2, 2}, {1, 5, 2, 0})), DegenerateSampleError);
}

TEST(Dcov, CrossFormOracle) {
    Rng r(3);
    for (int inst = 0; inst < 100; ++inst) {
        const std::size_t n = 2 + r.uniform_index(59), p = 1 + r.uniform_index(3), q = 1 + r.uniform_index(3);
        const double alpha = inst % 4 == 0 ? 0.5 + r.uniform() : 1.0;
        const auto x = random_sample(n, p, r), y = random_sample(n, q, r);
        const auto t = oracle::dcov_terms(rows(x), rows(y), alpha);
        const auto lib = dcov_terms(x, y, alpha);
        const double v = dcov_dcor(x, y, alpha).v2_xy;
        EXPECT_NEAR(lib.s3, t.s3, 1e-10 * t.s3);
        EXPECT_NEAR(v, t.s1 + t.s2 - 2 * t.s3, 1e-10 * std::max(t.s1, 1e-300)) << "instance " << inst;
    }
}

TEST(Dcov, RangeAndInvariance) {
    Rng r(4);
    for (int inst = 0; inst < 20; ++inst) {
        const auto x = random_sample(30, 2, r);
        std::vector<double> yd(30 * 2);
        for (std::size_t i = 0; i < 30; ++i) {
            yd[2 * i] = x.row(i)[0] * x.row(i)[1] + 0.3 * r.normal();
            yd[2 * i + 1] = r.normal();
        }
        const VectorSample y(30, 2, yd);
        const auto base = dcov_dcor(x, y);
        EXPECT_GE(base.v2_xy, 0.0);
        EXPECT_GE(*base.r2, 0.0);
        EXPECT_LE(*base.r2, 1.0 + 1e-12);
        std::vector<double> sx(x.data().begin(), x.data().end());
        for (auto& a : sx) a = 4.0 * a + 1.0;
        const auto moved = dcov_dcor(rotate_shift(VectorSample(30, 2, sx), 0.7, 3.0), rotate_shift(y, -2.0, -1.0));
        EXPECT_NEAR(*moved.r2, *base.r2, 1e-10);
    }
}

TEST(Dcov, GaussianDominance) {
    for (double rho : {0.2, 0.5, 0.8}) {
        const auto p = generate_paired({GaussianFamily{rho}, 2000, 7});
        EXPECT_LE(dcor(p), std::fabs(pearson(p)) + 0.05) << "rho " << rho;
    }
}

TEST(Dcov, PopulationMonteCarlo) {
    const PairSampler indep = [](Rng& g) { return std::pair{g.normal(), g.normal()}; };
    const auto e = dcov_population_mc(indep, 1.0, 100000, 1);
    EXPECT_LT(std::fabs(e.v2_xy), 3 * e.se_v2_xy);
    const PairSampler same = [](Rng& g) {
        const double z = g.normal();
        return std::pair{z, z};
    };
    const auto s = dcov_population_mc(same, 1.0, 100000, 2);
    EXPECT_NEAR(s.v2_xy, s.v2_x, 4 * s.se_v2_xy);
    EXPECT_NEAR(s.r, 1.0, 0.02);
    EXPECT_THROW(dcov_population_mc(indep, 1.0, 10, 1), ParamError);
}

TEST(Dcov, PermutationTestCalibratedUnderIndependence) {
    int keep = 0;
    for (std::uint64_t seed = 0; seed < 30; ++seed)
        keep += dcov_test(generate_paired({GaussianFamily{0.0}, 500, seed}), 1.0, {99, seed}).p_value > 0.05;
    EXPECT_GE(keep, 25);
}

// ---------------------------------------------------------------------------
// HSIC

TEST(Gram, Examples) {
    const auto v = VectorSample::from_column(std::vector<double>{0.0, std::sqrt(2.0) * 1.5, 1.5});
    const auto g = gram_matrix(v, {KernelKind::gaussian, 1.5});
    EXPECT_EQ(g(1, 1), 1.0);
    EXPECT_NEAR(g(0, 1), std::exp(-1.0), 1e-15);
    const auto l = gram_matrix(v, {KernelKind::laplace, 1.5});
    EXPECT_NEAR(l(0, 2), std::exp(-1.0), 1e-15);
    EXPECT_THROW(gram_matrix(v, {KernelKind::laplace, 0.0}), KernelError);
}

TEST(Hsic, ConstantAndTwoPointAreZero) {
    const auto x = VectorSample::from_column(std::vector<double>{0.3, 1.2, -2.0, 0.5});
    const auto c = VectorSample::from_column(std::vector<double>{1, 1, 1, 1});
    EXPECT_EQ(hsic_statistic(x, c, {}, {}), 0.0);
    // For n = 2, H K H = (1-k)/2 [[1,-1],[-1,1]] with k the off-diagonal
    // kernel value, so tr(KHLH) = (1-k)(1-l): zero only when a sample is constant.
    const auto a = VectorSample::from_column(std::vector<double>{0.0, 1.0});
    const auto b = VectorSample::from_column(std::vector<double>{5.0, 3.0});
    const double k = std::exp(-0.5), l = std::exp(-2.0);
    EXPECT_NEAR(hsic_statistic(a, b, {}, {}), (1 - k) * (1 - l), 1e-15);
}

TEST(Hsic, TraceOracleAndThreeTermForm) {
    Rng r(5);
    for (int inst = 0; inst < 20; ++inst) {
        const std::size_t n = 3 + r.uniform_index(38);
        const auto x = random_sample(n, 2, r), y = random_sample(n, 1, r);
        const KernelSpec kx{KernelKind::gaussian, 0.5 + r.uniform()}, ky{KernelKind::laplace, 0.5 + r.uniform()};
        const auto gk = gram_matrix(x, kx), gl = gram_matrix(y, ky);
        oracle::Mat K(n, oracle::Vec(n)), L(n, oracle::Vec(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                K[i][j] = gk(i, j);
                L[i][j] = gl(i, j);
            }
        const double h = hsic_statistic(x, y, kx, ky);
        EXPECT_NEAR(h, oracle::hsic_trace(K, L), 1e-12);
        const double nn = static_cast<double>(n);
        // tr(KHLH) / n^2 is the three-term V-statistic.
        EXPECT_NEAR(hsic_three_term(x, y, kx, ky), h * (nn - 1) * (nn - 1) / (nn * nn), 1e-12);
        EXPECT_GE(h, -1e-12);
        EXPECT_EQ(h, hsic_statistic(y, x, ky, kx));
        EXPECT_NEAR(hsic_statistic(rotate_shift(x, 1.1, 2.0), y, kx, ky), h, 1e-10);
    }
}

TEST(Hsic, SelfDependenceDetected) {
    int reject = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto p = generate_paired({GaussianFamily{0.0}, 200, seed});
        const auto x = VectorSample::from_column(p.x());
        const KernelSpec k{KernelKind::gaussian, median_heuristic_sigma(x)};
        reject += hsic_test(x, x, k, k, {99, seed}).p_value <= 0.05;
    }
    EXPECT_EQ(reject, 20);
}

TEST(Hsic, ReplicatesValidated) {
    const auto x = VectorSample::from_column(std::vector<double>{0, 1, 2, 3});
    EXPECT_THROW(hsic_test(x, x, {}, {}, {0, 1}), ParamError);
}

TEST(MedianHeuristic, Examples) {
    EXPECT_EQ(median_heuristic_sigma(VectorSample::from_column(std::vector<double>{0, 1})), 1.0);
    EXPECT_EQ(median_heuristic_sigma(VectorSample::from_column(std::vector<double>{0, 1, 2})), 1.0);
    Rng r(6);
    const auto v = random_sample(30, 2, r);
    EXPECT_EQ(median_heuristic_sigma(v), median_heuristic_sigma(v));
}
