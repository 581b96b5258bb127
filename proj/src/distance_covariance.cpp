#include "nldep/distance_covariance.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "nldep/error.hpp"
#include "util.hpp"

namespace nldep {

VectorSample::VectorSample(std::size_t n, std::size_t p, std::vector<double> data)
    : n_(n), p_(p), data_(std::move(data)) {
    if (p_ == 0) throw ShapeError("VectorSample: dimension must be >= 1");
    if (data_.size() != n_ * p_) throw ShapeError("VectorSample: data size differs from n * p");
    if (n_ < 2) throw SampleTooSmallError("VectorSample: need at least 2 points");
    for (double v : data_)
        if (!std::isfinite(v)) throw InvalidArgumentError("VectorSample: non-finite coordinate");
}

VectorSample VectorSample::from_column(std::span<const double> v) {
    return VectorSample(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

VectorSample VectorSample::from_columns(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("VectorSample: columns differ in length");
    std::vector<double> d(2 * a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        d[2 * i] = a[i];
        d[2 * i + 1] = b[i];
    }
    return VectorSample(a.size(), 2, std::move(d));
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() == 1) return std::fabs(a[0] - b[0]);
    double scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) scale = std::max(scale, std::fabs(a[i] - b[i]));
    if (scale == 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = (a[i] - b[i]) / scale;
        s += t * t;
    }
    return scale * std::sqrt(s);
}

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw AlphaError("dcov: alpha must lie in (0, 2)");
}

}  // namespace

Matrix distance_matrix(const VectorSample& v, double alpha) {
    check_alpha(alpha);
    const std::size_t n = v.size();
    Matrix d(n, n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = k + 1; l < n; ++l) {
            double e = euclidean_distance(v.row(k), v.row(l));
            if (alpha != 1.0) e = std::pow(e, alpha);
            d(k, l) = e;
            d(l, k) = e;
        }
    return d;
}

CenteredDistanceMatrix double_center(const Matrix& d, double alpha) {
    if (d.rows != d.cols) throw ShapeError("double_center: matrix is not square");
    const std::size_t n = d.rows;
    std::vector<double> row_mean(n, 0.0), col_mean(n, 0.0);
    double grand = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
            row_mean[k] += d(k, l);
            col_mean[l] += d(k, l);
        }
    const double nn = static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        grand += row_mean[k];
        row_mean[k] /= nn;
        col_mean[k] /= nn;
    }
    grand /= nn * nn;
    CenteredDistanceMatrix out{Matrix(n, n), alpha};
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) out.a(k, l) = d(k, l) - row_mean[k] - col_mean[l] + grand;
    return out;
}

namespace {

double centered_product(const Matrix& a, const Matrix& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
    return s / static_cast<double>(a.rows * a.rows);
}

double clamp_v2(double v, double scale) {
    assert(v >= -1e-12 * std::max(1.0, scale));
    (void)scale;
    return std::max(v, 0.0);
}

}  // namespace

DcovResult dcov_dcor(const VectorSample& x, const VectorSample& y, double alpha) {
    if (x.size() != y.size()) throw ShapeError("dcov: samples differ in size");
    const auto a = double_center(distance_matrix(x, alpha), alpha);
    const auto b = double_center(distance_matrix(y, alpha), alpha);
    DcovResult r;
    r.v2_x = clamp_v2(centered_product(a.a, a.a), 1.0);
    r.v2_y = clamp_v2(centered_product(b.a, b.a), 1.0);
    r.v2_xy = clamp_v2(centered_product(a.a, b.a), std::sqrt(r.v2_x * r.v2_y));
    const double denom = std::sqrt(r.v2_x * r.v2_y);
    if (denom > 0.0) r.r2 = std::clamp(r.v2_xy / denom, 0.0, 1.0);
    return r;
}

DcovResult dcov_dcor(const PairedSample& p, double alpha) {
    return dcov_dcor(VectorSample::from_column(p.x()), VectorSample::from_column(p.y()), alpha);
}

double dcor(const PairedSample& p, double alpha) {
    const auto r = dcov_dcor(p, alpha);
    if (!r.r2) throw DegenerateSampleError("dcor: a marginal sample is constant");
    return std::sqrt(*r.r2);
}

DcovTerms dcov_terms(const VectorSample& x, const VectorSample& y, double alpha) {
    if (x.size() != y.size()) throw ShapeError("dcov: samples differ in size");
    const auto a = distance_matrix(x, alpha);
    const auto b = distance_matrix(y, alpha);
    const std::size_t n = x.size();
    const double nn = static_cast<double>(n);
    DcovTerms t;
    double sa = 0.0, sb = 0.0;
    std::vector<double> ra(n, 0.0), rb(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
            t.s1 += a(k, l) * b(k, l);
            ra[k] += a(k, l);
            rb[k] += b(k, l);
        }
    for (std::size_t k = 0; k < n; ++k) {
        sa += ra[k];
        sb += rb[k];
    }
    t.s1 /= nn * nn;
    t.s2 = (sa / (nn * nn)) * (sb / (nn * nn));
    // S3 = n^-3 sum_k sum_l sum_m a_kl b_km = n^-3 sum_k (n abar_k.)(n bbar_k.)
    //    = n^-1 sum_k abar_k. bbar_k.
    for (std::size_t k = 0; k < n; ++k) t.s3 += (ra[k] / nn) * (rb[k] / nn);
    t.s3 /= nn;
    return t;
}

namespace {

struct BlockTerms {
    double t1, t2, t3;
};

// Unbiased estimates of E a b, E a E b and E a_ij b_ik from one block.
BlockTerms block_terms(const std::vector<double>& u, const std::vector<double>& v, double alpha) {
    const std::size_t m = u.size();
    double sab = 0.0, sa = 0.0, sb = 0.0, srow = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double ra = 0.0, rb = 0.0, rab = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) continue;
            double a = std::fabs(u[i] - u[j]);
            double b = std::fabs(v[i] - v[j]);
            if (alpha != 1.0) {
                a = std::pow(a, alpha);
                b = std::pow(b, alpha);
            }
            ra += a;
            rb += b;
            rab += a * b;
        }
        sa += ra;
        sb += rb;
        sab += rab;
        srow += ra * rb;
    }
    const double mm = static_cast<double>(m);
    BlockTerms t;
    t.t1 = sab / (mm * (mm - 1.0));
    t.t3 = (srow - sab) / (mm * (mm - 1.0) * (mm - 2.0));
    t.t2 = (sa * sb - 4.0 * srow + 2.0 * sab) / (mm * (mm - 1.0) * (mm - 2.0) * (mm - 3.0));
    return t;
}

double v2_of(const BlockTerms& t) { return t.t1 + t.t2 - 2.0 * t.t3; }

}  // namespace

DcovPopulationEstimate dcov_population_mc(const PairSampler& sampler, double alpha, std::size_t draws,
                                          std::uint64_t seed, std::size_t block_size) {
    check_alpha(alpha);
    if (draws < 1000) throw ParamError("dcov_population_mc: draws must be >= 1000");
    if (block_size < 4) throw ParamError("dcov_population_mc: block size must be >= 4");
    const std::size_t m = std::min(block_size, draws);
    const std::size_t blocks = draws / m;
    Rng rng(seed);
    std::vector<double> u(m), v(m);
    double sxy = 0.0, sxy2 = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t i = 0; i < m; ++i) {
            const auto [x, y] = sampler(rng);
            u[i] = x;
            v[i] = y;
        }
        const double exy = v2_of(block_terms(u, v, alpha));
        sxy += exy;
        sxy2 += exy * exy;
        sx += v2_of(block_terms(u, u, alpha));
        sy += v2_of(block_terms(v, v, alpha));
    }
    const double nb = static_cast<double>(blocks);
    DcovPopulationEstimate e;
    e.blocks = blocks;
    e.v2_xy = sxy / nb;
    e.v2_x = sx / nb;
    e.v2_y = sy / nb;
    if (blocks > 1) {
        const double var = std::max(0.0, (sxy2 - nb * e.v2_xy * e.v2_xy) / (nb - 1.0));
        e.se_v2_xy = std::sqrt(var / nb);
    }
    const double denom = std::sqrt(e.v2_x * e.v2_y);
    e.r = denom > 0.0 ? std::sqrt(std::max(0.0, e.v2_xy) / denom) : 0.0;
    return e;
}

TestReport dcov_test(const VectorSample& x, const VectorSample& y, double alpha, const ResampleConfig& cfg) {
    if (x.size() != y.size()) throw ShapeError("dcov: samples differ in size");
    const std::size_t n = x.size();
    const auto a = double_center(distance_matrix(x, alpha), alpha);
    const auto b = double_center(distance_matrix(y, alpha), alpha);
    ResampleConfig c = cfg;
    c.tail = Tail::right;
    TestReport r = permute_test_indexed(
        [&](std::span<const std::size_t> perm) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double* ak = a.a.row(k);
                const double* bk = b.a.row(perm[k]);
                for (std::size_t l = 0; l < n; ++l) s += ak[l] * bk[perm[l]];
            }
            return s / static_cast<double>(n * n);
        },
        n, c);
    r.test = "dcov";
    r.settings = {{"alpha", detail::num(alpha)}};
    return r;
}

TestReport dcov_test(const PairedSample& p, double alpha, const ResampleConfig& cfg) {
    return dcov_test(VectorSample::from_column(p.x()), VectorSample::from_column(p.y()), alpha, cfg);
}

}  // namespace nldep
