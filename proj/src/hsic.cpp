#include "nldep/hsic.hpp"

#include <algorithm>
#include <cmath>

#include "nldep/error.hpp"
#include "util.hpp"

namespace nldep {

Matrix gram_matrix(const VectorSample& v, const KernelSpec& k) {
    if (!(k.sigma > 0.0) || !std::isfinite(k.sigma)) throw KernelError("kernel: sigma must be positive");
    const std::size_t n = v.size();
    Matrix g(n, n, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = euclidean_distance(v.row(i), v.row(j));
            const double e = k.kind == KernelKind::gaussian ? std::exp(-d * d / (2.0 * k.sigma * k.sigma))
                                                            : std::exp(-d / k.sigma);
            g(i, j) = e;
            g(j, i) = e;
        }
    return g;
}

namespace {

// H K H: subtract row and column means, add back the grand mean.
Matrix center_gram(const Matrix& k) {
    const std::size_t n = k.rows;
    const double nn = static_cast<double>(n);
    std::vector<double> rm(n, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) rm[i] += k(i, j);
        grand += rm[i];
        rm[i] /= nn;
    }
    grand /= nn * nn;
    Matrix c(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) c(i, j) = k(i, j) - rm[i] - rm[j] + grand;
    return c;
}

void check_shapes(const VectorSample& x, const VectorSample& y) {
    if (x.size() != y.size()) throw ShapeError("hsic: samples differ in size");
}

}  // namespace

double hsic_statistic(const VectorSample& x, const VectorSample& y, const KernelSpec& kx, const KernelSpec& ky) {
    check_shapes(x, y);
    // tr(K H L H) = sum_ij (H K H)_ij (H L H)_ij by idempotence of H. Centering
    // both sides makes a constant sample give exactly 0 and the statistic
    // exactly symmetric in its arguments.
    const Matrix kc = center_gram(gram_matrix(x, kx));
    const Matrix lc = center_gram(gram_matrix(y, ky));
    double s = 0.0;
    for (std::size_t i = 0; i < kc.data.size(); ++i) s += kc.data[i] * lc.data[i];
    const double m = static_cast<double>(x.size() - 1);
    return s / (m * m);
}

double hsic_three_term(const VectorSample& x, const VectorSample& y, const KernelSpec& kx, const KernelSpec& ky) {
    check_shapes(x, y);
    const Matrix k = gram_matrix(x, kx);
    const Matrix l = gram_matrix(y, ky);
    const std::size_t n = x.size();
    const double nn = static_cast<double>(n);
    double s1 = 0.0, sk = 0.0, sl = 0.0, s3 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double rk = 0.0, rl = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            s1 += k(i, j) * l(i, j);
            rk += k(i, j);
            rl += l(i, j);
        }
        sk += rk;
        sl += rl;
        s3 += rk * rl;
    }
    return s1 / (nn * nn) + sk * sl / (nn * nn * nn * nn) - 2.0 * s3 / (nn * nn * nn);
}

TestReport hsic_test(const VectorSample& x, const VectorSample& y, const KernelSpec& kx, const KernelSpec& ky,
                     const ResampleConfig& cfg) {
    check_shapes(x, y);
    const std::size_t n = x.size();
    const Matrix kc = center_gram(gram_matrix(x, kx));
    const Matrix l = center_gram(gram_matrix(y, ky));
    const double m2 = static_cast<double>(n - 1) * static_cast<double>(n - 1);
    ResampleConfig c = cfg;
    c.tail = Tail::right;
    TestReport r = permute_test_indexed(
        [&](std::span<const std::size_t> perm) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double* ki = kc.row(i);
                const double* li = l.row(perm[i]);
                for (std::size_t j = 0; j < n; ++j) s += ki[j] * li[perm[j]];
            }
            return s / m2;
        },
        n, c);
    r.test = "hsic";
    auto kname = [](KernelKind k) { return k == KernelKind::gaussian ? "gaussian" : "laplace"; };
    r.settings = {{"kernel_x", kname(kx.kind)},
                  {"sigma_x", detail::num(kx.sigma)},
                  {"kernel_y", kname(ky.kind)},
                  {"sigma_y", detail::num(ky.sigma)}};
    return r;
}

double median_heuristic_sigma(const VectorSample& v) {
    std::vector<double> d;
    const std::size_t n = v.size();
    d.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double e = euclidean_distance(v.row(i), v.row(j));
            if (e > 0.0) d.push_back(e);
        }
    if (d.empty()) throw DegenerateSampleError("median_heuristic_sigma: all points identical");
    const std::size_t mid = d.size() / 2;
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
    if (d.size() % 2 == 1) return d[mid];
    const double upper = d[mid];
    const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

}  // namespace nldep
