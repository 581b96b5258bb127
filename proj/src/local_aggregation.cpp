#include "nldep/local_aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "nldep/error.hpp"
#include "util.hpp"

namespace nldep {

// ---------------------------------------------------------------------------
// Correlation integral and BDS

namespace {

void check_embedding(const SeriesSample& s, const EmbeddingSpec& spec) {
    if (spec.k < 1) throw ParamError("embedding: k must be >= 1");
    if (!(spec.epsilon > 0.0)) throw ParamError("embedding: epsilon must be positive");
    if (s.size() <= spec.k) throw LagError("embedding: need n > k");
}

// Close-pair indicator for the values, row-major n x n.
std::vector<std::uint8_t> close_matrix(std::span<const double> v, double eps) {
    const std::size_t n = v.size();
    std::vector<std::uint8_t> m(n * n, 0);
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t t = 0; t < n; ++t) m[s * n + t] = std::fabs(v[s] - v[t]) < eps ? 1 : 0;
    return m;
}

// Integral for the series v[perm[.]] computed from the close matrix.
double integral_from(const std::vector<std::uint8_t>& close, std::size_t n, std::size_t k,
                     std::span<const std::size_t> perm) {
    std::uint64_t count = 0;
    for (std::size_t t = k - 1; t < n; ++t)
        for (std::size_t s = k - 1; s < t; ++s) {
            bool ok = true;
            for (std::size_t j = 0; j < k && ok; ++j) ok = close[perm[s - j] * n + perm[t - j]] != 0;
            count += ok;
        }
    const double nn = static_cast<double>(n);
    return 2.0 * static_cast<double>(count) / (nn * (nn - 1.0));
}

}  // namespace

double correlation_integral(const SeriesSample& s, const EmbeddingSpec& spec) {
    check_embedding(s, spec);
    const std::size_t n = s.size();
    const auto v = s.values();
    std::uint64_t count = 0;
    for (std::size_t t = spec.k - 1; t < n; ++t)
        for (std::size_t u = spec.k - 1; u < t; ++u) {
            bool ok = true;
            for (std::size_t j = 0; j < spec.k && ok; ++j) ok = std::fabs(v[t - j] - v[u - j]) < spec.epsilon;
            count += ok;
        }
    const double nn = static_cast<double>(n);
    return 2.0 * static_cast<double>(count) / (nn * (nn - 1.0));
}

double bds_statistic(const SeriesSample& s, const EmbeddingSpec& spec) {
    check_embedding(s, spec);
    if (s.size() <= spec.k + 1) throw LagError("bds: need n > k + 1");
    if (spec.k == 1) return 0.0;
    const double ck = correlation_integral(s, spec);
    const double c1 = correlation_integral(s, {1, spec.epsilon});
    return ck - std::pow(c1, static_cast<double>(spec.k));
}

TestReport bds_test(const SeriesSample& s, const EmbeddingSpec& spec, const ResampleConfig& cfg) {
    check_embedding(s, spec);
    if (s.size() <= spec.k + 1) throw LagError("bds: need n > k + 1");
    const std::size_t n = s.size();
    const auto close = close_matrix(s.values(), spec.epsilon);
    std::vector<std::size_t> id(n);
    std::iota(id.begin(), id.end(), std::size_t{0});
    // C_1 depends only on the multiset of values, so it is fixed under permutation.
    const double c1k = std::pow(integral_from(close, n, 1, id), static_cast<double>(spec.k));
    ResampleConfig c = cfg;
    c.tail = Tail::right;
    TestReport r = permute_test_indexed(
        [&](std::span<const std::size_t> perm) {
            return spec.k == 1 ? 0.0 : integral_from(close, n, spec.k, perm) - c1k;
        },
        n, c);
    r.test = "bds";
    r.settings = {{"k", std::to_string(spec.k)}, {"epsilon", detail::num(spec.epsilon)}};
    return r;
}

// ---------------------------------------------------------------------------
// HHG

namespace {

struct HhgState {
    std::size_t n = 0;
    // Per row i of the x distances: the other points sorted by distance and,
    // aligned with that order, the end of each point's tie group.
    std::vector<std::uint32_t> order;
    std::vector<std::uint32_t> group_end;
    // Per row r of the y distances: dense rank of each off-diagonal entry and
    // the cumulative count of off-diagonal entries with rank <= q.
    std::vector<std::uint32_t> yrank;
    std::vector<std::uint32_t> ycum;
};

HhgState prepare_hhg(const Matrix& dx, const Matrix& dy) {
    const std::size_t n = dx.rows;
    HhgState s;
    s.n = n;
    s.order.resize(n * (n - 1));
    s.group_end.resize(n * (n - 1));
    s.yrank.assign(n * n, 0);
    s.ycum.assign(n * n, 0);
    std::vector<std::uint32_t> idx;
    for (std::size_t i = 0; i < n; ++i) {
        idx.clear();
        for (std::size_t k = 0; k < n; ++k)
            if (k != i) idx.push_back(static_cast<std::uint32_t>(k));
        std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) { return dx(i, a) < dx(i, b); });
        std::uint32_t* ord = s.order.data() + i * (n - 1);
        std::uint32_t* ge = s.group_end.data() + i * (n - 1);
        std::copy(idx.begin(), idx.end(), ord);
        std::size_t g = 0;
        while (g < n - 1) {
            std::size_t h = g + 1;
            while (h < n - 1 && dx(i, ord[h]) == dx(i, ord[g])) ++h;
            for (std::size_t q = g; q < h; ++q) ge[q] = static_cast<std::uint32_t>(h);
            g = h;
        }

        std::vector<double> vals;
        for (std::size_t k = 0; k < n; ++k)
            if (k != i) vals.push_back(dy(i, k));
        std::sort(vals.begin(), vals.end());
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i) continue;
            const auto lo = std::lower_bound(vals.begin(), vals.end(), dy(i, k));
            const auto hi = std::upper_bound(vals.begin(), vals.end(), dy(i, k));
            const auto q = static_cast<std::size_t>(lo - vals.begin());
            s.yrank[i * n + k] = static_cast<std::uint32_t>(q);
            s.ycum[i * n + q] = static_cast<std::uint32_t>(hi - vals.begin());
        }
    }
    return s;
}

double hhg_eval(const HhgState& s, std::span<const std::size_t> perm) {
    const std::size_t n = s.n;
    const double big_n = static_cast<double>(n - 2);
    std::vector<std::uint32_t> bit(n + 1);
    std::vector<std::uint32_t> joint(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t pi = perm[i];
        const std::uint32_t* ord = s.order.data() + i * (n - 1);
        const std::uint32_t* ge = s.group_end.data() + i * (n - 1);
        const std::uint32_t* yr = s.yrank.data() + pi * n;
        const std::uint32_t* yc = s.ycum.data() + pi * n;
        std::fill(bit.begin(), bit.end(), 0u);
        std::size_t g = 0;
        while (g < n - 1) {
            const std::size_t h = ge[g];
            for (std::size_t q = g; q < h; ++q)
                for (std::size_t b = yr[perm[ord[q]]] + 1; b <= n; b += b & (~b + 1)) ++bit[b];
            for (std::size_t q = g; q < h; ++q) {
                std::uint32_t c = 0;
                for (std::size_t b = yr[perm[ord[q]]] + 1; b > 0; b -= b & (~b + 1)) c += bit[b];
                joint[q] = c;
            }
            g = h;
        }
        for (std::size_t q = 0; q < n - 1; ++q) {
            const double r1 = static_cast<double>(ge[q]) - 1.0;
            const double c1 = static_cast<double>(yc[yr[perm[ord[q]]]]) - 1.0;
            const double a11 = static_cast<double>(joint[q]) - 1.0;
            const double r2 = big_n - r1, c2 = big_n - c1;
            if (r1 <= 0.0 || r2 <= 0.0 || c1 <= 0.0 || c2 <= 0.0) continue;
            const double a12 = r1 - a11, a21 = c1 - a11, a22 = big_n - r1 - c1 + a11;
            const double det = a11 * a22 - a12 * a21;
            total += big_n * det * det / (r1 * r2 * c1 * c2);
        }
    }
    return total;
}

Matrix rank_distance(std::span<const double> v) {
    const auto r = ranks(v);
    const std::size_t n = v.size();
    Matrix d(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d(i, j) = std::fabs(r.scores[i] - r.scores[j]);
    return d;
}

std::pair<Matrix, Matrix> hhg_distances(const PairedSample& p, HhgDistance d) {
    if (d == HhgDistance::rank) return {rank_distance(p.x()), rank_distance(p.y())};
    return {distance_matrix(VectorSample::from_column(p.x())), distance_matrix(VectorSample::from_column(p.y()))};
}

TestReport hhg_run(const Matrix& dx, const Matrix& dy, const ResampleConfig& cfg, const char* dist) {
    if (dx.rows < 4) throw SampleTooSmallError("hhg: need n >= 4");
    const HhgState s = prepare_hhg(dx, dy);
    ResampleConfig c = cfg;
    c.tail = Tail::right;
    TestReport r = permute_test_indexed([&](std::span<const std::size_t> perm) { return hhg_eval(s, perm); },
                                        dx.rows, c);
    r.test = "hhg";
    r.settings = {{"distance", dist}};
    return r;
}

}  // namespace

double hhg_statistic(const VectorSample& x, const VectorSample& y) {
    if (x.size() != y.size()) throw ShapeError("hhg: samples differ in size");
    if (x.size() < 4) throw SampleTooSmallError("hhg: need n >= 4");
    const HhgState s = prepare_hhg(distance_matrix(x), distance_matrix(y));
    std::vector<std::size_t> id(x.size());
    std::iota(id.begin(), id.end(), std::size_t{0});
    return hhg_eval(s, id);
}

double hhg_statistic(const PairedSample& p, HhgDistance d) {
    if (p.size() < 4) throw SampleTooSmallError("hhg: need n >= 4");
    const auto [dx, dy] = hhg_distances(p, d);
    const HhgState s = prepare_hhg(dx, dy);
    std::vector<std::size_t> id(p.size());
    std::iota(id.begin(), id.end(), std::size_t{0});
    return hhg_eval(s, id);
}

TestReport hhg_test(const PairedSample& p, HhgDistance d, const ResampleConfig& cfg) {
    if (p.size() < 4) throw SampleTooSmallError("hhg: need n >= 4");
    const auto [dx, dy] = hhg_distances(p, d);
    return hhg_run(dx, dy, cfg, d == HhgDistance::rank ? "rank" : "euclidean");
}

TestReport hhg_test(const VectorSample& x, const VectorSample& y, const ResampleConfig& cfg) {
    if (x.size() != y.size()) throw ShapeError("hhg: samples differ in size");
    if (x.size() < 4) throw SampleTooSmallError("hhg: need n >= 4");
    return hhg_run(distance_matrix(x), distance_matrix(y), cfg, "euclidean");
}

// ---------------------------------------------------------------------------
// CANOVA

namespace {

struct CanovaState {
    std::vector<std::size_t> order;  // indices sorted by rank of X
    std::vector<double> rank;        // ranks in that order
    std::size_t k = 0;
};

CanovaState prepare_canova(const PairedSample& p, std::size_t k) {
    if (k < 2) throw ParamError("canova: K must be >= 2");
    if (p.size() <= k) throw ParamError("canova: need n > K");
    const auto r = ranks(p.x());
    CanovaState s;
    s.k = k;
    s.order.resize(p.size());
    std::iota(s.order.begin(), s.order.end(), std::size_t{0});
    std::stable_sort(s.order.begin(), s.order.end(),
                     [&](std::size_t a, std::size_t b) { return r.scores[a] < r.scores[b]; });
    for (std::size_t i : s.order) s.rank.push_back(r.scores[i]);
    return s;
}

double canova_eval(const CanovaState& s, std::span<const double> y, std::span<const std::size_t> perm) {
    const std::size_t n = s.order.size();
    const double kk = static_cast<double>(s.k);
    double w = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        const double ya = y[perm[s.order[a]]];
        for (std::size_t b = a + 1; b < n && s.rank[b] - s.rank[a] < kk; ++b) {
            const double d = y[perm[s.order[b]]] - ya;
            w += d * d;
        }
    }
    return w;
}

}  // namespace

double canova_statistic(const PairedSample& p, std::size_t k) {
    const CanovaState s = prepare_canova(p, k);
    std::vector<std::size_t> id(p.size());
    std::iota(id.begin(), id.end(), std::size_t{0});
    return canova_eval(s, p.y(), id);
}

TestReport canova_test(const PairedSample& p, std::size_t k, const ResampleConfig& cfg) {
    const CanovaState s = prepare_canova(p, k);
    ResampleConfig c = cfg;
    c.tail = Tail::left;
    TestReport r = permute_test_indexed(
        [&](std::span<const std::size_t> perm) { return canova_eval(s, p.y(), perm); }, p.size(), c);
    r.test = "canova";
    r.settings = {{"K", std::to_string(k)}};
    return r;
}

}  // namespace nldep
