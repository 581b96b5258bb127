#include "nldep/classical.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "nldep/error.hpp"
#include "util.hpp"

namespace nldep {

namespace {

double pearson_raw(std::span<const double> x, std::span<const double> y) {
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw DegenerateSampleError("pearson: zero variance marginal");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Number of pairs sharing a value, sum over tie groups of t(t-1)/2.
std::int64_t tied_pairs(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::int64_t total = 0;
    std::size_t i = 0;
    while (i < v.size()) {
        std::size_t j = i + 1;
        while (j < v.size() && v[j] == v[i]) ++j;
        const auto t = static_cast<std::int64_t>(j - i);
        total += t * (t - 1) / 2;
        i = j;
    }
    return total;
}

// Merge sort counting strict inversions.
std::int64_t count_inversions(std::vector<double>& a, std::vector<double>& tmp, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::int64_t inv = count_inversions(a, tmp, lo, mid) + count_inversions(a, tmp, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (a[j] < a[i]) {
            inv += static_cast<std::int64_t>(mid - i);
            tmp[k++] = a[j++];
        } else {
            tmp[k++] = a[i++];
        }
    }
    while (i < mid) tmp[k++] = a[i++];
    while (j < hi) tmp[k++] = a[j++];
    std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo), tmp.begin() + static_cast<std::ptrdiff_t>(hi),
              a.begin() + static_cast<std::ptrdiff_t>(lo));
    return inv;
}

}  // namespace

double pearson(const PairedSample& p) { return pearson_raw(p.x(), p.y()); }

double spearman(const PairedSample& p) {
    const auto rx = ranks(p.x());
    const auto ry = ranks(p.y());
    return pearson_raw(rx.scores, ry.scores);
}

double kendall(const PairedSample& p) {
    // Knight's algorithm: sort by (x, y); discordant pairs are the strict
    // inversions of the y sequence. C - D = n0 - n1 - n2 + n3 - 2D.
    const std::size_t n = p.size();
    const auto x = p.x();
    const auto y = p.y();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
    });
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];

    std::int64_t n3 = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && x[order[j]] == x[order[i]] && ys[j] == ys[i]) ++j;
        const auto t = static_cast<std::int64_t>(j - i);
        n3 += t * (t - 1) / 2;
        i = j;
    }
    const std::int64_t n1 = tied_pairs(std::vector<double>(x.begin(), x.end()));
    const std::int64_t n2 = tied_pairs(std::vector<double>(y.begin(), y.end()));
    std::vector<double> tmp(n);
    const std::int64_t discordant = count_inversions(ys, tmp, 0, n);
    const auto n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
    const std::int64_t s = n0 - n1 - n2 + n3 - 2 * discordant;
    return static_cast<double>(s) / static_cast<double>(n0);
}

double van_der_waerden(const PairedSample& p) {
    const auto zx = normal_scores(p.x());
    const auto zy = normal_scores(p.y());
    return pearson_raw(zx.scores, zy.scores);
}

double conditional_correlation(const PairedSample& p, const Region& r) {
    if (!(r.x_low < r.x_high) || !(r.y_low < r.y_high)) throw ParamError("Region: low must be below high");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (r.contains(p.x()[i], p.y()[i])) {
            xs.push_back(p.x()[i]);
            ys.push_back(p.y()[i]);
        }
    }
    if (xs.size() < 3) throw RegionTooSmallError("conditional_correlation: fewer than 3 pairs in region");
    return pearson_raw(xs, ys);
}

double acf(const SeriesSample& s, std::size_t k, bool squared) {
    if (!squared) return pearson(lag_pairs(s, k));
    std::vector<double> sq(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) sq[i] = s.values()[i] * s.values()[i];
    return pearson(lag_pairs(SeriesSample(std::move(sq)), k));
}

QuadrantMap quadrant_map(const PairedSample& p, const std::vector<std::pair<double, double>>& grid) {
    if (grid.empty()) throw ParamError("quadrant_map: empty grid");
    QuadrantMap out;
    out.points = grid;
    out.values.reserve(grid.size());
    const double n = static_cast<double>(p.size());
    for (const auto& [gx, gy] : grid) {
        std::size_t cx = 0, cy = 0, cxy = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const bool bx = p.x()[i] <= gx, by = p.y()[i] <= gy;
            cx += bx;
            cy += by;
            cxy += bx && by;
        }
        out.values.push_back(static_cast<double>(cxy) / n - (static_cast<double>(cx) / n) * (static_cast<double>(cy) / n));
    }
    return out;
}

double hoeffding_covariance_identity_check(const PairedSample& p) {
    const std::size_t n = p.size();
    const auto x = p.x();
    const auto y = p.y();
    const double mx = mean(x), my = mean(y);
    double cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) cov += (x[i] - mx) * (y[i] - my);
    cov /= static_cast<double>(n);

    // H = F_XY - F_X F_Y is constant on the cells of the grid spanned by the
    // distinct sorted values and vanishes outside the data range.
    std::vector<double> ux(x.begin(), x.end()), uy(y.begin(), y.end());
    std::sort(ux.begin(), ux.end());
    ux.erase(std::unique(ux.begin(), ux.end()), ux.end());
    std::sort(uy.begin(), uy.end());
    uy.erase(std::unique(uy.begin(), uy.end()), uy.end());
    const std::size_t a = ux.size(), b = uy.size();
    std::vector<double> cnt(a * b, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ix = static_cast<std::size_t>(std::lower_bound(ux.begin(), ux.end(), x[i]) - ux.begin());
        const auto iy = static_cast<std::size_t>(std::lower_bound(uy.begin(), uy.end(), y[i]) - uy.begin());
        cnt[ix * b + iy] += 1.0;
    }
    for (std::size_t i = 0; i < a; ++i)
        for (std::size_t j = 0; j < b; ++j) {
            if (i > 0) cnt[i * b + j] += cnt[(i - 1) * b + j];
            if (j > 0) cnt[i * b + j] += cnt[i * b + j - 1];
            if (i > 0 && j > 0) cnt[i * b + j] -= cnt[(i - 1) * b + j - 1];
        }
    const double nn = static_cast<double>(n);
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < a; ++i) {
        const double fx = cnt[i * b + (b - 1)] / nn;
        for (std::size_t j = 0; j + 1 < b; ++j) {
            const double fy = cnt[(a - 1) * b + j] / nn;
            const double h = cnt[i * b + j] / nn - fx * fy;
            integral += h * (ux[i + 1] - ux[i]) * (uy[j + 1] - uy[j]);
        }
    }
    return std::fabs(cov - integral);
}

const char* correlation_name(CorrelationKind k) {
    switch (k) {
        case CorrelationKind::pearson: return "pearson";
        case CorrelationKind::spearman: return "spearman";
        case CorrelationKind::kendall: return "kendall";
        case CorrelationKind::van_der_waerden: return "van_der_waerden";
    }
    return "unknown";
}

double correlation(const PairedSample& p, CorrelationKind k) {
    switch (k) {
        case CorrelationKind::pearson: return pearson(p);
        case CorrelationKind::spearman: return spearman(p);
        case CorrelationKind::kendall: return kendall(p);
        case CorrelationKind::van_der_waerden: return van_der_waerden(p);
    }
    return 0.0;
}

TestReport correlation_test(const PairedSample& p, CorrelationKind k, const ResampleConfig& cfg) {
    ResampleConfig c = cfg;
    c.tail = Tail::right;
    TestReport r;
    if (k == CorrelationKind::kendall) {
        r = permute_test([](const PairedSample& q) { return std::fabs(kendall(q)); }, p, c);
    } else {
        // Pearson on the transformed coordinates; permuting y commutes with the transform.
        std::vector<double> a(p.x().begin(), p.x().end()), b(p.y().begin(), p.y().end());
        if (k == CorrelationKind::spearman) {
            a = ranks(p.x()).scores;
            b = ranks(p.y()).scores;
        } else if (k == CorrelationKind::van_der_waerden) {
            a = normal_scores(p.x()).scores;
            b = normal_scores(p.y()).scores;
        }
        (void)pearson_raw(a, b);  // degenerate samples fail before resampling
        r = permute_test_indexed(
            [&](std::span<const std::size_t> perm) {
                std::vector<double> bq(perm.size());
                for (std::size_t i = 0; i < perm.size(); ++i) bq[i] = b[perm[i]];
                return std::fabs(pearson_raw(a, bq));
            },
            p.size(), c);
    }
    r.test = correlation_name(k);
    r.settings = {{"sides", "two"}, {"signed_statistic", detail::num(correlation(p, k))}};
    return r;
}

TestReport acf_test(const SeriesSample& s, std::size_t k, bool squared, const ResampleConfig& cfg) {
    const double observed = acf(s, k, squared);
    ResampleConfig c = cfg;
    c.tail = Tail::right;
    TestReport r = series_permute_test([&](const SeriesSample& q) { return std::fabs(acf(q, k, squared)); }, s, c);
    r.test = squared ? "acf-squared" : "acf";
    r.settings = {{"lag", std::to_string(k)}, {"sides", "two"}, {"signed_statistic", detail::num(observed)}};
    return r;
}

}  // namespace nldep
