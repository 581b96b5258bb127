#pragma once

// Slow, direct reference implementations used as test oracles. Each follows
// the defining formula literally and shares no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;

inline double mean(const Vec& v) {
    long double s = 0;
    for (double a : v) s += a;
    return static_cast<double>(s / v.size());
}

inline double pearson(const Vec& x, const Vec& y) {
    const double mx = mean(x), my = mean(y);
    long double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (long double)(x[i] - mx) * (y[i] - my);
        sxx += (long double)(x[i] - mx) * (x[i] - mx);
        syy += (long double)(y[i] - my) * (y[i] - my);
    }
    return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

// Average ranks by counting: rank_i = #{v_j < v_i} + (#{v_j == v_i} + 1) / 2.
inline Vec ranks(const Vec& v) {
    Vec r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double less = 0, eq = 0;
        for (double a : v) {
            if (a < v[i]) ++less;
            if (a == v[i]) ++eq;
        }
        r[i] = less + (eq + 1) / 2;
    }
    return r;
}

inline double kendall(const Vec& x, const Vec& y) {
    const std::size_t n = x.size();
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double a = (x[i] - x[j]) * (y[i] - y[j]);
            s += a > 0 ? 1 : (a < 0 ? -1 : 0);
        }
    return s / (0.5 * n * (n - 1));
}

inline double ecdf(const Vec& v, double t) {
    double c = 0;
    for (double a : v) c += a <= t;
    return c / v.size();
}

inline double ecdf2(const Vec& x, const Vec& y, double s, double t) {
    double c = 0;
    for (std::size_t i = 0; i < x.size(); ++i) c += (x[i] <= s && y[i] <= t);
    return c / x.size();
}

inline double cvm(const Vec& x, const Vec& y) {
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = ecdf2(x, y, x[i], y[i]) - ecdf(x, x[i]) * ecdf(y, y[i]);
        s += d * d;
    }
    return s / x.size();
}

inline double ks(const Vec& x, const Vec& y) {
    double m = 0;
    for (double s : x)
        for (double t : y) m = std::max(m, std::fabs(ecdf2(x, y, s, t) - ecdf(x, s) * ecdf(y, t)));
    return m;
}

// Points as rows.
inline double dist(const Vec& a, const Vec& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

struct STerms {
    double s1, s2, s3;
};

// S1 = n^-2 sum |x_k - x_l|^a |y_k - y_l|^a, S2 = product of the two
// n^-2 sums, S3 = n^-3 sum_{k,l,m} |x_k - x_l|^a |y_k - y_m|^a.
inline STerms dcov_terms(const Mat& x, const Mat& y, double alpha) {
    const std::size_t n = x.size();
    long double s1 = 0, sa = 0, sb = 0, s3 = 0;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) {
            const double a = std::pow(dist(x[k], x[l]), alpha);
            const double b = std::pow(dist(y[k], y[l]), alpha);
            s1 += a * b;
            sa += a;
            sb += b;
            for (std::size_t m = 0; m < n; ++m) s3 += a * std::pow(dist(y[k], y[m]), alpha);
        }
    const long double n2 = (long double)n * n;
    return {double(s1 / n2), double(sa / n2 * (sb / n2)), double(s3 / (n2 * n))};
}

inline Mat matmul(const Mat& a, const Mat& b) {
    const std::size_t n = a.size();
    Mat c(n, Vec(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

// (n-1)^-2 tr(K H L H) by explicit matrix products.
inline double hsic_trace(const Mat& k, const Mat& l) {
    const std::size_t n = k.size();
    Mat h(n, Vec(n, -1.0 / n));
    for (std::size_t i = 0; i < n; ++i) h[i][i] += 1.0;
    const Mat m = matmul(matmul(matmul(k, h), l), h);
    double tr = 0;
    for (std::size_t i = 0; i < n; ++i) tr += m[i][i];
    return tr / ((n - 1.0) * (n - 1.0));
}

// Direct HHG: for each ordered pair (i, j), i != j, cross-tabulate the other
// points k by 1{dx(i,k) <= dx(i,j)} and 1{dy(i,k) <= dy(i,j)}.
inline double hhg(const Mat& dx, const Mat& dy) {
    const std::size_t n = dx.size();
    double total = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double t[2][2] = {{0, 0}, {0, 0}};
            for (std::size_t k = 0; k < n; ++k) {
                if (k == i || k == j) continue;
                t[dx[i][k] <= dx[i][j] ? 0 : 1][dy[i][k] <= dy[i][j] ? 0 : 1] += 1;
            }
            const double m = n - 2.0;
            const double r0 = t[0][0] + t[0][1], r1 = t[1][0] + t[1][1];
            const double c0 = t[0][0] + t[1][0], c1 = t[0][1] + t[1][1];
            if (r0 == 0 || r1 == 0 || c0 == 0 || c1 == 0) continue;
            const double d = t[0][0] * t[1][1] - t[0][1] * t[1][0];
            total += m * d * d / (r0 * r1 * c0 * c1);
        }
    return total;
}

inline double correlation_integral(const Vec& v, std::size_t k, double eps) {
    const std::size_t n = v.size();
    double c = 0;
    for (std::size_t s = k; s <= n; ++s)
        for (std::size_t t = s + 1; t <= n; ++t) {
            double m = 0;
            for (std::size_t j = 0; j < k; ++j) m = std::max(m, std::fabs(v[s - 1 - j] - v[t - 1 - j]));
            c += m < eps;
        }
    return 2.0 * c / (n * (n - 1.0));
}

inline double canova(const Vec& x, const Vec& y, std::size_t kk) {
    const Vec r = ranks(x);
    double w = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j)
            if (std::fabs(r[i] - r[j]) < kk) w += (y[i] - y[j]) * (y[i] - y[j]);
    return w;
}

// Central difference of f at x with step h.
inline double deriv(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2 * h);
}

inline double second_deriv(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
}

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
inline double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2 * M_PI); }

// Phi^-1 by bisection on erfc.
inline double norm_quantile(double p) {
    double lo = -40, hi = 40;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (norm_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Simpson's rule on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
    return s * h / 3;
}

}  // namespace oracle
