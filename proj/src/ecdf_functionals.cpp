#include "nldep/ecdf_functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "nldep/error.hpp"
#include "parallel.hpp"

namespace nldep {

namespace {

// Dense ranks 0..m-1 of v (equal values share a rank); returns m.
std::size_t dense_ranks(std::span<const double> v, std::vector<std::size_t>& out) {
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    out.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = static_cast<std::size_t>(std::lower_bound(u.begin(), u.end(), v[i]) - u.begin());
    return u.size();
}

}  // namespace

double cvm_statistic(const PairedSample& p) {
    const std::size_t n = p.size();
    if (n < 3) throw SampleTooSmallError("cvm_statistic: need n >= 3");
    const auto x = p.x();
    std::vector<std::size_t> ry;
    const std::size_t m = dense_ranks(p.y(), ry);
    // cum_y[r] = #{y <= value of rank r}
    std::vector<std::size_t> cum_y(m, 0);
    for (std::size_t r : ry) ++cum_y[r];
    for (std::size_t r = 1; r < m; ++r) cum_y[r] += cum_y[r - 1];

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

    std::vector<std::size_t> bit(m + 1, 0);
    auto bit_add = [&](std::size_t r) {
        for (std::size_t i = r + 1; i <= m; i += i & (~i + 1)) ++bit[i];
    };
    auto bit_prefix = [&](std::size_t r) {
        std::size_t s = 0;
        for (std::size_t i = r + 1; i > 0; i -= i & (~i + 1)) s += bit[i];
        return s;
    };

    const double nn = static_cast<double>(n);
    double sum = 0.0;
    std::size_t g = 0;
    while (g < n) {
        std::size_t h = g + 1;
        while (h < n && x[order[h]] == x[order[g]]) ++h;
        for (std::size_t k = g; k < h; ++k) bit_add(ry[order[k]]);
        const double fx = static_cast<double>(h) / nn;
        for (std::size_t k = g; k < h; ++k) {
            const std::size_t r = ry[order[k]];
            const double fxy = static_cast<double>(bit_prefix(r)) / nn;
            const double fy = static_cast<double>(cum_y[r]) / nn;
            const double d = fxy - fx * fy;
            sum += d * d;
        }
        g = h;
    }
    return sum / nn;
}

double ks_statistic(const PairedSample& p) {
    const std::size_t n = p.size();
    const auto x = p.x();
    std::vector<std::size_t> ry;
    const std::size_t m = dense_ranks(p.y(), ry);
    std::vector<std::size_t> cum_y(m, 0);
    for (std::size_t r : ry) ++cum_y[r];
    for (std::size_t r = 1; r < m; ++r) cum_y[r] += cum_y[r - 1];

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

    // Sweep x breakpoints, keeping the histogram of y ranks with x <= current.
    std::vector<std::size_t> hist(m, 0);
    const double nn = static_cast<double>(n);
    double best = 0.0;
    std::size_t g = 0;
    while (g < n) {
        std::size_t h = g + 1;
        while (h < n && x[order[h]] == x[order[g]]) ++h;
        for (std::size_t k = g; k < h; ++k) ++hist[ry[order[k]]];
        const double fx = static_cast<double>(h) / nn;
        std::size_t run = 0;
        for (std::size_t r = 0; r < m; ++r) {
            run += hist[r];
            const double d = static_cast<double>(run) / nn - fx * static_cast<double>(cum_y[r]) / nn;
            best = std::max(best, std::fabs(d));
        }
        g = h;
    }
    return best;
}

double cvm_lag_aggregate(const SeriesSample& s, std::size_t k_max, bool weighted) {
    const std::size_t n = s.size();
    if (k_max < 1 || k_max + 3 > n) throw LagError("cvm_lag_aggregate: k_max outside [1, n-3]");
    double total = 0.0;
    for (std::size_t i = 1; i <= k_max; ++i) {
        const double d = cvm_statistic(lag_pairs(s, i));
        total += weighted ? static_cast<double>(n - i) * d : d;
    }
    return total;
}

TestReport cvm_test(const PairedSample& p, const ResampleConfig& cfg) {
    ResampleConfig c = cfg;
    c.tail = Tail::right;
    TestReport r = permute_test([](const PairedSample& q) { return cvm_statistic(q); }, p, c);
    r.test = "cvm";
    return r;
}

TestReport cvm_lag_test(const SeriesSample& s, std::size_t k_max, bool weighted, const ResampleConfig& cfg) {
    ResampleConfig c = cfg;
    c.tail = Tail::right;
    cvm_lag_aggregate(s, k_max, weighted);
    TestReport r = series_permute_test(
        [&](const SeriesSample& q) { return cvm_lag_aggregate(q, k_max, weighted); }, s, c);
    r.test = "cvm-lag";
    r.settings = {{"k_max", std::to_string(k_max)}, {"weighted", weighted ? "true" : "false"}};
    return r;
}

std::vector<double> cvm_null_draws(const CvmNullSpec& spec) {
    if (spec.truncation < 1) throw ParamError("cvm_null: truncation must be >= 1");
    if (spec.mc_draws < 1000) throw ParamError("cvm_null: mc_draws must be >= 1000");
    const std::size_t m = spec.truncation;
    std::vector<double> eta(m + 1);
    for (std::size_t i = 1; i <= m; ++i) {
        const double a = static_cast<double>(i) * std::numbers::pi;
        eta[i] = 1.0 / (a * a);
    }
    std::vector<double> draws(spec.mc_draws);
    detail::parallel_for(spec.mc_draws, [&](std::size_t d) {
        Rng rng(spec.seed, d + 1);
        double total = 0.0;
        for (std::size_t s = 1; s <= m; ++s) {
            double shell = 0.0;
            for (std::size_t j = 1; j <= s; ++j) {
                const double w = rng.normal();
                shell += eta[j] * w * w;
            }
            shell *= eta[s];
            double rest = 0.0;
            for (std::size_t i = 1; i < s; ++i) {
                const double w = rng.normal();
                rest += eta[i] * w * w;
            }
            total += shell + eta[s] * rest;
        }
        draws[d] = total;
    });
    return draws;
}

double cvm_null_quantile(const CvmNullSpec& spec, double level) {
    if (!(level > 0.0 && level < 1.0)) throw ParamError("cvm_null_quantile: level outside (0,1)");
    return quantile(cvm_null_draws(spec), level);
}

double cvm_null_mean(const CvmNullSpec& spec) { return mean(cvm_null_draws(spec)); }

namespace {

void validate_moebius(const std::vector<std::vector<double>>& samples, const SubsetIndex& a) {
    if (a.members.size() < 2) throw SubsetError("moebius: |A| must be >= 2");
    if (a.k != samples.size()) throw ShapeError("moebius: k does not match the number of sample vectors");
    if (a.k > 5) throw ParamError("moebius: k must be <= 5");
    std::vector<std::size_t> m = a.members;
    std::sort(m.begin(), m.end());
    if (std::adjacent_find(m.begin(), m.end()) != m.end() || m.back() >= a.k)
        throw SubsetError("moebius: A must be a set of distinct indices below k");
    if (samples.empty() || samples[0].empty()) throw InvalidArgumentError("moebius: empty samples");
    for (const auto& s : samples)
        if (s.size() != samples[0].size()) throw ShapeError("moebius: sample vectors differ in length");
}

// mu_A at x with coordinate j of observation i read as samples[j][idx[j][i]].
double moebius_at(const std::vector<std::vector<double>>& samples, const std::vector<std::size_t>& members,
                  const std::vector<double>& x, const std::vector<std::vector<std::size_t>>* idx) {
    const std::size_t n = samples[0].size();
    const std::size_t a = members.size();
    const std::size_t full = (std::size_t{1} << a) - 1;
    std::vector<double> count(full + 1, 0.0);
    std::vector<double> marg(a, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t mask = 0;
        for (std::size_t b = 0; b < a; ++b) {
            const std::size_t j = members[b];
            const std::size_t row = idx ? (*idx)[j][i] : i;
            if (samples[j][row] <= x[j]) {
                mask |= std::size_t{1} << b;
                marg[b] += 1.0;
            }
        }
        count[mask] += 1.0;
    }
    // Superset sums: count[B] becomes #{i : mask_i contains B}.
    for (std::size_t b = 0; b < a; ++b)
        for (std::size_t s = 0; s <= full; ++s)
            if (!(s & (std::size_t{1} << b))) count[s] += count[s | (std::size_t{1} << b)];
    const double nn = static_cast<double>(n);
    for (double& m : marg) m /= nn;
    double mu = 0.0;
    for (std::size_t s = 0; s <= full; ++s) {
        double term = count[s] / nn;
        std::size_t missing = 0;
        for (std::size_t b = 0; b < a; ++b)
            if (!(s & (std::size_t{1} << b))) {
                term *= marg[b];
                ++missing;
            }
        mu += (missing % 2 == 0) ? term : -term;
    }
    return mu;
}

}  // namespace

std::vector<double> moebius_statistic(const std::vector<std::vector<double>>& samples, const SubsetIndex& a,
                                      const std::vector<std::vector<double>>& eval_points) {
    validate_moebius(samples, a);
    std::vector<double> out;
    out.reserve(eval_points.size());
    for (const auto& x : eval_points) {
        if (x.size() != a.k) throw ShapeError("moebius: evaluation point dimension differs from k");
        out.push_back(moebius_at(samples, a.members, x, nullptr));
    }
    return out;
}

TestReport moebius_test(const std::vector<std::vector<double>>& samples, const SubsetIndex& a,
                        const ResampleConfig& cfg) {
    validate_moebius(samples, a);
    const std::size_t n = samples[0].size();
    const std::size_t k = a.k;
    auto stat = [&](const std::vector<std::vector<std::size_t>>& idx) {
        double best = 0.0;
        std::vector<double> x(k);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < k; ++j) x[j] = samples[j][idx[j][i]];
            best = std::max(best, std::fabs(moebius_at(samples, a.members, x, &idx)));
        }
        return best;
    };
    std::vector<std::size_t> id(n);
    std::iota(id.begin(), id.end(), std::size_t{0});
    const std::vector<std::vector<std::size_t>> ident(k, id);
    ResampleConfig c = cfg;
    c.tail = Tail::right;
    TestReport r = run_resampling(
        stat(ident),
        [&](Rng& rng, std::size_t) {
            std::vector<std::vector<std::size_t>> idx(k, id);
            for (std::size_t j = 1; j < k; ++j) idx[j] = rng.permutation(n);
            return stat(idx);
        },
        c, Scheme::permutation);
    r.test = "moebius";
    return r;
}

}  // namespace nldep
