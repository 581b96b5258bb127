#include "nldep/lgc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "nldep/error.hpp"
#include "nldep/matrix.hpp"
#include "nldep/normal.hpp"
#include "parallel.hpp"
#include "util.hpp"

namespace nldep {

const char* lgc_mode_name(LgcMode m) { return m == LgcMode::full5 ? "full5" : "simplified2"; }

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStartRhoClip = 0.95;

// Kernel-weighted moments of d = v - x about the fitting point.
struct Moments {
    double w = 0.0, m1 = 0.0, m2 = 0.0, m11 = 0.0, m22 = 0.0, m12 = 0.0;
};

Moments moments_at(std::span<const double> x, std::span<const double> y, double px, double py,
                   const Bandwidths& bw) {
    Moments m;
    const double i1 = 1.0 / bw.b1, i2 = 1.0 / bw.b2;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d1 = x[i] - px, d2 = y[i] - py;
        const double u = d1 * i1, v = d2 * i2;
        const double w = std::exp(-0.5 * (u * u + v * v));
        m.w += w;
        m.m1 += w * d1;
        m.m2 += w * d2;
        m.m11 += w * d1 * d1;
        m.m22 += w * d2 * d2;
        m.m12 += w * d1 * d2;
    }
    return m;
}

void check_bandwidths(const Bandwidths& bw) {
    if (!(bw.b1 > 0.0) || !(bw.b2 > 0.0) || !std::isfinite(bw.b1) || !std::isfinite(bw.b2))
        throw BandwidthError("lgc: bandwidths must be positive and finite");
}

bool params_valid(const LgcParams& t) {
    return t.sigma1 > 0.0 && t.sigma2 > 0.0 && std::isfinite(t.sigma1) && std::isfinite(t.sigma2) &&
           std::isfinite(t.mu1) && std::isfinite(t.mu2) && std::fabs(t.rho) < 1.0;
}

// Local log-likelihood and its gradient from the moments; n is the sample size.
LocalLoglik eval_moments(const Moments& mo, double n, double px, double py, const LgcParams& t,
                         const Bandwidths& bw) {
    const double s1 = t.sigma1, s2 = t.sigma2, rho = t.rho;
    const double om = 1.0 - rho * rho;
    const double d1 = t.mu1 - px, d2 = t.mu2 - py;
    const double W = mo.w;
    const double A = mo.m11 - 2.0 * d1 * mo.m1 + d1 * d1 * W;
    const double B = mo.m22 - 2.0 * d2 * mo.m2 + d2 * d2 * W;
    const double C = mo.m12 - d1 * mo.m2 - d2 * mo.m1 + d1 * d2 * W;
    const double sa = A / (s1 * s1), sb = B / (s2 * s2), sc = C / (s1 * s2);
    const double nq = sa - 2.0 * rho * sc + sb;
    const double p1 = mo.m1 - d1 * W, p2 = mo.m2 - d2 * W;

    LocalLoglik out;
    const double t1 = (-W * (std::log(2.0 * std::numbers::pi * s1 * s2) + 0.5 * std::log(om)) - nq / (2.0 * om)) / n;
    std::array<double, 5> g1{};
    g1[0] = (p1 / (s1 * s1) - rho * p2 / (s1 * s2)) / om / n;
    g1[1] = (p2 / (s2 * s2) - rho * p1 / (s1 * s2)) / om / n;
    g1[2] = (-W / s1 + (sa - rho * sc) / (om * s1)) / n;
    g1[3] = (-W / s2 + (sb - rho * sc) / (om * s2)) / n;
    g1[4] = (W * rho / om + sc / om - nq * rho / (om * om)) / n;

    // Penalty: integral of the kernel against psi, a Gaussian convolution.
    const double o11 = s1 * s1 + bw.b1 * bw.b1, o22 = s2 * s2 + bw.b2 * bw.b2, o12 = rho * s1 * s2;
    const double det = o11 * o22 - o12 * o12;
    const double e1 = -d1, e2 = -d2;
    const double q1 = (o22 * e1 - o12 * e2) / det, q2 = (-o12 * e1 + o11 * e2) / det;
    const double q = e1 * q1 + e2 * q2;
    const double pen = bw.b1 * bw.b2 / std::sqrt(det) * std::exp(-0.5 * q);
    const double g11 = -0.5 * o22 / det + 0.5 * q1 * q1;
    const double g22 = -0.5 * o11 / det + 0.5 * q2 * q2;
    const double g12 = 0.5 * o12 / det + 0.5 * q1 * q2;
    std::array<double, 5> gp{};
    gp[0] = pen * q1;
    gp[1] = pen * q2;
    gp[2] = pen * (2.0 * s1 * g11 + 2.0 * rho * s2 * g12);
    gp[3] = pen * (2.0 * s2 * g22 + 2.0 * rho * s1 * g12);
    gp[4] = pen * 2.0 * s1 * s2 * g12;

    out.value = t1 - pen;
    for (int k = 0; k < 5; ++k) out.gradient[k] = g1[k] - gp[k];
    return out;
}

struct Problem {
    const Moments* mo;
    double n;
    double px, py;
    Bandwidths bw;
    LgcMode mode;
    double scale;  // n / W, so the objective is O(1) per unit of local mass
};

LgcParams to_params(const Problem& pr, const double* phi) {
    if (pr.mode == LgcMode::simplified2) return {0.0, 0.0, 1.0, 1.0, std::tanh(phi[0])};
    return {phi[0], phi[1], std::exp(phi[2]), std::exp(phi[3]), std::tanh(phi[4])};
}

// Minimized objective -scale * L and its gradient in the unconstrained space.
double objective(const Problem& pr, const std::vector<double>& phi, std::vector<double>& grad) {
    const LgcParams t = to_params(pr, phi.data());
    grad.assign(phi.size(), 0.0);
    if (!params_valid(t)) return kInf;
    const LocalLoglik r = eval_moments(*pr.mo, pr.n, pr.px, pr.py, t, pr.bw);
    if (!std::isfinite(r.value)) return kInf;
    const double om = 1.0 - t.rho * t.rho;
    if (pr.mode == LgcMode::simplified2) {
        grad[0] = -pr.scale * om * r.gradient[4];
    } else {
        grad[0] = -pr.scale * r.gradient[0];
        grad[1] = -pr.scale * r.gradient[1];
        grad[2] = -pr.scale * t.sigma1 * r.gradient[2];
        grad[3] = -pr.scale * t.sigma2 * r.gradient[3];
        grad[4] = -pr.scale * om * r.gradient[4];
    }
    for (double g : grad)
        if (!std::isfinite(g)) return kInf;
    return -pr.scale * r.value;
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

struct OptResult {
    std::vector<double> phi;
    std::size_t iterations = 0;
};

// BFGS with backtracking Armijo search. Near the optimum the function change
// drops below rounding, so a step that keeps f flat and shrinks the gradient is
// also accepted.
OptResult bfgs(const Problem& pr, std::vector<double> x) {
    constexpr double kInnerTol = 1e-11;
    constexpr double kMaxStep = 3.0;
    const std::size_t d = x.size();
    std::vector<double> g, gn, xn(d), p(d), s(d), yv(d);
    double f = objective(pr, x, g);
    OptResult res;
    if (!std::isfinite(f)) {
        res.phi = x;
        return res;
    }
    std::vector<double> h(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) h[i * d + i] = 1.0;
    bool scaled = false;
    std::size_t it = 0;
    for (; it < kLgcMaxIterations; ++it) {
        const double gnorm = norm2(g);
        if (gnorm < kInnerTol) break;
        for (std::size_t i = 0; i < d; ++i) {
            p[i] = 0.0;
            for (std::size_t j = 0; j < d; ++j) p[i] -= h[i * d + j] * g[j];
        }
        double slope = 0.0;
        for (std::size_t i = 0; i < d; ++i) slope += g[i] * p[i];
        if (!(slope < 0.0)) {
            std::fill(h.begin(), h.end(), 0.0);
            for (std::size_t i = 0; i < d; ++i) {
                h[i * d + i] = 1.0;
                p[i] = -g[i];
            }
            slope = -gnorm * gnorm;
        }
        const double pn = norm2(p);
        if (pn > kMaxStep) {
            for (double& v : p) v *= kMaxStep / pn;
            slope *= kMaxStep / pn;
        }
        double step = 1.0, fn = kInf;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t i = 0; i < d; ++i) xn[i] = x[i] + step * p[i];
            fn = objective(pr, xn, gn);
            if (std::isfinite(fn)) {
                if (fn <= f + 1e-4 * step * slope) {
                    accepted = true;
                    break;
                }
                if (std::fabs(fn - f) <= 1e-14 * std::max(1.0, std::fabs(f)) && norm2(gn) < gnorm) {
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) break;
        double sy = 0.0, yy = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            s[i] = xn[i] - x[i];
            yv[i] = gn[i] - g[i];
            sy += s[i] * yv[i];
            yy += yv[i] * yv[i];
        }
        if (sy > 1e-20) {
            if (!scaled) {
                for (std::size_t i = 0; i < d; ++i) h[i * d + i] = sy / yy;
                scaled = true;
            }
            // H <- (I - r s y^T) H (I - r y s^T) + r s s^T
            const double r = 1.0 / sy;
            std::vector<double> hy(d, 0.0);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) hy[i] += h[i * d + j] * yv[j];
            double yhy = 0.0;
            for (std::size_t i = 0; i < d; ++i) yhy += yv[i] * hy[i];
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    h[i * d + j] += -r * (hy[i] * s[j] + s[i] * hy[j]) + (r * r * yhy + r) * s[i] * s[j];
        }
        x = xn;
        g = gn;
        f = fn;
    }
    res.phi = x;
    res.iterations = it;
    return res;
}

double clip_rho(double r) {
    if (!std::isfinite(r)) return 0.0;
    return std::clamp(r, -kStartRhoClip, kStartRhoClip);
}

LgcParams local_start(const Moments& mo, double px, double py, const Bandwidths& bw) {
    const double a1 = mo.m1 / mo.w, a2 = mo.m2 / mo.w;
    const double v1 = std::max(mo.m11 / mo.w - a1 * a1, 1e-4 * bw.b1 * bw.b1);
    const double v2 = std::max(mo.m22 / mo.w - a2 * a2, 1e-4 * bw.b2 * bw.b2);
    const double c = mo.m12 / mo.w - a1 * a2;
    return {px + a1, py + a2, std::sqrt(v1), std::sqrt(v2), clip_rho(c / std::sqrt(v1 * v2))};
}

std::vector<double> to_phi(const LgcParams& t, LgcMode mode) {
    const double z = std::atanh(clip_rho(t.rho) == t.rho ? t.rho : clip_rho(t.rho));
    if (mode == LgcMode::simplified2) return {z};
    return {t.mu1, t.mu2, std::log(t.sigma1), std::log(t.sigma2), z};
}

struct Candidate {
    LgcParams params;
    double value = -kInf;  // L
    double grad_scaled = kInf;
    double grad_raw = kInf;
    std::size_t iterations = 0;
};

Candidate run_start(const Problem& pr, const LgcParams& start) {
    Candidate c;
    if (!params_valid(start)) return c;
    const OptResult r = bfgs(pr, to_phi(start, pr.mode));
    c.params = to_params(pr, r.phi.data());
    c.iterations = r.iterations;
    if (!params_valid(c.params)) return c;
    const LocalLoglik ll = eval_moments(*pr.mo, pr.n, pr.px, pr.py, c.params, pr.bw);
    c.value = ll.value;
    double g2 = 0.0;
    if (pr.mode == LgcMode::simplified2) {
        g2 = ll.gradient[4] * ll.gradient[4];
    } else {
        for (double g : ll.gradient) g2 += g * g;
    }
    c.grad_raw = std::sqrt(g2);
    c.grad_scaled = pr.scale * c.grad_raw;
    return c;
}

// Multi-start fit from precomputed moments.
LgcFit fit_from_moments(const Moments& mo, double n, double px, double py, const Bandwidths& bw, LgcMode mode,
                        const std::vector<LgcParams>& starts) {
    if (!(mo.w > kLgcMinMass))
        throw SupportError("lgc: kernel mass " + detail::num(mo.w) + " at (" + detail::num(px) + ", " +
                           detail::num(py) + ") is below the floor");
    const Problem pr{&mo, n, px, py, bw, mode, n / mo.w};
    Candidate best;
    bool found = false;
    for (const LgcParams& s : starts) {
        const Candidate c = run_start(pr, s);
        if (!(c.grad_scaled < kLgcTolerance) || !std::isfinite(c.value)) continue;
        const double tol = 1e-12 * std::max(1.0, std::fabs(c.value));
        if (!found || c.value > best.value + tol ||
            (std::fabs(c.value - best.value) <= tol && c.grad_raw < best.grad_raw)) {
            best = c;
            found = true;
        }
    }
    if (!found)
        throw ConvergenceError("lgc: no start converged at (" + detail::num(px) + ", " + detail::num(py) + ")");
    LgcFit fit;
    fit.point = {px, py};
    fit.params = best.params;
    fit.bandwidths = bw;
    fit.converged = true;
    fit.objective = best.value;
    fit.gradient_norm = best.grad_raw;
    fit.iterations = best.iterations;
    fit.mass = mo.w;
    return fit;
}

LgcParams global_start(const PairedSample& p) {
    const double sx = population_sd(p.x()), sy = population_sd(p.y());
    double r = 0.0;
    if (sx > 0.0 && sy > 0.0) r = pearson(p);
    return {mean(p.x()), mean(p.y()), sx > 0.0 ? sx : 1.0, sy > 0.0 ? sy : 1.0, clip_rho(r)};
}

std::vector<double> linspace(double a, double b, std::size_t k) {
    std::vector<double> v(k);
    for (std::size_t i = 0; i < k; ++i)
        v[i] = k == 1 ? 0.5 * (a + b) : a + (b - a) * static_cast<double>(i) / static_cast<double>(k - 1);
    return v;
}

double log_psi(double x1, double x2, const LgcParams& t) {
    const double a = (x1 - t.mu1) / t.sigma1, c = (x2 - t.mu2) / t.sigma2;
    const double om = 1.0 - t.rho * t.rho;
    return -std::log(2.0 * std::numbers::pi * t.sigma1 * t.sigma2 * std::sqrt(om)) -
           (a * a - 2.0 * t.rho * a * c + c * c) / (2.0 * om);
}

}  // namespace

LocalLoglik local_loglik(const PairedSample& p, std::pair<double, double> point, const LgcParams& params,
                         const Bandwidths& bw) {
    check_bandwidths(bw);
    if (!params_valid(params)) throw ParamDomainError("local_loglik: need sigma > 0 and |rho| < 1");
    const Moments mo = moments_at(p.x(), p.y(), point.first, point.second, bw);
    return eval_moments(mo, static_cast<double>(p.size()), point.first, point.second, params, bw);
}

LgcFit lgc_fit_point(const PairedSample& p, std::pair<double, double> point, const Bandwidths& bw, LgcMode mode,
                     const FitOptions& opts) {
    check_bandwidths(bw);
    const Moments mo = moments_at(p.x(), p.y(), point.first, point.second, bw);
    std::vector<LgcParams> starts{global_start(p)};
    if (mo.w > 0.0) starts.push_back(local_start(mo, point.first, point.second, bw));
    if (opts.warm_start) starts.push_back(*opts.warm_start);
    return fit_from_moments(mo, static_cast<double>(p.size()), point.first, point.second, bw, mode, starts);
}

PairedSample to_z_scale(const PairedSample& p) {
    return PairedSample(normal_scores(p.x()).scores, normal_scores(p.y()).scores);
}

double bandwidth_plugin(std::size_t n) {
    if (n < 2) throw ParamError("bandwidth_plugin: need n >= 2");
    return 1.75 * std::pow(static_cast<double>(n), -1.0 / 6.0);
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi >= lo) || count == 0) throw ParamError("log_spaced: need 0 < lo <= hi, count >= 1");
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        v[i] = std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo)));
    }
    return v;
}

std::vector<double> bandwidth_cv_scores(const PairedSample& p, const std::vector<double>& candidates,
                                        const CvOptions& opts) {
    if (candidates.empty()) throw ParamError("bandwidth_cv: empty candidate grid");
    if (opts.max_eval == 0) throw ParamError("bandwidth_cv: max_eval must be >= 1");
    const std::size_t n = p.size();
    const double sx = population_sd(p.x()), sy = population_sd(p.y());
    if (!(sx > 0.0) || !(sy > 0.0)) throw DegenerateSampleError("bandwidth_cv: zero variance marginal");
    std::vector<std::size_t> eval;
    const std::size_t stride = (n + opts.max_eval - 1) / opts.max_eval;
    for (std::size_t i = 0; i < n; i += stride) eval.push_back(i);
    const LgcParams g = global_start(p);
    const double nn = static_cast<double>(n);

    // lp(c, j): held-out log density of eval point j under candidate c, NaN on failure.
    const std::size_t ne = eval.size();
    Matrix lp(candidates.size(), ne, std::numeric_limits<double>::quiet_NaN());
    detail::parallel_for(candidates.size(), [&](std::size_t c) {
        const double mult = candidates[c];
        if (!(mult > 0.0)) return;
        const Bandwidths bw{mult * sx, mult * sy};
        for (std::size_t j = 0; j < ne; ++j) {
            const double px = p.x()[eval[j]], py = p.y()[eval[j]];
            Moments mo = moments_at(p.x(), p.y(), px, py, bw);
            mo.w -= 1.0;  // drop the held-out point: weight 1 and d = 0
            if (!(mo.w > kLgcMinMass)) continue;
            try {
                const LgcFit f =
                    fit_from_moments(mo, nn - 1.0, px, py, bw, opts.mode, {g, local_start(mo, px, py, bw)});
                lp(c, j) = opts.mode == LgcMode::simplified2 ? log_psi(px, py, {0.0, 0.0, 1.0, 1.0, f.params.rho})
                                                             : log_psi(px, py, f.params);
            } catch (const Error&) {
            }
        }
    });
    // Small bandwidths fail in the sparse tails, where log densities are
    // lowest; averaging each candidate over its own successes would favour
    // them. Live candidates are compared on the points all of them fitted.
    std::vector<bool> live(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        std::size_t ok = 0;
        for (std::size_t j = 0; j < ne; ++j) ok += std::isnan(lp(c, j)) ? 0 : 1;
        live[c] = ok > 0 && 2 * ok >= ne;
    }
    std::vector<double> scores(candidates.size(), -kInf);
    std::vector<double> total(candidates.size(), 0.0);
    std::size_t common = 0;
    for (std::size_t j = 0; j < ne; ++j) {
        bool all = true;
        for (std::size_t c = 0; c < candidates.size(); ++c) all = all && (!live[c] || !std::isnan(lp(c, j)));
        if (!all) continue;
        ++common;
        for (std::size_t c = 0; c < candidates.size(); ++c)
            if (live[c]) total[c] += lp(c, j);
    }
    if (common == 0) return scores;
    for (std::size_t c = 0; c < candidates.size(); ++c)
        if (live[c]) scores[c] = total[c] / static_cast<double>(common);
    return scores;
}

Bandwidths bandwidth_cv(const PairedSample& p, const std::vector<double>& candidates, const CvOptions& opts) {
    const std::vector<double> scores = bandwidth_cv_scores(p, candidates, opts);
    std::size_t best = candidates.size();
    for (std::size_t c = 0; c < candidates.size(); ++c)
        if (std::isfinite(scores[c]) && (best == candidates.size() || scores[c] > scores[best])) best = c;
    if (best == candidates.size()) throw BandwidthError("bandwidth_cv: every candidate failed");
    return {candidates[best] * population_sd(p.x()), candidates[best] * population_sd(p.y())};
}

std::size_t LgcMap::failed() const {
    std::size_t f = 0;
    for (const auto& pt : points) f += pt.converged ? 0 : 1;
    return f;
}

LgcMap lgc_map(const PairedSample& p_in, const GridSpec& grid, LgcScale scale, std::optional<Bandwidths> bw,
               LgcMode mode) {
    const PairedSample p = scale == LgcScale::z ? to_z_scale(p_in) : p_in;
    LgcMap m;
    m.scale = scale;
    m.mode = mode;
    if (bw) {
        m.bandwidths = *bw;
    } else {
        const double b = bandwidth_plugin(p.size());
        m.bandwidths = scale == LgcScale::z ? Bandwidths{b, b}
                                            : Bandwidths{b * population_sd(p.x()), b * population_sd(p.y())};
    }
    check_bandwidths(m.bandwidths);
    if (!grid.x_axis.empty() || !grid.y_axis.empty()) {
        if (grid.x_axis.empty() || grid.y_axis.empty()) throw ParamError("lgc_map: give both axes or neither");
        m.x_axis = grid.x_axis;
        m.y_axis = grid.y_axis;
    } else {
        if (grid.nx == 0 || grid.ny == 0) throw ParamError("lgc_map: empty grid");
        if (!(grid.q_low >= 0.0 && grid.q_low < grid.q_high && grid.q_high <= 1.0))
            throw ParamError("lgc_map: need 0 <= q_low < q_high <= 1");
        m.x_axis = linspace(quantile(p.x(), grid.q_low), quantile(p.x(), grid.q_high), grid.nx);
        m.y_axis = linspace(quantile(p.y(), grid.q_low), quantile(p.y(), grid.q_high), grid.ny);
    }
    const std::size_t nx = m.x_axis.size(), ny = m.y_axis.size();
    m.points.resize(nx * ny);
    const LgcParams g = global_start(p);
    const double nn = static_cast<double>(p.size());
    detail::parallel_for(ny, [&](std::size_t iy) {
        std::optional<LgcParams> warm;
        for (std::size_t ix = 0; ix < nx; ++ix) {
            LgcMapPoint& pt = m.points[iy * nx + ix];
            pt.point = {m.x_axis[ix], m.y_axis[iy]};
            const Moments mo = moments_at(p.x(), p.y(), pt.point.first, pt.point.second, m.bandwidths);
            std::vector<LgcParams> starts{g};
            if (mo.w > 0.0) starts.push_back(local_start(mo, pt.point.first, pt.point.second, m.bandwidths));
            if (warm) starts.push_back(*warm);
            try {
                pt.fit = fit_from_moments(mo, nn, pt.point.first, pt.point.second, m.bandwidths, mode, starts);
                pt.converged = true;
                warm = pt.fit.params;
            } catch (const Error& e) {
                pt.converged = false;
                pt.failure = e.what();
            }
        }
    });
    return m;
}

std::string lgc_map_csv(const LgcMap& m) {
    std::ostringstream os;
    os << "x1,x2,rho,mu1,mu2,sigma1,sigma2,converged\n";
    for (const auto& pt : m.points) {
        os << detail::num(pt.point.first) << ',' << detail::num(pt.point.second) << ',';
        if (pt.converged) {
            const LgcParams& t = pt.fit.params;
            os << detail::num(t.rho) << ',' << detail::num(t.mu1) << ',' << detail::num(t.mu2) << ','
               << detail::num(t.sigma1) << ',' << detail::num(t.sigma2) << ",1\n";
        } else {
            os << "nan,nan,nan,nan,nan,0\n";
        }
    }
    return os.str();
}

double copula_diagonal_rho(const Copula& c, double d) {
    if (!std::isfinite(d)) throw ParamError("copula_diagonal_rho: d must be finite");
    if (const auto* g = std::get_if<GaussianCopula>(&c)) {
        if (!(std::fabs(g->rho) <= 1.0)) throw ParamError("gaussian copula: |rho| must be <= 1");
        return g->rho;
    }
    const double th = std::get<ClaytonCopula>(c).theta;
    if (!std::isfinite(th) || th < -1.0 || th == 0.0) throw ParamError("clayton: theta must lie in [-1, inf) \\ {0}");
    if (th == -1.0) throw SupportError("clayton: theta = -1 is singular on the diagonal");
    // With u = v = Phi(d) and S = 2 u^-theta - 1:
    //   C1  = u^(-theta-1) S^(-1/theta-1)
    //   C11 = (theta+1) u^(-theta-2) S^(-1/theta-2) (1 - u^-theta)
    //   rho = -C11 phi(d) / sqrt(phi(Phi^-1(C1))^2 + (C11 phi(d))^2)
    const double lu = std::log(norm_cdf(d));
    const double ut = std::exp(-th * lu);
    const double s = 2.0 * ut - 1.0;
    if (!(s > 0.0)) throw SupportError("clayton: diagonal point outside the copula support");
    const double ls = std::log(s);
    const double c1 = std::exp((-th - 1.0) * lu + (-1.0 / th - 1.0) * ls);
    const double mag = (th + 1.0) * std::exp((-th - 2.0) * lu + (-1.0 / th - 2.0) * ls) * std::fabs(1.0 - ut);
    const double c11 = (1.0 - ut) < 0.0 ? -mag : mag;
    const double num = -c11 * norm_pdf(d);
    const double den = norm_pdf(norm_quantile(c1));
    return num / std::sqrt(den * den + num * num);
}

// ---------------------------------------------------------------------------
// Test functional

namespace {

struct ZBase {
    std::vector<double> zx, zy;
    Matrix ex, ey;  // kernel factors exp(-((z_a - z_b)/b)^2 / 2)
    bool shared = false;
    Bandwidths bw;
};

Matrix kernel_factors(const std::vector<double>& z, double b) {
    const std::size_t n = z.size();
    Matrix e(n, n, 1.0);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t c = a + 1; c < n; ++c) {
            const double u = (z[a] - z[c]) / b;
            e(a, c) = e(c, a) = std::exp(-0.5 * u * u);
        }
    return e;
}

double apply_h(LgcFunctional h, double rho) {
    switch (h) {
        case LgcFunctional::rho_squared: return rho * rho;
        case LgcFunctional::rho_abs: return std::fabs(rho);
        case LgcFunctional::rho: return rho;
    }
    return 0.0;
}

const char* h_name(LgcFunctional h) {
    switch (h) {
        case LgcFunctional::rho_squared: return "rho2";
        case LgcFunctional::rho_abs: return "abs_rho";
        case LgcFunctional::rho: return "rho";
    }
    return "unknown";
}

void validate_spec(const LgcTestSpec& spec) {
    if (spec.lag_first > spec.lag_last) throw ParamError("lgc_test: need lag_first <= lag_last");
    if (spec.boxes.empty() && !(spec.q_low >= 0.0 && spec.q_low < spec.q_high && spec.q_high <= 1.0))
        throw ParamError("lgc_test: need 0 <= q_low < q_high <= 1");
    for (const Region& r : spec.boxes)
        if (!(r.x_low < r.x_high) || !(r.y_low < r.y_high)) throw ParamError("lgc_test: box with low >= high");
    if (spec.bandwidths) check_bandwidths(*spec.bandwidths);
}

std::vector<Region> region_of(const LgcTestSpec& spec, std::span<const double> zx, std::span<const double> zy) {
    if (!spec.boxes.empty()) return spec.boxes;
    // Half-open boxes exclude the lower quantile itself; widen by one ulp.
    return {Region{std::nextafter(quantile(zx, spec.q_low), -kInf), quantile(zx, spec.q_high),
                   std::nextafter(quantile(zy, spec.q_low), -kInf), quantile(zy, spec.q_high)}};
}

bool in_region(const std::vector<Region>& s, double x, double y) {
    for (const Region& r : s)
        if (r.contains(x, y)) return true;
    return false;
}

struct FunctionalValue {
    double value = 0.0;
    std::size_t in_region = 0;
    std::size_t failures = 0;
};

// Functional over pairs (zx[ix[j]], zy[iy[j]]), j < ix.size().
FunctionalValue functional_eval(const ZBase& b, std::span<const std::size_t> ix, std::span<const std::size_t> iy,
                                const std::vector<Region>& region, const LgcTestSpec& spec) {
    const std::size_t m = ix.size();
    const Matrix& ey = b.shared ? b.ex : b.ey;
    std::vector<double> px(m), py(m);
    for (std::size_t j = 0; j < m; ++j) {
        px[j] = b.zx[ix[j]];
        py[j] = b.zy[iy[j]];
    }
    // Global start: per-pairing moments.
    LgcParams g{0.0, 0.0, 1.0, 1.0, 0.0};
    {
        const double mx = mean(px), my = mean(py);
        double sxy = 0, sxx = 0, syy = 0;
        for (std::size_t j = 0; j < m; ++j) {
            sxy += (px[j] - mx) * (py[j] - my);
            sxx += (px[j] - mx) * (px[j] - mx);
            syy += (py[j] - my) * (py[j] - my);
        }
        const double nn = static_cast<double>(m);
        g = {mx, my, std::sqrt(sxx / nn), std::sqrt(syy / nn), clip_rho(sxy / std::sqrt(sxx * syy))};
        if (!params_valid(g)) g = {0.0, 0.0, 1.0, 1.0, 0.0};
    }
    FunctionalValue out;
    const double nn = static_cast<double>(m);
    for (std::size_t j = 0; j < m; ++j) {
        if (!in_region(region, px[j], py[j])) continue;
        ++out.in_region;
        const double* exr = b.ex.row(ix[j]);
        const double* eyr = ey.row(iy[j]);
        Moments mo;
        for (std::size_t k = 0; k < m; ++k) {
            const double w = exr[ix[k]] * eyr[iy[k]];
            const double d1 = px[k] - px[j], d2 = py[k] - py[j];
            mo.w += w;
            mo.m1 += w * d1;
            mo.m2 += w * d2;
            mo.m11 += w * d1 * d1;
            mo.m22 += w * d2 * d2;
            mo.m12 += w * d1 * d2;
        }
        try {
            const LgcFit f =
                fit_from_moments(mo, nn, px[j], py[j], b.bw, spec.mode, {g, local_start(mo, px[j], py[j], b.bw)});
            out.value += apply_h(spec.h, f.params.rho);
        } catch (const Error&) {
            ++out.failures;
        }
    }
    out.value /= nn;
    return out;
}

ZBase paired_base(const PairedSample& p, const LgcTestSpec& spec) {
    ZBase b;
    b.zx = normal_scores(p.x()).scores;
    b.zy = normal_scores(p.y()).scores;
    const double pb = bandwidth_plugin(p.size());
    b.bw = spec.bandwidths.value_or(Bandwidths{pb, pb});
    b.ex = kernel_factors(b.zx, b.bw.b1);
    b.ey = kernel_factors(b.zy, b.bw.b2);
    return b;
}

ZBase series_base(const SeriesSample& s, const LgcTestSpec& spec) {
    ZBase b;
    b.zx = normal_scores(s.values()).scores;
    b.zy = b.zx;
    const double pb = bandwidth_plugin(s.size());
    b.bw = spec.bandwidths.value_or(Bandwidths{pb, pb});
    b.ex = kernel_factors(b.zx, b.bw.b1);
    if (b.bw.b1 == b.bw.b2) {
        b.shared = true;
    } else {
        b.ey = kernel_factors(b.zy, b.bw.b2);
    }
    return b;
}

struct SeriesEval {
    double value = 0.0;
    std::size_t in_region = 0;
    std::size_t failures = 0;
};

// Aggregated lag functional for the resampled series z[perm[.]].
SeriesEval series_eval(const ZBase& b, std::span<const std::size_t> perm, const std::vector<Region>& region,
                       const LgcTestSpec& spec) {
    const std::size_t n = perm.size();
    SeriesEval out;
    bool first = true;
    for (std::size_t lag = spec.lag_first; lag <= spec.lag_last; ++lag) {
        const std::span<const std::size_t> ix = perm.subspan(lag);
        const std::span<const std::size_t> iy = perm.subspan(0, n - lag);
        const FunctionalValue fv = functional_eval(b, ix, iy, region, spec);
        out.in_region += fv.in_region;
        out.failures += fv.failures;
        if (spec.aggregate == LagAggregate::sum) {
            out.value += fv.value;
        } else {
            out.value = first ? std::fabs(fv.value) : std::max(out.value, std::fabs(fv.value));
        }
        first = false;
    }
    return out;
}

Settings lgc_settings(const LgcTestSpec& spec, const Bandwidths& bw, std::size_t in_region, std::size_t failures) {
    Settings s{{"h", h_name(spec.h)},
               {"mode", lgc_mode_name(spec.mode)},
               {"b1", detail::num(bw.b1)},
               {"b2", detail::num(bw.b2)},
               {"lag_first", std::to_string(spec.lag_first)},
               {"lag_last", std::to_string(spec.lag_last)},
               {"aggregate", spec.aggregate == LagAggregate::sum ? "sum" : "max"},
               {"points_in_region", std::to_string(in_region)},
               {"failed_fits", std::to_string(failures)}};
    if (spec.boxes.empty()) {
        s.emplace_back("q_low", detail::num(spec.q_low));
        s.emplace_back("q_high", detail::num(spec.q_high));
    } else {
        s.emplace_back("boxes", std::to_string(spec.boxes.size()));
    }
    return s;
}

// The observed functional needs at least one point in S with a usable fit.
void require_fits(std::size_t in_region, std::size_t failures) {
    if (in_region == 0) throw RegionTooSmallError("lgc_test: no sample point in S");
    if (failures == in_region) throw SupportError("lgc_test: every local fit in S failed");
}

std::vector<std::size_t> iid_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> v(n);
    for (auto& i : v) i = static_cast<std::size_t>(rng.uniform_index(n));
    return v;
}

std::vector<std::size_t> identity(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

}  // namespace

double lgc_functional(const PairedSample& p, const LgcTestSpec& spec) {
    validate_spec(spec);
    const ZBase b = paired_base(p, spec);
    const auto region = region_of(spec, b.zx, b.zy);
    const auto id = identity(p.size());
    const FunctionalValue fv = functional_eval(b, id, id, region, spec);
    require_fits(fv.in_region, fv.failures);
    return fv.value;
}

double lgc_functional(const SeriesSample& s, const LgcTestSpec& spec) {
    validate_spec(spec);
    if (spec.lag_first < 1 || spec.lag_last + 2 > s.size()) throw LagError("lgc_test: lags outside [1, n-2]");
    const ZBase b = series_base(s, spec);
    const auto region = region_of(spec, b.zx, b.zy);
    const SeriesEval ev = series_eval(b, identity(s.size()), region, spec);
    require_fits(ev.in_region, ev.failures);
    return ev.value;
}

TestReport lgc_test(const PairedSample& p, const LgcTestSpec& spec, const ResampleConfig& cfg) {
    validate_spec(spec);
    const std::size_t n = p.size();
    if (spec.resampling == Scheme::block_bootstrap && spec.block_length > n)
        throw ParamError("lgc_test: block length exceeds n");
    const ZBase b = paired_base(p, spec);
    const auto region = region_of(spec, b.zx, b.zy);
    const auto id = identity(n);
    const FunctionalValue obs = functional_eval(b, id, id, region, spec);
    require_fits(obs.in_region, obs.failures);
    const std::size_t block = spec.block_length == 0 ? default_block_length(n) : spec.block_length;
    ResampleConfig c = cfg;
    c.tail = Tail::right;
    TestReport r = run_resampling(
        obs.value,
        [&](Rng& rng, std::size_t) {
            switch (spec.resampling) {
                case Scheme::permutation: return functional_eval(b, id, rng.permutation(n), region, spec).value;
                case Scheme::iid_bootstrap: {
                    const auto ix = iid_indices(n, rng);
                    return functional_eval(b, ix, iid_indices(n, rng), region, spec).value;
                }
                case Scheme::block_bootstrap: {
                    const auto ix = block_bootstrap_indices(n, block, rng);
                    return functional_eval(b, ix, block_bootstrap_indices(n, block, rng), region, spec).value;
                }
            }
            return 0.0;
        },
        c, spec.resampling);
    r.test = "lgc";
    r.settings = lgc_settings(spec, b.bw, obs.in_region, obs.failures);
    if (spec.resampling == Scheme::block_bootstrap) r.settings.emplace_back("block_length", std::to_string(block));
    return r;
}

TestReport lgc_test(const SeriesSample& s, const LgcTestSpec& spec, const ResampleConfig& cfg) {
    validate_spec(spec);
    const std::size_t n = s.size();
    if (spec.lag_first < 1 || spec.lag_last + 2 > n) throw LagError("lgc_test: lags outside [1, n-2]");
    if (spec.resampling == Scheme::block_bootstrap)
        throw ParamError("lgc_test: block bootstrap keeps serial dependence, so it is not a serial-independence null");
    const ZBase b = series_base(s, spec);
    const auto region = region_of(spec, b.zx, b.zy);
    const SeriesEval obs = series_eval(b, identity(n), region, spec);
    require_fits(obs.in_region, obs.failures);
    ResampleConfig c = cfg;
    c.tail = Tail::right;
    TestReport r = run_resampling(
        obs.value,
        [&](Rng& rng, std::size_t) {
            const auto perm = spec.resampling == Scheme::permutation ? rng.permutation(n) : iid_indices(n, rng);
            return series_eval(b, perm, region, spec).value;
        },
        c, spec.resampling);
    r.test = "lgc-serial";
    r.settings = lgc_settings(spec, b.bw, obs.in_region, obs.failures);
    return r;
}

}  // namespace nldep
