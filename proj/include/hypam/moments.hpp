#pragma once

// Feynman-Kac Monte Carlo estimators of annealed moments of the parabolic
// Anderson model. The Gaussian potential is integrated out exactly:
//   <u(t,x)^p> = E[ exp( (1/2) sum_{i,j} int int Q(d(W^i_u, W^j_v)) du dv ) ]
// over p independent Brownian paths, with an optional confinement indicator
// for the localized version. Estimates aggregate by log-sum-exp with
// jackknife standard errors; trend curves share paths across horizons
// (nested prefixes) so that orderings are assessed with common random
// numbers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hypam/field.hpp"
#include "hypam/stochastic.hpp"

namespace hypam {

struct McParams {
    int d = 2;
    double alpha = 1.0;
    DriftConvention convention = DriftConvention::riemannian;
    long n_replicates = 200;
    double dt = 0.01;
    std::uint64_t seed = 1;
};

struct MomentEstimate {
    int p = 1;
    double t = 0.0;
    double R = 0.0;  // <= 0 means no localization
    double log_moment = 0.0;
    double std_error = 0.0;
    long n_paths = 0;      // replicates
    long n_survived = 0;   // replicates passing the confinement indicator
    double dt = 0.0;
    std::uint64_t seed = 0;
    DriftConvention convention = DriftConvention::riemannian;
    bool zero_hits = false;  // log_moment is then the rule-of-three upper bound
};

namespace detail_mom {

// Precomputed per-path hyperbolic data for fast pairwise distances.
struct PathData {
    std::vector<double> ch, sh;  // cosh(alpha rho), sinh(alpha rho)
    std::vector<Vec> sigma;
    double sup_rho = 0.0;
};

inline PathData prepare(const PathSample& path, double alpha) {
    PathData pd;
    size_t n = path.rho.size();
    pd.ch.resize(n);
    pd.sh.resize(n);
    pd.sigma = path.sigma;
    for (size_t s = 0; s < n; ++s) {
        double ar = alpha * path.rho[s];
        pd.ch[s] = std::cosh(ar);
        pd.sh[s] = std::sinh(ar);
        pd.sup_rho = std::max(pd.sup_rho, path.rho[s]);
    }
    return pd;
}

inline double pair_distance(const PathData& a, size_t u, const PathData& b, size_t v,
                            double alpha) {
    double c = a.ch[u] * b.ch[v] - a.sh[u] * b.sh[v] * a.sigma[u].dot(b.sigma[v]);
    return detail::acosh_stable(std::max(c, 1.0)) / alpha;
}

// Trapezoid weight on a uniform grid of n_steps intervals.
inline double trap_w(size_t s, size_t n_steps) {
    return (s == 0 || s == n_steps) ? 0.5 : 1.0;
}

}  // namespace detail_mom

// (1/2) sum_{i,j} int_0^T int_0^T Q(d(W^i_u, W^j_v)) du dv by the trapezoid
// rule over the first n_steps intervals of each prepared path.
inline double pairwise_exponent(const std::vector<detail_mom::PathData>& paths,
                                const CovarianceProfile& Q, size_t n_steps, double dt,
                                double alpha) {
    const size_t p = paths.size();
    double total = 0.0;
    for (size_t i = 0; i < p; ++i)
        for (size_t j = i; j < p; ++j) {
            double s = 0.0;
            for (size_t u = 0; u <= n_steps; ++u) {
                double wu = detail_mom::trap_w(u, n_steps);
                for (size_t v = 0; v <= n_steps; ++v) {
                    double d = detail_mom::pair_distance(paths[i], u, paths[j], v, alpha);
                    s += wu * detail_mom::trap_w(v, n_steps) * Q.Q(d);
                }
            }
            total += (i == j ? 1.0 : 2.0) * s;  // symmetric off-diagonal blocks
        }
    return 0.5 * total * dt * dt;
}

namespace detail_mom {

inline void aggregate(const std::vector<double>& X, long n_total, double exponent_cap,
                      MomentEstimate& est) {
    est.n_survived = long(X.size());
    if (X.empty()) {
        est.zero_hits = true;
        est.log_moment = std::log(3.0 / double(n_total)) + exponent_cap;
        est.std_error = std::numeric_limits<double>::infinity();
        return;
    }
    double lse = detail::logsumexp(X);
    est.log_moment = lse - std::log(double(n_total));
    // jackknife over all replicates (killed replicates contribute zero mass)
    long n = n_total;
    if (n < 2 || X.size() < 2) {
        est.std_error = std::numeric_limits<double>::infinity();
        return;
    }
    double mx = *std::max_element(X.begin(), X.end());
    double S = 0.0;
    for (double x : X) S += std::exp(x - mx);
    std::vector<double> loo;
    loo.reserve(n);
    for (double x : X) {
        double rem = S - std::exp(x - mx);
        loo.push_back(rem > 0.0 ? mx + std::log(rem) - std::log(double(n - 1))
                                : -std::numeric_limits<double>::infinity());
    }
    for (long i = long(X.size()); i < n; ++i)
        loo.push_back(mx + std::log(S) - std::log(double(n - 1)));
    double mean = 0.0;
    for (double v : loo) mean += v;
    mean /= double(n);
    double var = 0.0;
    for (double v : loo) var += detail::sqr(v - mean);
    est.std_error = std::sqrt(var * double(n - 1) / double(n));
}

}  // namespace detail_mom

// Annealed p-th moment at horizon t, optionally localized to the ball of
// radius R about the starting point o.
inline MomentEstimate annealed_moment(int p, double t, double R, const CovarianceProfile& Q,
                                      const McParams& mc) {
    if (p < 1 || t < 0.0) throw std::invalid_argument("annealed_moment: bad p or t");
    long n_steps = std::lround(t / mc.dt);
    if (n_steps > 4000)
        throw std::invalid_argument("annealed_moment: t/dt exceeds the 4000-step cap");
    MetricParams params(mc.d, mc.alpha);
    PolarPoint start(0.0, [&] {
        Vec e = Vec::Zero(mc.d);
        e[0] = 1.0;
        return e;
    }());
    MomentEstimate est;
    est.p = p;
    est.t = t;
    est.R = R;
    est.dt = mc.dt;
    est.seed = mc.seed;
    est.n_paths = mc.n_replicates;
    est.convention = mc.convention;
    std::vector<double> X;
    for (long rep = 0; rep < mc.n_replicates; ++rep) {
        std::vector<detail_mom::PathData> paths;
        bool alive = true;
        for (int i = 0; i < p; ++i) {
            PathSample ps = simulate_bm(start, params, t, mc.dt, mc.convention,
                                        mc.seed + std::uint64_t(rep) * std::uint64_t(p) + i);
            detail_mom::PathData pd = detail_mom::prepare(ps, mc.alpha);
            if (R > 0.0 && pd.sup_rho > R) alive = false;
            paths.push_back(std::move(pd));
        }
        if (!alive) continue;
        X.push_back(pairwise_exponent(paths, Q, size_t(n_steps), mc.dt, mc.alpha));
    }
    double cap = 0.5 * detail::sqr(double(p)) * Q.Q(0.0) * t * t;
    detail_mom::aggregate(X, mc.n_replicates, cap, est);
    return est;
}

// Moments at several horizons from one batch of paths (nested prefixes):
// the same replicate enters every horizon, so differences and orderings are
// estimated with common random numbers.
inline std::vector<MomentEstimate> prefix_moments(int p, const std::vector<double>& t_grid,
                                                  double R, const CovarianceProfile& Q,
                                                  const McParams& mc) {
    if (t_grid.empty()) throw std::invalid_argument("prefix_moments: empty horizon grid");
    for (size_t i = 1; i < t_grid.size(); ++i)
        if (t_grid[i] <= t_grid[i - 1])
            throw std::invalid_argument("prefix_moments: horizons must increase");
    double t_max = t_grid.back();
    long n_max = std::lround(t_max / mc.dt);
    if (n_max > 4000)
        throw std::invalid_argument("prefix_moments: t/dt exceeds the 4000-step cap");
    MetricParams params(mc.d, mc.alpha);
    PolarPoint start(0.0, [&] {
        Vec e = Vec::Zero(mc.d);
        e[0] = 1.0;
        return e;
    }());
    std::vector<std::vector<double>> X(t_grid.size());
    for (long rep = 0; rep < mc.n_replicates; ++rep) {
        std::vector<detail_mom::PathData> paths;
        for (int i = 0; i < p; ++i)
            paths.push_back(detail_mom::prepare(
                simulate_bm(start, params, t_max, mc.dt, mc.convention,
                            mc.seed + std::uint64_t(rep) * std::uint64_t(p) + i),
                mc.alpha));
        for (size_t g = 0; g < t_grid.size(); ++g) {
            size_t n_steps = size_t(std::lround(t_grid[g] / mc.dt));
            if (R > 0.0) {
                double sup = 0.0;
                for (const auto& pd : paths)
                    for (size_t s = 0; s <= n_steps; ++s)
                        sup = std::max(sup, std::acosh(std::max(pd.ch[s], 1.0)) / mc.alpha);
                if (sup > R) continue;
            }
            X[g].push_back(pairwise_exponent(paths, Q, n_steps, mc.dt, mc.alpha));
        }
    }
    std::vector<MomentEstimate> out;
    for (size_t g = 0; g < t_grid.size(); ++g) {
        MomentEstimate est;
        est.p = p;
        est.t = t_grid[g];
        est.R = R;
        est.dt = mc.dt;
        est.seed = mc.seed;
        est.n_paths = mc.n_replicates;
        est.convention = mc.convention;
        double cap = 0.5 * detail::sqr(double(p)) * Q.Q(0.0) * detail::sqr(t_grid[g]);
        detail_mom::aggregate(X[g], mc.n_replicates, cap, est);
        out.push_back(est);
    }
    return out;
}

struct RatioPoint {
    double t = 0.0;
    double value = 0.0;
    double std_error = 0.0;
    double log_moment = 0.0;
};

// (t, log m_p(t) / H(pt)): the first-order normalization, expected to
// approach 1 from below.
inline std::vector<RatioPoint> first_order_ratio_curve(int p, const std::vector<double>& t_grid,
                                                       const CovarianceProfile& Q,
                                                       const McParams& mc) {
    std::vector<MomentEstimate> ests = prefix_moments(p, t_grid, 0.0, Q, mc);
    std::vector<RatioPoint> curve;
    for (const auto& e : ests) {
        double H = 0.5 * Q.Q(0.0) * detail::sqr(double(p) * e.t);
        RatioPoint pt;
        pt.t = e.t;
        pt.log_moment = e.log_moment;
        pt.value = e.log_moment / H;
        pt.std_error = e.std_error / H;
        curve.push_back(pt);
    }
    return curve;
}

// (t, [log m_p(t) - H(pt)] / beta(pt)): the second-order probe, compared
// qualitatively against -chi.
inline std::vector<RatioPoint> second_order_probe(int p, const std::vector<double>& t_grid,
                                                  const CovarianceProfile& Q,
                                                  const McParams& mc) {
    std::vector<MomentEstimate> ests = prefix_moments(p, t_grid, 0.0, Q, mc);
    std::vector<RatioPoint> curve;
    for (const auto& e : ests) {
        double pt_ = double(p) * e.t;
        double H = 0.5 * Q.Q(0.0) * pt_ * pt_;
        double beta = std::pow(pt_, 1.5);
        RatioPoint pt;
        pt.t = e.t;
        pt.log_moment = e.log_moment;
        pt.value = (e.log_moment - H) / beta;
        pt.std_error = e.std_error / beta;
        curve.push_back(pt);
    }
    return curve;
}

struct GapEstimate {
    double gap = 0.0;  // (1/p) log m_p - (1/q) log m_q
    double std_error = 0.0;
    MomentEstimate mp, mq;
};

// Intermittency diagnostic (1/p) log m_p(t) - (1/q) log m_q(t); positive and
// growing under intermittency.
inline GapEstimate intermittency_gap(int p, int q, double t, const CovarianceProfile& Q,
                                     const McParams& mc) {
    if (p <= q || q < 1) throw std::invalid_argument("intermittency_gap: need p > q >= 1");
    GapEstimate g;
    g.mp = annealed_moment(p, t, 0.0, Q, mc);
    McParams mc_q = mc;
    mc_q.seed = mc.seed + 0x9e3779b97f4a7c15ull;  // independent replica block
    g.mq = annealed_moment(q, t, 0.0, Q, mc_q);
    g.gap = g.mp.log_moment / p - g.mq.log_moment / q;
    g.std_error = std::sqrt(detail::sqr(g.mp.std_error / p) + detail::sqr(g.mq.std_error / q));
    return g;
}

struct PointwiseAverageReport {
    double t = 0.0;
    double R = 0.0;
    double lhs = 0.0;            // <u_R(t, o)>
    double integral = 0.0;       // <(u_R(t, .), 1)>
    double volume = 0.0;         // |Q_R|
    double tail = 0.0;           // e^{-1} e^{H(t+1)}
    double minimal_C = 0.0;      // smallest C making the comparison hold
    std::vector<double> radial_estimates;  // <u_R(t, x)> per stratum
};

// Pointwise-to-average comparison: the smallest C with
//   <u_R(t,o)> <= C (2+R)^{1/2} ( <(u_R(t,.),1)> + |Q_R| ) + e^{-1} e^{H(t+1)}.
// The spatial integral uses radially stratified start points (the annealed
// localized moment is radial in the start point) with volume-form weights.
inline PointwiseAverageReport pointwise_vs_average_check(double t, double R,
                                                         const CovarianceProfile& Q,
                                                         const McParams& mc, int n_strata = 6) {
    if (R <= 0.0) throw std::invalid_argument("pointwise_vs_average_check: need R > 0");
    MetricParams params(mc.d, mc.alpha);
    PointwiseAverageReport rep;
    rep.t = t;
    rep.R = R;
    rep.volume = volume_ball(R, params);
    rep.tail = std::exp(-1.0) * std::exp(0.5 * Q.Q(0.0) * detail::sqr(t + 1.0));

    long n_steps = std::lround(t / mc.dt);
    if (n_steps > 4000)
        throw std::invalid_argument("pointwise_vs_average_check: t/dt exceeds the step cap");
    Vec e1 = Vec::Zero(mc.d);
    e1[0] = 1.0;
    double omega = detail::sphere_area(mc.d - 1);
    double h = R / n_strata;
    double integral = 0.0;
    for (int s = 0; s < n_strata; ++s) {
        double rho0 = (s + 0.5) * h;
        PolarPoint start(rho0, e1);
        std::vector<double> X;
        for (long rep_i = 0; rep_i < mc.n_replicates; ++rep_i) {
            PathSample ps =
                simulate_bm(start, params, t, mc.dt, mc.convention,
                            mc.seed + 0x51ed2701ull * std::uint64_t(s + 1) + std::uint64_t(rep_i));
            detail_mom::PathData pd = detail_mom::prepare(ps, mc.alpha);
            if (pd.sup_rho > R) continue;
            std::vector<detail_mom::PathData> one;
            one.push_back(std::move(pd));
            X.push_back(pairwise_exponent(one, Q, size_t(n_steps), mc.dt, mc.alpha));
        }
        double mean = 0.0;
        if (!X.empty()) {
            double lse = detail::logsumexp(X);
            mean = std::exp(lse - std::log(double(mc.n_replicates)));
        }
        rep.radial_estimates.push_back(mean);
        integral += mean * omega * params.radial_weight(rho0) * h;
    }
    rep.integral = integral;
    MomentEstimate at_o = annealed_moment(1, t, R, Q, mc);
    rep.lhs = std::exp(at_o.log_moment);
    double denom = std::sqrt(2.0 + R) * (rep.integral + rep.volume);
    rep.minimal_C = std::max(0.0, (rep.lhs - rep.tail) / denom);
    return rep;
}

}  // namespace hypam
