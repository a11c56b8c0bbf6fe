#pragma once

// Brownian motion on (Sigma, g^t) in geodesic polar coordinates (generator
// normalization: the process is generated by the full Laplacian, so the
// radial SDE carries a sqrt(2) diffusion coefficient), occupation measures,
// exit probabilities and hyperbolic heat-kernel formulas and bounds.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "hypam/field.hpp"
#include "hypam/geometry.hpp"

namespace hypam {

// The printed polar Laplacian carries a coth drift with coefficient 1; the
// Laplace-Beltrami operator on H^d has coefficient d-1. Both are exposed and
// every experiment records which was used.
enum class DriftConvention { paper, riemannian };

inline double drift_coefficient(DriftConvention c, int d) {
    return c == DriftConvention::paper ? 1.0 : double(d - 1);
}

inline const char* convention_name(DriftConvention c) {
    return c == DriftConvention::paper ? "paper" : "riemannian";
}

// alpha coth(alpha rho), continuous through alpha = 0 where it is 1/rho.
inline double coth_drift(double alpha, double rho) {
    if (alpha == 0.0) return 1.0 / rho;
    return alpha / std::tanh(alpha * rho);
}

// alpha^2 sinh^{-2}(alpha rho): instantaneous angular rate coefficient.
inline double angular_rate(double alpha, double rho) {
    if (alpha == 0.0) return 1.0 / (rho * rho);
    return 1.0 / detail::sqr(rho * detail::sinhc(alpha * rho));
}

struct PathSample {
    double dt = 0.0;
    double alpha = 0.0;
    int d = 2;
    DriftConvention convention = DriftConvention::riemannian;
    std::vector<double> rho;
    std::vector<Vec> sigma;
    long clamped_steps = 0;  // drift-step clamps near the coth singularity

    double duration() const { return dt * double(rho.size() - 1); }
};

namespace detail_bm {
// One Euler-Maruyama step of the radial SDE
//   d rho = sqrt(2) dB + c alpha coth(alpha rho) ds,  reflected at 0.
inline double radial_step(double rho, double c, double alpha, double dt, double sqrt2dt,
                          double z, long& clamped) {
    double drift = rho > 0.0 ? c * coth_drift(alpha, rho) * dt : 0.0;
    double cap = 10.0 * sqrt2dt;
    if (drift > cap) {
        drift = cap;
        ++clamped;
    }
    return std::abs(rho + drift + sqrt2dt * z);
}
}  // namespace detail_bm

// Euler-Maruyama simulation of Brownian motion on (Sigma, g^t) started at a
// polar point. Angular component: tangent-space Gaussian step of variance
// 2 alpha^2 sinh^{-2}(alpha rho) dt per direction, projected back to the
// sphere. Reflecting behavior |rho| at the coordinate singularity rho = 0.
inline PathSample simulate_bm(const PolarPoint& start, const MetricParams& params,
                              double duration, double dt, DriftConvention convention,
                              std::uint64_t seed) {
    if (duration < 0.0 || dt <= 0.0)
        throw std::invalid_argument("simulate_bm: bad duration/dt");
    PathSample path;
    path.dt = dt;
    path.alpha = params.alpha;
    path.d = params.d;
    path.convention = convention;
    long n_steps = std::lround(duration / dt);
    if (duration > 0.0 && n_steps < 10)
        throw std::invalid_argument("simulate_bm: need dt <= duration/10");
    path.rho.reserve(n_steps + 1);
    path.sigma.reserve(n_steps + 1);
    path.rho.push_back(start.rho);
    path.sigma.push_back(start.sigma);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    const double c = drift_coefficient(convention, params.d);
    const double sqrt2dt = std::sqrt(2.0 * dt);
    const int d = params.d;
    double rho = start.rho;
    Vec sigma = start.sigma;
    for (long s = 0; s < n_steps; ++s) {
        double rho_new =
            detail_bm::radial_step(rho, c, params.alpha, dt, sqrt2dt, gauss(rng), path.clamped_steps);
        if (d >= 2) {
            double rate = rho > 1e-10 ? angular_rate(params.alpha, rho) : 0.0;
            double step = std::sqrt(2.0 * rate * dt);
            if (step > 0.0) {
                Vec g(d);
                for (int i = 0; i < d; ++i) g[i] = gauss(rng);
                g -= g.dot(sigma) * sigma;
                sigma = (sigma + step * g).normalized();
            }
        }
        rho = rho_new;
        path.rho.push_back(rho);
        path.sigma.push_back(sigma);
    }
    return path;
}

// Radial-only simulation; the radial component is itself Markov, which makes
// exit-time and radial-density studies much cheaper.
inline std::vector<double> simulate_radial(double rho0, const MetricParams& params,
                                           double duration, double dt,
                                           DriftConvention convention, std::uint64_t seed) {
    long n_steps = std::lround(duration / dt);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    const double c = drift_coefficient(convention, params.d);
    const double sqrt2dt = std::sqrt(2.0 * dt);
    std::vector<double> rho(n_steps + 1);
    rho[0] = rho0;
    long clamped = 0;
    for (long s = 0; s < n_steps; ++s)
        rho[s + 1] = detail_bm::radial_step(rho[s], c, params.alpha, dt, sqrt2dt, gauss(rng), clamped);
    return rho;
}

// Occupation time measure on radial (x optional angular, d = 2) bins,
// normalized by elapsed time.
struct OccupationBins {
    double R = 0.0;       // radial extent
    int n_radial = 0;
    int n_angular = 1;    // d = 2 only; 1 = radial marginal
};

struct OccupationMeasure {
    DiscreteMeasure measure;  // atoms at bin centers
    OccupationBins bins;
    double total_time = 0.0;
};

inline OccupationMeasure occupation_measure(const PathSample& path, const OccupationBins& bins) {
    if (path.rho.empty()) throw std::invalid_argument("occupation_measure: empty path");
    if (bins.n_radial <= 0 || bins.R <= 0.0)
        throw std::invalid_argument("occupation_measure: bad bins");
    int n_cells = bins.n_radial * bins.n_angular;
    std::vector<double> mass(n_cells, 0.0);
    double dr = bins.R / bins.n_radial;
    double dtheta = 2.0 * std::numbers::pi / bins.n_angular;
    for (size_t s = 0; s < path.rho.size(); ++s) {
        int ir = std::min(int(path.rho[s] / dr), bins.n_radial - 1);
        int it = 0;
        if (bins.n_angular > 1) {
            double theta = std::atan2(path.sigma[s][1], path.sigma[s][0]);
            if (theta < 0.0) theta += 2.0 * std::numbers::pi;
            it = std::min(int(theta / dtheta), bins.n_angular - 1);
        }
        mass[ir * bins.n_angular + it] += 1.0;
    }
    OccupationMeasure occ;
    occ.bins = bins;
    occ.total_time = path.duration();
    occ.measure.support_radius = bins.R;
    for (int ir = 0; ir < bins.n_radial; ++ir) {
        for (int it = 0; it < bins.n_angular; ++it) {
            double rho_c = (ir + 0.5) * dr;
            double theta_c = (it + 0.5) * dtheta;
            Vec sig(2);
            sig << std::cos(theta_c), std::sin(theta_c);
            occ.measure.atoms.emplace_back(rho_c, sig);
            occ.measure.weights.push_back(mass[ir * bins.n_angular + it] /
                                          double(path.rho.size()));
        }
    }
    occ.measure.validate();
    return occ;
}

// Deterministic caller-partitioned parallelism for independent paths: each
// path has its own seed, so the work can be chunked across threads. The
// callback receives (path index, worker index); callers keep per-worker
// tallies and sum them in worker order, which is bit-identical for integer
// counts regardless of the worker count.
template <class Fn>
inline void for_each_path(long n_paths, int workers, Fn&& fn) {
    workers = std::max(1, workers);
    if (workers == 1) {
        for (long p = 0; p < n_paths; ++p) fn(p, 0);
        return;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        long lo = n_paths * w / workers, hi = n_paths * (w + 1) / workers;
        pool.emplace_back([lo, hi, w, &fn] {
            for (long p = lo; p < hi; ++p) fn(p, w);
        });
    }
    for (auto& th : pool) th.join();
}

struct ExitEstimate {
    double probability = 0.0;
    double std_error = 0.0;
    long hits = 0;
    long n_paths = 0;
    bool zero_hits = false;  // probability then reports the 95% upper bound
};

// Monte Carlo estimate of P(tau_R <= t) for the radial process started at o,
// with a Brownian-bridge crossing correction per step (removes the sqrt(dt)
// barrier bias of discrete monitoring).
inline ExitEstimate exit_probability(double R, double t, long n_paths,
                                     const MetricParams& params, DriftConvention convention,
                                     std::uint64_t seed, double dt = 1e-3, int workers = 1) {
    if (R <= 0.0 || t <= 0.0 || n_paths <= 0)
        throw std::invalid_argument("exit_probability: bad parameters");
    long n_steps = std::lround(t / dt);
    const double c = drift_coefficient(convention, params.d);
    const double sqrt2dt = std::sqrt(2.0 * dt);
    std::vector<long> hits_w(std::max(1, workers), 0);
    for_each_path(n_paths, workers, [&](long p, int w) {
        std::mt19937_64 rng(seed + std::uint64_t(p));
        std::normal_distribution<double> gauss;
        std::uniform_real_distribution<double> unif;
        double rho = 0.0;
        long clamped = 0;
        for (long s = 0; s < n_steps; ++s) {
            double next =
                detail_bm::radial_step(rho, c, params.alpha, dt, sqrt2dt, gauss(rng), clamped);
            if (next >= R) {
                ++hits_w[w];
                break;
            }
            // bridge crossing probability for diffusion coefficient 2
            double b = std::exp(-(R - rho) * (R - next) / dt);
            if (unif(rng) < b) {
                ++hits_w[w];
                break;
            }
            rho = next;
        }
    });
    long hits = 0;
    for (long h : hits_w) hits += h;
    ExitEstimate est;
    est.hits = hits;
    est.n_paths = n_paths;
    if (hits == 0) {
        est.zero_hits = true;
        est.probability = 3.0 / double(n_paths);  // rule-of-three upper bound
        est.std_error = est.probability;
    } else {
        double p = double(hits) / double(n_paths);
        est.probability = p;
        est.std_error = std::sqrt(p * (1.0 - p) / double(n_paths));
    }
    return est;
}

// Survival probabilities P(tau_R > t) at several horizons from one batch of
// paths; used for the exit-rate cross-check against the principal eigenvalue.
inline std::vector<ExitEstimate> survival_curve(double R, const std::vector<double>& horizons,
                                                long n_paths, const MetricParams& params,
                                                DriftConvention convention, std::uint64_t seed,
                                                double dt = 1e-3, int workers = 1) {
    double t_max = 0.0;
    for (double t : horizons) t_max = std::max(t_max, t);
    long n_steps = std::lround(t_max / dt);
    const double c = drift_coefficient(convention, params.d);
    const double sqrt2dt = std::sqrt(2.0 * dt);
    std::vector<std::vector<long>> alive_w(std::max(1, workers),
                                           std::vector<long>(horizons.size(), 0));
    for_each_path(n_paths, workers, [&](long p, int w) {
        std::mt19937_64 rng(seed + std::uint64_t(p));
        std::normal_distribution<double> gauss;
        std::uniform_real_distribution<double> unif;
        double rho = 0.0;
        long clamped = 0;
        long s = 0;
        bool exited = false;
        for (; s < n_steps && !exited; ++s) {
            double next =
                detail_bm::radial_step(rho, c, params.alpha, dt, sqrt2dt, gauss(rng), clamped);
            if (next >= R || unif(rng) < std::exp(-(R - rho) * (R - next) / dt))
                exited = true;
            rho = next;
        }
        double t_exit = exited ? double(s) * dt : t_max + dt;
        for (size_t k = 0; k < horizons.size(); ++k)
            if (t_exit > horizons[k]) ++alive_w[w][k];
    });
    std::vector<long> alive_at(horizons.size(), 0);
    for (const auto& a : alive_w)
        for (size_t k = 0; k < horizons.size(); ++k) alive_at[k] += a[k];
    std::vector<ExitEstimate> out(horizons.size());
    for (size_t k = 0; k < horizons.size(); ++k) {
        out[k].hits = alive_at[k];
        out[k].n_paths = n_paths;
        double p = double(alive_at[k]) / double(n_paths);
        if (alive_at[k] == 0) {
            out[k].zero_hits = true;
            out[k].probability = 3.0 / double(n_paths);
            out[k].std_error = out[k].probability;
        } else {
            out[k].probability = p;
            out[k].std_error = std::sqrt(p * (1.0 - p) / double(n_paths));
        }
    }
    return out;
}

// Heat-kernel upper bound with curvature parameter kappa >= 0:
//   C_d s^{-d/2} exp(-(d-1)^2 kappa s/4 - rho^2/(4s) - (d-1) sqrt(kappa) rho/2)
//     * (1 + sqrt(kappa) rho + kappa s)^{(d-3)/2} (1 + sqrt(kappa) rho)
inline double dm_upper_bound(double s, double rho, double kappa, int d, double C_d) {
    if (s <= 0.0 || rho < 0.0 || kappa < 0.0)
        throw std::invalid_argument("dm_upper_bound: bad parameters");
    double sk = std::sqrt(kappa);
    double e = -detail::sqr(double(d - 1)) * kappa * s / 4.0 - rho * rho / (4.0 * s) -
               double(d - 1) * sk * rho / 2.0;
    return C_d * std::pow(s, -0.5 * d) * std::exp(e) *
           std::pow(1.0 + sk * rho + kappa * s, 0.5 * (d - 3)) * (1.0 + sk * rho);
}

// Closed-form heat kernel on H^3 (curvature -1, generator the Laplacian):
//   p_1(t, rho) = (4 pi t)^{-3/2} (rho / sinh rho) exp(-t - rho^2/(4t)).
inline double heat_kernel_h3(double t, double rho) {
    return std::pow(4.0 * std::numbers::pi * t, -1.5) / detail::sinhc(rho) *
           std::exp(-t - rho * rho / (4.0 * t));
}

struct HeatKernelScalingReport {
    std::vector<double> grid;        // radial bin centers
    std::vector<double> estimated;   // KDE estimate of p_kappa(s, .)
    std::vector<double> reference;   // kappa^{d/2} p_1(kappa s, sqrt(kappa) .)
    double sup_discrepancy = 0.0;
    double tolerance = 0.0;          // 3 x (statistical + binning) error
    bool pass = false;
    long n_paths = 0;
};

// Compares a histogram density estimate of p_kappa(s, .) on H^3 against the
// scaled closed-form kernel. d = 3 only (that is where the exact kernel is
// available).
inline HeatKernelScalingReport heat_kernel_scaling_check(double s, double kappa, long n_paths,
                                                         std::uint64_t seed, double dt = 1e-3,
                                                         double rho_max = 0.0, int n_bins = 60,
                                                         int workers = 1) {
    if (kappa <= 0.0) throw std::invalid_argument("heat_kernel_scaling_check: kappa must be > 0");
    const int d = 3;
    MetricParams params(d, std::sqrt(kappa));
    if (rho_max <= 0.0) rho_max = 3.0 * std::sqrt(2.0 * d * s) + 4.0 * kappa * s / std::sqrt(kappa);
    long n_steps = std::lround(s / dt);
    const double c = drift_coefficient(DriftConvention::riemannian, d);
    const double sqrt2dt = std::sqrt(2.0 * dt);
    std::vector<std::vector<long>> counts_w(std::max(1, workers), std::vector<long>(n_bins, 0));
    double dr = rho_max / n_bins;
    for_each_path(n_paths, workers, [&](long p, int w) {
        std::mt19937_64 rng(seed + std::uint64_t(p));
        std::normal_distribution<double> gauss;
        double rho = 0.0;
        long clamped = 0;
        for (long k = 0; k < n_steps; ++k)
            rho = detail_bm::radial_step(rho, c, params.alpha, dt, sqrt2dt, gauss(rng), clamped);
        if (rho < rho_max) ++counts_w[w][int(rho / dr)];
    });
    std::vector<long> counts(n_bins, 0);
    for (const auto& cw : counts_w)
        for (int b = 0; b < n_bins; ++b) counts[b] += cw[b];
    HeatKernelScalingReport rep;
    rep.n_paths = n_paths;
    double omega2 = detail::sphere_area(2);
    double stat_err = 0.0, bin_err = 0.0;
    for (int b = 0; b < n_bins; ++b) {
        double rho = (b + 0.5) * dr;
        double area = omega2 * detail::sqr(rho * detail::sinhc(params.alpha * rho));
        double q_hat = double(counts[b]) / (double(n_paths) * dr);
        double p_hat = q_hat / area;
        double ref = std::pow(kappa, 1.5) * heat_kernel_h3(kappa * s, std::sqrt(kappa) * rho);
        rep.grid.push_back(rho);
        rep.estimated.push_back(p_hat);
        rep.reference.push_back(ref);
        rep.sup_discrepancy = std::max(rep.sup_discrepancy, std::abs(p_hat - ref));
        stat_err = std::max(stat_err, std::sqrt(std::max(q_hat, 1.0 / (double(n_paths) * dr)) /
                                                (double(n_paths) * dr)) /
                                          area);
        // midpoint-rule binning bias ~ p'' dr^2 / 24, estimated from the reference
        if (b > 0 && b + 1 < n_bins) {
            double refm = std::pow(kappa, 1.5) * heat_kernel_h3(kappa * s, std::sqrt(kappa) * (rho - dr));
            double refp = std::pow(kappa, 1.5) * heat_kernel_h3(kappa * s, std::sqrt(kappa) * (rho + dr));
            bin_err = std::max(bin_err, std::abs(refp - 2.0 * ref + refm) / 24.0);
        }
    }
    rep.tolerance = 3.0 * (stat_err + bin_err);
    rep.pass = rep.sup_discrepancy <= rep.tolerance;
    return rep;
}

// Smallest constant C_d for which dm_upper_bound dominates a set of
// (s, rho, value) kernel samples.
inline double fit_dm_constant(const std::vector<double>& s_values, const std::vector<double>& rho_grid,
                              double kappa, int d) {
    double c = 0.0;
    for (double s : s_values)
        for (double rho : rho_grid) {
            double ref = std::pow(kappa, 0.5 * d) *
                         heat_kernel_h3(kappa * s, std::sqrt(kappa) * rho);
            double bound1 = dm_upper_bound(s, rho, kappa, d, 1.0);
            if (bound1 > 0.0) c = std::max(c, ref / bound1);
        }
    return c;
}

}  // namespace hypam
