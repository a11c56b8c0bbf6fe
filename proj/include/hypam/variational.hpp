#pragma once

// The Euclidean Donsker-Varadhan functional S_eu, the quadratic-kernel
// energy J on densities, the fluctuation exponent chi via projected
// gradient descent on the square-root density, and the Legendre-duality
// consistency check S_eu(mu) >= int f dmu + lambda_0^{eu;f,R}.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "hypam/spectral.hpp"

namespace hypam {

// Nonnegative grid function phi on a Euclidean (alpha = 0) grid with
// int phi^2 dx = 1 under the grid quadrature; dnu = phi^2 dx.
struct DensityProfile {
    Grid grid;
    Vec phi;

    void validate() const {
        if (grid.params.alpha != 0.0)
            throw std::invalid_argument("DensityProfile: grid must be Euclidean");
        if (phi.size() != grid.size())
            throw std::invalid_argument("DensityProfile: phi/grid size mismatch");
        double norm = 0.0;
        for (int i = 0; i < phi.size(); ++i) {
            if (phi[i] < -1e-12)
                throw std::invalid_argument("DensityProfile: phi must be nonnegative");
            norm += phi[i] * phi[i] * grid.weight[i];
        }
        if (std::abs(norm - 1.0) > 1e-10)
            throw std::invalid_argument("DensityProfile: phi^2 must integrate to 1");
    }

    // symmetrized coordinates psi = sqrt(weight) phi, unit Euclidean norm
    Vec psi() const {
        Vec out(phi.size());
        for (int i = 0; i < phi.size(); ++i) out[i] = phi[i] * std::sqrt(grid.weight[i]);
        return out;
    }
};

inline DensityProfile make_profile(const Grid& grid, const Vec& phi_unnormalized) {
    DensityProfile p;
    p.grid = grid;
    p.phi = phi_unnormalized;
    double norm = 0.0;
    for (int i = 0; i < p.phi.size(); ++i)
        norm += p.phi[i] * p.phi[i] * grid.weight[i];
    if (norm <= 0.0) throw std::invalid_argument("make_profile: zero density");
    p.phi /= std::sqrt(norm);
    p.validate();
    return p;
}

// Dirichlet energy int |grad phi|^2 dx with the same discretization as the
// spectral solver: psi^T A psi for A the assembled -Delta.
inline double s_eu(const DensityProfile& profile) {
    profile.validate();
    SpMat A = assemble(profile.grid, Vec());
    Vec psi = profile.psi();
    return psi.dot(A * psi);
}

// J(nu) = -(Q''(0)/4) int int |z-w|^2 dnu dnu = (gamma/2) * sum_i Var_i(nu),
// via first and second moments. Radial grids carry a centered nu, so the
// mean vanishes by symmetry and sum_i Var_i = int rho^2 dnu.
inline double j_of_density(const DensityProfile& profile, double qpp0) {
    profile.validate();
    if (qpp0 > 0.0) throw std::invalid_argument("j_of_density: Q''(0) must be <= 0");
    double gamma = -qpp0;
    double m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < profile.phi.size(); ++i) {
        double mass = profile.phi[i] * profile.phi[i] * profile.grid.weight[i];
        double x = profile.grid.rho[i];
        m2 += x * x * mass;
        if (profile.grid.kind == GridKind::interval1d) m1 += x * mass;
    }
    return 0.5 * gamma * (m2 - m1 * m1);
}

struct ChiResult {
    double value = 0.0;    // chi_R for the requested dimension
    double chi_1d = 0.0;   // the underlying one-dimensional value
    DensityProfile profile;  // optimal one-dimensional marginal
    bool converged = false;
    int iterations = 0;
};

namespace detail_var {

// Projected gradient descent (Barzilai-Borwein steps, sphere retraction,
// absolute-value clamp for nonnegativity) for
//   F(psi) = psi^T A psi + (gamma/2)(m2(psi) - m1(psi)^2),  |psi| = 1.
// The clamp never increases F: the off-diagonal entries of A are
// nonpositive and the J term depends on psi^2 only.
inline double minimize_1d(const SpMat& A, const Vec& x, double gamma, Vec& psi, int max_iter,
                          int& iters, bool& converged) {
    auto energy = [&](const Vec& v, double& m1_out) {
        double m1 = 0.0, m2 = 0.0;
        for (int i = 0; i < v.size(); ++i) {
            double mass = v[i] * v[i];
            m1 += x[i] * mass;
            m2 += x[i] * x[i] * mass;
        }
        m1_out = m1;
        return v.dot(A * v) + 0.5 * gamma * (m2 - m1 * m1);
    };
    auto gradient = [&](const Vec& v, double m1) {
        Vec g = 2.0 * (A * v);
        for (int i = 0; i < v.size(); ++i)
            g[i] += gamma * (x[i] * x[i] - 2.0 * m1 * x[i]) * v[i];
        return g;
    };
    psi = psi.cwiseAbs();
    psi.normalize();
    double m1;
    double f = energy(psi, m1);
    Vec g = gradient(psi, m1);
    g -= g.dot(psi) * psi;  // tangent projection
    double step = 1.0 / std::max(1.0, g.norm());
    Vec psi_prev = psi, g_prev = g;
    converged = false;
    int stall = 0;
    for (iters = 0; iters < max_iter; ++iters) {
        Vec trial = (psi - step * g).cwiseAbs();
        double tn = trial.norm();
        if (tn <= 0.0) {
            step *= 0.5;
            continue;
        }
        trial /= tn;
        double m1_t;
        double f_t = energy(trial, m1_t);
        if (f_t > f + 1e-14 * std::abs(f)) {
            step *= 0.5;
            if (step < 1e-18) break;
            continue;
        }
        Vec g_t = gradient(trial, m1_t);
        g_t -= g_t.dot(trial) * trial;
        // Barzilai-Borwein step from the accepted move
        Vec s = trial - psi, y = g_t - g;
        double sy = s.dot(y);
        step = sy > 1e-30 ? s.squaredNorm() / sy : step * 2.0;
        if (std::abs(f - f_t) <= 1e-13 * std::max(1.0, std::abs(f)))
            ++stall;
        else
            stall = 0;
        psi = trial;
        f = f_t;
        g = g_t;
        if (stall >= 30 && g.norm() < 1e-8 * std::max(1.0, std::abs(f))) {
            converged = true;
            break;
        }
    }
    return f;
}

}  // namespace detail_var

// chi_R = inf { J(nu) + S_eu(phi) } over densities on the interval [-R, R].
// The functional is product-separable across coordinates (J is a sum of
// per-coordinate variances, S_eu adds over factors), so the d-dimensional
// value is d times the one-dimensional one. Multi-start: the analytic
// Gaussian ansatz s^2 = 1/sqrt(2 gamma) first, then random positive starts.
inline ChiResult chi_optimize(double qpp0, int d, double R, int n_nodes, std::uint64_t seed,
                              int n_starts = 4, int max_iter = 200000) {
    if (qpp0 >= 0.0) throw std::invalid_argument("chi_optimize: need Q''(0) < 0");
    if (d < 1 || R <= 0.0 || n_nodes < 16) throw std::invalid_argument("chi_optimize: bad inputs");
    double gamma = -qpp0;
    Grid grid = make_interval_grid(R, n_nodes);
    SpMat A = assemble(grid, Vec());
    Vec x = Eigen::Map<const Vec>(grid.rho.data(), long(grid.rho.size()));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    ChiResult best;
    best.chi_1d = std::numeric_limits<double>::infinity();
    for (int s = 0; s < n_starts; ++s) {
        Vec psi(grid.size());
        if (s == 0) {
            double s2 = 1.0 / std::sqrt(2.0 * gamma);
            for (int i = 0; i < grid.size(); ++i)
                psi[i] = std::exp(-x[i] * x[i] / (4.0 * s2));
        } else {
            for (int i = 0; i < grid.size(); ++i) psi[i] = std::abs(gauss(rng)) + 0.1;
        }
        psi.normalize();
        int iters = 0;
        bool conv = false;
        double f = detail_var::minimize_1d(A, x, gamma, psi, max_iter, iters, conv);
        if (f < best.chi_1d) {
            best.chi_1d = f;
            best.converged = conv;
            best.iterations = iters;
            Vec phi(grid.size());
            for (int i = 0; i < grid.size(); ++i) phi[i] = psi[i] / std::sqrt(grid.weight[i]);
            best.profile.grid = grid;
            best.profile.phi = phi;
        }
    }
    best.profile.validate();
    best.value = d * best.chi_1d;
    return best;
}

// chi_R over an increasing list of radii; non-increasing toward d sqrt(gamma/2).
inline std::vector<std::pair<double, double>> chi_R_monotonicity(double qpp0, int d,
                                                                 const std::vector<double>& R_list,
                                                                 int n_nodes, std::uint64_t seed) {
    std::vector<std::pair<double, double>> curve;
    for (double R : R_list)
        curve.emplace_back(R, chi_optimize(qpp0, d, R, n_nodes, seed).value);
    return curve;
}

struct LegendreReport {
    double s_eu_value = 0.0;
    double best_lower_bound = -std::numeric_limits<double>::infinity();
    double max_violation = 0.0;  // max over the family of (bound - s_eu); <= 1e-6 required
    bool pass = false;
    std::vector<double> bounds;  // int f dmu + lambda_0^{eu;f,R} per family member
};

// Legendre direction of S_eu(mu) = sup_f { int f dmu + lambda_0^{eu;f,R} }:
// every member of a supplied potential family must stay below S_eu(mu).
inline LegendreReport legendre_inequality_check(const DensityProfile& mu,
                                               const std::vector<Vec>& f_family) {
    mu.validate();
    LegendreReport rep;
    rep.s_eu_value = s_eu(mu);
    for (const Vec& f : f_family) {
        if (f.size() != mu.grid.size())
            throw std::invalid_argument("legendre_inequality_check: potential size mismatch");
        double integral = 0.0;
        for (int i = 0; i < f.size(); ++i)
            integral += f[i] * detail::sqr(mu.phi[i]) * mu.grid.weight[i];
        SpMat Af = assemble(mu.grid, f);
        double bound = integral + principal_eig(Af, mu.grid).lambda0;
        rep.bounds.push_back(bound);
        rep.best_lower_bound = std::max(rep.best_lower_bound, bound);
        rep.max_violation = std::max(rep.max_violation, bound - rep.s_eu_value);
    }
    rep.pass = rep.max_violation <= 1e-6;
    return rep;
}

}  // namespace hypam
