#pragma once

// Stationary Gaussian fields with radial covariance Q on H^d, the rescaled
// field xi_t, the scaling triple (H, alpha, beta), and the functionals J_t
// and its flat limit J.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypam/geometry.hpp"

namespace hypam {

enum class ProfileKind { gaussian_bump, compact_bump, constant };

// Radial covariance profile with analytic first and second derivatives.
// Q''(0) enters the fluctuation exponent directly, so the derivatives are
// closed-form rather than numerical.
struct CovarianceProfile {
    ProfileKind kind = ProfileKind::gaussian_bump;
    double sigma2 = 1.0;    // Q(0)
    double ell = 1.0;       // gaussian-bump length scale
    double support = 1.0;   // compact-bump support radius

    double Q(double r) const {
        switch (kind) {
            case ProfileKind::gaussian_bump:
                return sigma2 * std::exp(-r * r / (2.0 * ell * ell));
            case ProfileKind::compact_bump: {
                if (r >= support) return 0.0;
                double u = r / support;
                double v = 1.0 - u * u;
                return sigma2 * v * v * v;
            }
            case ProfileKind::constant:
                return sigma2;
        }
        return 0.0;
    }

    double Qp(double r) const {
        switch (kind) {
            case ProfileKind::gaussian_bump:
                return -sigma2 * r / (ell * ell) * std::exp(-r * r / (2.0 * ell * ell));
            case ProfileKind::compact_bump: {
                if (r >= support) return 0.0;
                double u = r / support;
                double v = 1.0 - u * u;
                return sigma2 * 3.0 * v * v * (-2.0 * u / support);
            }
            case ProfileKind::constant:
                return 0.0;
        }
        return 0.0;
    }

    double Qpp(double r) const {
        switch (kind) {
            case ProfileKind::gaussian_bump: {
                double l2 = ell * ell;
                return sigma2 * (r * r / l2 - 1.0) / l2 * std::exp(-r * r / (2.0 * l2));
            }
            case ProfileKind::compact_bump: {
                if (r >= support) return 0.0;
                double u = r / support;
                double v = 1.0 - u * u;
                double s2 = support * support;
                return sigma2 * (24.0 * u * u * v - 6.0 * v * v) / s2;
            }
            case ProfileKind::constant:
                return 0.0;
        }
        return 0.0;
    }

    double qpp0() const { return Qpp(0.0); }

    std::string name() const {
        switch (kind) {
            case ProfileKind::gaussian_bump: return "gaussian-bump";
            case ProfileKind::compact_bump: return "compact-bump";
            case ProfileKind::constant: return "constant";
        }
        return "?";
    }

    // Grid checks of the admissibility conditions: boundedness by Q(0),
    // Q'(0) = 0, Q''(0) <= 0 and finite-difference consistency of Qp, Qpp.
    void validate(double r_max = 10.0, int n = 400) const {
        if (sigma2 <= 0.0)
            throw std::invalid_argument("CovarianceProfile: sigma2 must be > 0");
        if (std::abs(Qp(0.0)) > 1e-12)
            throw std::invalid_argument("CovarianceProfile: Q'(0) must vanish");
        if (qpp0() > 1e-12)
            throw std::invalid_argument("CovarianceProfile: Q''(0) must be <= 0");
        double h = 1e-4;
        for (int i = 0; i <= n; ++i) {
            double r = r_max * i / n;
            if (std::abs(Q(r)) > Q(0.0) + 1e-12)
                throw std::invalid_argument("CovarianceProfile: |Q(r)| exceeds Q(0)");
            double fd1 = (Q(r + h) - Q(std::max(r - h, 0.0))) /
                         (r < h ? r + h : 2.0 * h);
            double fd2 = (Q(r + h) - 2.0 * Q(r) + Q(std::abs(r - h))) / (h * h);
            if (r > h && std::abs(fd1 - Qp(r)) > 1e-5 * std::max(1.0, sigma2))
                throw std::invalid_argument("CovarianceProfile: Q' inconsistent with Q");
            if (r > h && std::abs(fd2 - Qpp(r)) > 1e-3 * std::max(1.0, sigma2))
                throw std::invalid_argument("CovarianceProfile: Q'' inconsistent with Q");
        }
    }

    static CovarianceProfile gaussian_bump_profile(double sigma2, double ell) {
        CovarianceProfile p{ProfileKind::gaussian_bump, sigma2, ell, 0.0};
        if (ell <= 0.0) throw std::invalid_argument("gaussian-bump: ell must be > 0");
        p.validate();
        return p;
    }
    static CovarianceProfile constant_profile(double sigma2) {
        CovarianceProfile p{ProfileKind::constant, sigma2, 0.0, 0.0};
        p.validate();
        return p;
    }
    static CovarianceProfile compact_bump_profile(double sigma2, double support) {
        CovarianceProfile p{ProfileKind::compact_bump, sigma2, 0.0, support};
        if (support <= 0.0) throw std::invalid_argument("compact-bump: support must be > 0");
        p.validate();
        return p;
    }
};

// t together with alpha(t) = t^{-1/4}, beta(t) = t/alpha^2 = t^{3/2} and
// H(t) = sigma^2 t^2 / 2.
struct ScalingTriple {
    double t;
    double alpha;
    double beta;
    double sigma2;

    explicit ScalingTriple(double t_, double sigma2_ = 1.0)
        : t(t_), alpha(std::pow(t_, -0.25)), beta(std::pow(t_, 1.5)), sigma2(sigma2_) {
        if (t_ <= 0.0) throw std::invalid_argument("ScalingTriple: t must be > 0");
    }

    double H() const { return 0.5 * sigma2 * t * t; }
    double centering() const { return H() / t; }  // H(t)/t = sigma^2 t / 2
};

// One draw of the field at a finite point set.
struct FieldSample {
    std::vector<HyperPoint> points;
    std::vector<double> values;
    std::uint64_t seed = 0;
    double jitter_used = 0.0;
};

// Exact Gaussian draw with covariance C_ij = Q(d(x_i, x_j)) via pivoted
// LDLT with graduated diagonal jitter; bump covariances on dense clouds are
// near-singular.
inline FieldSample sample_field(const std::vector<HyperPoint>& points,
                                const CovarianceProfile& profile, std::uint64_t seed) {
    const int n = int(points.size());
    if (n == 0) throw std::invalid_argument("sample_field: empty point set");
    Mat C(n, n);
    for (int i = 0; i < n; ++i) {
        C(i, i) = profile.Q(0.0);
        for (int j = i + 1; j < n; ++j) {
            double d = hyper_distance(points[i], points[j]);
            C(i, j) = C(j, i) = profile.Q(d);
        }
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Vec z(n);
    for (int i = 0; i < n; ++i) z[i] = gauss(rng);

    FieldSample sample;
    sample.points = points;
    sample.seed = seed;
    double jitter_applied = 0.0;
    for (double jitter : {0.0, 1e-14, 1e-12, 1e-10}) {
        // jitter levels are increasing, so the diagonal is topped up in place
        C.diagonal().array() += (jitter - jitter_applied) * profile.sigma2;
        jitter_applied = jitter;
        Eigen::LDLT<Mat> ldlt(C);
        if (ldlt.info() != Eigen::Success) continue;
        Vec diag = ldlt.vectorD();
        if ((diag.array() < -1e-8 * profile.sigma2).any()) continue;
        // values = P^T L sqrt(max(D,0)) z
        Vec y = diag.array().max(0.0).sqrt() * z.array();
        y = Mat(ldlt.matrixL()) * y;
        y = ldlt.transpositionsP().transpose() * y;
        sample.values.assign(y.data(), y.data() + n);
        sample.jitter_used = jitter;
        return sample;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(C, Eigen::EigenvaluesOnly);
    throw std::runtime_error("sample_field: covariance factorization failed; smallest eigenvalue " +
                             std::to_string(es.eigenvalues().minCoeff()));
}

// xi_t values from a sample taken at the dilated points alpha(t) . x_i:
// alpha^2(t) (xi - H(t)/t).
inline std::vector<double> rescaled_field_values(const std::vector<double>& values,
                                                 const ScalingTriple& triple) {
    std::vector<double> out(values.size());
    double a2 = triple.alpha * triple.alpha;
    double c = triple.centering();
    for (size_t i = 0; i < values.size(); ++i) out[i] = a2 * (values[i] - c);
    return out;
}

// Finitely supported probability measure in polar coordinates.
struct DiscreteMeasure {
    std::vector<PolarPoint> atoms;
    std::vector<double> weights;
    double support_radius = 0.0;  // declared Sigma_R

    void validate() const {
        if (atoms.size() != weights.size() || atoms.empty())
            throw std::invalid_argument("DiscreteMeasure: atoms/weights mismatch");
        double s = 0.0;
        for (size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] < 0.0)
                throw std::invalid_argument("DiscreteMeasure: negative weight");
            if (support_radius > 0.0 && atoms[i].rho > support_radius + 1e-12)
                throw std::invalid_argument("DiscreteMeasure: atom outside Sigma_R");
            s += weights[i];
        }
        if (std::abs(s - 1.0) > 1e-12)
            throw std::invalid_argument("DiscreteMeasure: weights must sum to 1");
    }

    void normalize() {
        double s = 0.0;
        for (double w : weights) s += w;
        for (double& w : weights) w /= s;
    }
};

// J_t(mu) = -(1/beta) log< e^{beta (mu, xi_t)} >, evaluated exactly from the
// Gaussian variance identity:
//   log< e^{beta (mu, xi_t)} > = (t^2/2) sum_ij w_i w_j (Q(d(a.z_i, a.z_j)) - Q(0)).
inline double j_t(const DiscreteMeasure& mu, const ScalingTriple& triple,
                  const CovarianceProfile& profile) {
    mu.validate();
    const double a = triple.alpha;
    const size_t n = mu.atoms.size();
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            PolarPoint zi(a * mu.atoms[i].rho, mu.atoms[i].sigma);
            PolarPoint zj(a * mu.atoms[j].rho, mu.atoms[j].sigma);
            double d = polar_distance(zi, zj, 1.0);
            s += mu.weights[i] * mu.weights[j] * (profile.Q(d) - profile.Q(0.0));
        }
    }
    return -(triple.t * triple.t / 2.0) * s / triple.beta;
}

// Flat limit J(mu) = -(Q''(0)/4) sum_ij w_i w_j d_eu(z_i, z_j)^2.
inline double j_limit(const DiscreteMeasure& mu, double qpp0) {
    mu.validate();
    if (qpp0 > 0.0) throw std::invalid_argument("j_limit: Q''(0) must be <= 0");
    const size_t n = mu.atoms.size();
    double s = 0.0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            s += mu.weights[i] * mu.weights[j] *
                 detail::sqr(euclidean_polar_distance(mu.atoms[i], mu.atoms[j]));
    return -qpp0 / 4.0 * s;
}

}  // namespace hypam
