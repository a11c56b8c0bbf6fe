#pragma once

// Hyperboloid model of the d-dimensional hyperbolic space with curvature
// -alpha^2, geodesic polar coordinates about the base point o, dilations,
// distances and volumes. alpha == 0 is admitted everywhere as the exact
// Euclidean limit.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>

#include "hypam/detail/math.hpp"

namespace hypam {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct MetricParams {
    int d = 2;            // dimension, >= 1
    double alpha = 1.0;   // curvature scale; 0 encodes the Euclidean limit

    MetricParams() = default;
    MetricParams(int d_, double alpha_) : d(d_), alpha(alpha_) {
        if (d < 1) throw std::invalid_argument("MetricParams: dimension must be >= 1");
        if (alpha < 0.0) throw std::invalid_argument("MetricParams: alpha must be >= 0");
    }

    // Metric coefficient of the angular part at radius rho,
    // alpha^{-2} sinh^2(alpha rho), continuous through alpha = 0.
    double angular_metric(double rho) const {
        if (alpha == 0.0) return rho * rho;
        return detail::sqr(rho * detail::sinhc(alpha * rho));
    }

    // Radial density of the volume form, alpha^{-(d-1)} sinh^{d-1}(alpha rho).
    double radial_weight(double rho) const {
        if (alpha == 0.0) return std::pow(rho, d - 1);
        return std::pow(rho * detail::sinhc(alpha * rho), d - 1);
    }
};

// A polar point (rho, sigma) with rho >= 0 and sigma a unit vector in R^d.
struct PolarPoint {
    double rho = 0.0;
    Vec sigma;

    PolarPoint() = default;
    PolarPoint(double rho_, Vec sigma_) : rho(rho_), sigma(std::move(sigma_)) {
        if (rho < 0.0) throw std::invalid_argument("PolarPoint: rho must be >= 0");
        double n = sigma.norm();
        if (std::abs(n - 1.0) > 1e-9)
            throw std::invalid_argument("PolarPoint: sigma must be a unit vector");
        sigma /= n;
    }
};

inline double lorentz_inner(const Vec& x, const Vec& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("lorentz_inner: dimension mismatch");
    if (x.size() < 3)
        throw std::invalid_argument("lorentz_inner: need ambient dimension >= 3");
    int d = int(x.size()) - 1;
    return x.head(d).dot(y.head(d)) - x[d] * y[d];
}

// A point of H^d_alpha carried redundantly in hyperboloid and polar form;
// the two representations are synchronized on construction.
struct HyperPoint {
    Vec ambient;           // d+1 coordinates, ambient * ambient = -alpha^{-2}
    double alpha = 1.0;
    double rho = 0.0;
    Vec sigma;             // unit vector in R^d

    static HyperPoint from_polar(double rho, const Vec& sigma, double alpha) {
        if (alpha <= 0.0)
            throw std::invalid_argument("HyperPoint: alpha must be > 0");
        PolarPoint p(rho, sigma);  // validates
        HyperPoint h;
        h.alpha = alpha;
        h.rho = p.rho;
        h.sigma = p.sigma;
        int d = int(sigma.size());
        h.ambient.resize(d + 1);
        double ar = alpha * rho;
        h.ambient.head(d) = (rho * detail::sinhc(ar)) * p.sigma;
        h.ambient[d] = std::cosh(ar) / alpha;
        return h;
    }

    static HyperPoint from_ambient(const Vec& ambient, double alpha) {
        if (alpha <= 0.0)
            throw std::invalid_argument("HyperPoint: alpha must be > 0");
        int d = int(ambient.size()) - 1;
        if (d < 1) throw std::invalid_argument("HyperPoint: ambient dimension too small");
        double q = lorentz_inner(ambient, ambient);
        if (std::abs(q * alpha * alpha + 1.0) > 1e-8)
            throw std::invalid_argument("HyperPoint: ambient point not on the hyperboloid");
        if (ambient[d] <= 0.0)
            throw std::invalid_argument("HyperPoint: lower sheet of the hyperboloid");
        HyperPoint h;
        h.alpha = alpha;
        h.ambient = ambient;
        h.rho = detail::acosh_stable(alpha * ambient[d]) / alpha;
        double s = ambient.head(d).norm();
        if (s < 1e-300) {
            h.sigma = Vec::Zero(d);
            h.sigma[0] = 1.0;  // arbitrary direction at the base point
        } else {
            h.sigma = ambient.head(d) / s;
        }
        return h;
    }

    static HyperPoint origin(int d, double alpha) {
        Vec sigma = Vec::Zero(d);
        sigma[0] = 1.0;
        return from_polar(0.0, sigma, alpha);
    }

    PolarPoint polar() const { return PolarPoint(rho, sigma); }
};

// d^alpha(x, y) = alpha^{-1} arccosh(-alpha^2 x*y).
inline double hyper_distance(const HyperPoint& x, const HyperPoint& y) {
    if (x.alpha != y.alpha)
        throw std::invalid_argument("hyper_distance: mismatched curvature scales");
    double c = -x.alpha * x.alpha * lorentz_inner(x.ambient, y.ambient);
    return detail::acosh_stable(c) / x.alpha;
}

// Distance straight from polar data via the hyperbolic law of cosines:
// cosh(alpha d) = cosh a cosh b - sinh a sinh b <sigma1, sigma2>.
// Equivalent to hyper_distance; cheap enough for inner loops.
inline double polar_distance(const PolarPoint& z, const PolarPoint& w, double alpha) {
    double a = alpha * z.rho, b = alpha * w.rho;
    double c = std::cosh(a) * std::cosh(b) -
               std::sinh(a) * std::sinh(b) * z.sigma.dot(w.sigma);
    return detail::acosh_stable(std::max(c, 1.0)) / alpha;
}

// Dilation about o: (rho, sigma) -> (lambda rho, sigma).
inline HyperPoint dilate(const HyperPoint& x, double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("dilate: lambda must be > 0");
    return HyperPoint::from_polar(lambda * x.rho, x.sigma, x.alpha);
}

// Flat comparison distance on polar coordinates,
// sqrt(rho1^2 + rho2^2 - 2 rho1 rho2 <sigma1, sigma2>).
inline double euclidean_polar_distance(const PolarPoint& z, const PolarPoint& w) {
    double q = z.rho * z.rho + w.rho * w.rho - 2.0 * z.rho * w.rho * z.sigma.dot(w.sigma);
    return std::sqrt(std::max(q, 0.0));
}

// |d(alpha.z, alpha.w) - alpha d_eu(z, w)| on H^d_1; collinear pairs give 0.
inline double distance_expansion_residual(const PolarPoint& z, const PolarPoint& w,
                                          double alpha) {
    if (alpha <= 0.0 || alpha > 1.0)
        throw std::invalid_argument("distance_expansion_residual: alpha must be in (0,1]");
    PolarPoint zs(alpha * z.rho, z.sigma), ws(alpha * w.rho, w.sigma);
    double d = polar_distance(zs, ws, 1.0);
    return std::abs(d - alpha * euclidean_polar_distance(z, w));
}

// Volume of the geodesic ball of radius R,
// omega_{d-1} int_0^R alpha^{-(d-1)} sinh^{d-1}(alpha rho) drho.
inline double volume_ball(double R, const MetricParams& params) {
    if (R < 0.0) throw std::invalid_argument("volume_ball: R must be >= 0");
    if (R == 0.0) return 0.0;
    if (params.alpha == 0.0) return detail::euclidean_ball_volume(params.d, R);
    double omega = detail::sphere_area(params.d - 1);
    double integral = detail::adaptive_simpson(
        [&](double rho) { return params.radial_weight(rho); }, 0.0, R,
        1e-13 * std::max(1.0, std::pow(R, double(params.d))));
    return omega * integral;
}

// Random element of SO+(d,1) built as rotation * boost * rotation.
// Covers the isometry group well enough for invariance testing.
inline Mat random_isometry(int d, std::mt19937_64& rng, double max_rapidity = 1.5) {
    auto random_rotation = [&](int n) {
        std::normal_distribution<double> gauss;
        Mat a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = gauss(rng);
        Eigen::HouseholderQR<Mat> qr(a);
        Mat q = qr.householderQ();
        Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (int i = 0; i < n; ++i)
            if (r(i, i) < 0) q.col(i) *= -1.0;
        if (q.determinant() < 0) q.col(0) *= -1.0;
        return q;
    };
    std::uniform_real_distribution<double> unif(0.0, max_rapidity);
    double phi = unif(rng);
    Mat boost = Mat::Identity(d + 1, d + 1);
    boost(0, 0) = std::cosh(phi);
    boost(0, d) = std::sinh(phi);
    boost(d, 0) = std::sinh(phi);
    boost(d, d) = std::cosh(phi);
    Mat k1 = Mat::Identity(d + 1, d + 1), k2 = Mat::Identity(d + 1, d + 1);
    k1.topLeftCorner(d, d) = random_rotation(d);
    k2.topLeftCorner(d, d) = random_rotation(d);
    return k1 * boost * k2;
}

inline HyperPoint apply_isometry(const Mat& g, const HyperPoint& x) {
    return HyperPoint::from_ambient(g * x.ambient, x.alpha);
}

// Uniform random direction on S^{d-1}.
inline Vec random_direction(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    Vec v(d);
    double n = 0.0;
    do {
        for (int i = 0; i < d; ++i) v[i] = gauss(rng);
        n = v.norm();
    } while (n < 1e-12);
    return v / n;
}

}  // namespace hypam
