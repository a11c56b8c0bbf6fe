#pragma once

// Decomposition of large geodesic balls into volume-matched cells: maximal
// sphere packings per annulus, cover/multiplicity/diameter certificates, and
// the smooth partition of unity (squared convention) with its gradient
// sacrifice field Phi.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypam/geometry.hpp"

namespace hypam {

// Geodesic distance on the unit sphere.
inline double sphere_distance(const Vec& a, const Vec& b) {
    return std::acos(std::clamp(a.dot(b), -1.0, 1.0));
}

struct SpherePacking {
    int sphere_dim = 1;  // dimension of the sphere S^{d-1}, so d = sphere_dim + 1
    double theta = 0.0;  // separation parameter (disjoint theta/2-balls)
    // Maximality is certified over a finite candidate set, so the covering
    // radius is theta + dispersion, where dispersion bounds the distance from
    // any sphere point to its nearest candidate.
    double dispersion = 0.0;
    std::vector<Vec> centers;
};

namespace detail_pack {
// Dense quasi-uniform candidate set: equispaced circle (S^1) or Fibonacci
// lattice (S^2). `spacing` approximates the candidate mesh norm.
inline std::vector<Vec> candidate_set(int sphere_dim, long n) {
    std::vector<Vec> pts;
    pts.reserve(n);
    if (sphere_dim == 1) {
        for (long i = 0; i < n; ++i) {
            double t = 2.0 * std::numbers::pi * double(i) / double(n);
            Vec v(2);
            v << std::cos(t), std::sin(t);
            pts.push_back(v);
        }
    } else {
        double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (long i = 0; i < n; ++i) {
            double z = 1.0 - 2.0 * (double(i) + 0.5) / double(n);
            double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
            double t = golden * double(i);
            Vec v(3);
            v << rad * std::cos(t), rad * std::sin(t), z;
            pts.push_back(v);
        }
    }
    return pts;
}
}  // namespace detail_pack

// Greedy maximal packing: shuffle a dense candidate set, accept a candidate
// iff it is >= theta away from every accepted center. Maximal at the probe
// resolution; the resolution is refused if it cannot certify maximality.
inline SpherePacking maximal_packing(double theta, int sphere_dim, std::uint64_t seed) {
    if (theta <= 0.0 || theta >= std::numbers::pi)
        throw std::invalid_argument("maximal_packing: theta must lie in (0, pi)");
    if (sphere_dim != 1 && sphere_dim != 2)
        throw std::invalid_argument("maximal_packing: sphere dimension must be 1 or 2");
    // mesh norm <= theta/20
    long n;
    if (sphere_dim == 1) {
        n = std::max<long>(1000, long(std::ceil(2.0 * std::numbers::pi / (theta / 20.0))));
    } else {
        double spacing = theta / 20.0;
        n = std::max<long>(20000, long(std::ceil(4.0 * std::numbers::pi / (spacing * spacing))));
    }
    const long n_cap = 6'000'000;
    if (n > n_cap)
        throw std::invalid_argument("maximal_packing: theta requires candidate resolution " +
                                    std::to_string(n) + " above the supported " +
                                    std::to_string(n_cap));
    std::vector<Vec> cand = detail_pack::candidate_set(sphere_dim, n);
    std::mt19937_64 rng(seed);
    std::shuffle(cand.begin(), cand.end(), rng);
    SpherePacking pack;
    pack.sphere_dim = sphere_dim;
    pack.theta = theta;
    // half the arc spacing on S^1; a conservative covering-radius bound for
    // the Fibonacci lattice on S^2
    pack.dispersion = sphere_dim == 1 ? std::numbers::pi / double(n)
                                      : std::sqrt(4.0 * std::numbers::pi / double(n));
    double cos_theta = std::cos(theta);
    for (const Vec& c : cand) {
        bool ok = true;
        for (const Vec& a : pack.centers)
            if (c.dot(a) > cos_theta) {  // distance < theta
                ok = false;
                break;
            }
        if (ok) pack.centers.push_back(c);
    }
    return pack;
}

struct CoverReport {
    bool covered = false;          // all probes within theta of some center
    double max_min_distance = 0.0; // worst probe-to-nearest-center distance
    int max_multiplicity = 0;      // max # of 2theta-balls containing a probe
    double min_separation = 0.0;   // pairwise center separation (>= theta)
    long n_probes = 0;
};

// Lemma-level certificates: the theta-balls of a maximal packing cover the
// sphere, and every point lies in a bounded number of 2theta-balls.
inline CoverReport cover_and_multiplicity_check(const SpherePacking& pack, long n_probes,
                                                std::uint64_t seed) {
    if (pack.centers.empty()) throw std::invalid_argument("cover check: empty packing");
    std::mt19937_64 rng(seed);
    int d = pack.sphere_dim + 1;
    CoverReport rep;
    rep.n_probes = n_probes;
    for (long p = 0; p < n_probes; ++p) {
        Vec x = random_direction(d, rng);
        double dmin = std::numbers::pi;
        int mult = 0;
        for (const Vec& c : pack.centers) {
            double dist = sphere_distance(x, c);
            dmin = std::min(dmin, dist);
            if (dist < 2.0 * pack.theta) ++mult;
        }
        rep.max_min_distance = std::max(rep.max_min_distance, dmin);
        rep.max_multiplicity = std::max(rep.max_multiplicity, mult);
    }
    // maximality over the candidate set certifies covering at radius
    // theta + dispersion only; the continuum statement is the limit
    rep.covered = rep.max_min_distance <= pack.theta + pack.dispersion;
    rep.min_separation = std::numbers::pi;
    for (size_t i = 0; i < pack.centers.size(); ++i)
        for (size_t j = i + 1; j < pack.centers.size(); ++j)
            rep.min_separation =
                std::min(rep.min_separation, sphere_distance(pack.centers[i], pack.centers[j]));
    return rep;
}

// int_0^theta sin^{d-2} u du; closed forms for d = 2, 3.
inline double sine_power_integral(double theta, int d) {
    if (d == 2) return theta;
    if (d == 3) return 1.0 - std::cos(theta);
    return detail::adaptive_simpson(
        [&](double u) { return std::pow(std::sin(u), d - 2); }, 0.0, theta, 1e-13);
}

// Angular radius of the cells in annulus k: the unique theta with
//   int_0^theta sin^{d-2} u du
//     = (omega_{d-1}/omega_{d-2}) int_0^r sinh^{d-1}(a rho) drho
//                                / int_{(k-1)r}^{kr} sinh^{d-1}(a rho) drho,
// capped at pi/2 (the k = 1 ratio always triggers the cap).
inline double angular_radius(int k, double r, double alpha, int d) {
    if (k < 1 || r <= 0.0 || alpha <= 0.0 || d < 2)
        throw std::invalid_argument("angular_radius: bad parameters");
    auto sinh_int = [&](double a, double b) {
        if (d == 2) return (std::cosh(alpha * b) - std::cosh(alpha * a)) / alpha;
        return detail::adaptive_simpson(
            [&](double rho) { return std::pow(std::sinh(alpha * rho), d - 1); }, a, b, 1e-13);
    };
    double rhs = detail::sphere_area(d - 1) / detail::sphere_area(d - 2) * sinh_int(0.0, r) /
                 sinh_int((k - 1) * r, k * r);
    double total = sine_power_integral(std::numbers::pi, d);
    if (rhs >= total) return std::numbers::pi / 2.0;
    double lo = 0.0, hi = std::numbers::pi;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (sine_power_integral(mid, d) < rhs ? lo : hi) = mid;
    }
    return std::min(0.5 * (lo + hi), std::numbers::pi / 2.0);
}

struct Annulus {
    int k = 1;
    double rho_lo = 0.0, rho_hi = 0.0;
    double theta = 0.0;
    SpherePacking packing;
};

struct BallDecomposition {
    double R_tilde = 0.0;  // outer radius after padding to a multiple of r
    double r = 0.0;
    double alpha = 0.0;
    int d = 2;
    int K = 0;
    bool padded = false;
    std::uint64_t seed = 0;
    std::vector<Annulus> annuli;

    long cell_count() const {
        long n = 0;
        for (const auto& a : annuli) n += long(a.packing.centers.size());
        return n;
    }
};

// Concentric annuli of width r with a maximal packing at theta_k per
// annulus; the cells are (annulus) x (theta_k-ball around a center) and
// together cover the ball of radius R_tilde.
inline BallDecomposition decompose_ball(double R_tilde, double r, double alpha, int d,
                                        std::uint64_t seed) {
    if (R_tilde <= 0.0 || r <= 0.0 || alpha <= 0.0 || (d != 2 && d != 3))
        throw std::invalid_argument("decompose_ball: bad parameters (d must be 2 or 3)");
    BallDecomposition dec;
    dec.r = r;
    dec.alpha = alpha;
    dec.d = d;
    dec.seed = seed;
    dec.K = int(std::ceil(R_tilde / r - 1e-12));
    dec.R_tilde = dec.K * r;
    dec.padded = dec.R_tilde > R_tilde + 1e-12;
    for (int k = 1; k <= dec.K; ++k) {
        Annulus a;
        a.k = k;
        a.rho_lo = (k - 1) * r;
        a.rho_hi = k * r;
        a.theta = angular_radius(k, r, alpha, d);
        a.packing = maximal_packing(a.theta, d - 1, seed + std::uint64_t(k));
        dec.annuli.push_back(std::move(a));
    }
    return dec;
}

struct CoveringCertificate {
    bool covered = false;
    long n_probes = 0;
    long misses = 0;
    // volume of an uncapped cell equals the volume of the r-ball by the
    // defining relation; a cell capped at theta = pi/2 holds half a ball
    double min_cell_over_ball_volume = 0.0;
};

// Random probe points inside the ball (volume-weighted radius, uniform
// direction); each must fall in some cell of its annulus.
inline CoveringCertificate covering_certificate(const BallDecomposition& dec, long n_probes,
                                                std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif;
    MetricParams params(dec.d, dec.alpha);
    CoveringCertificate cert;
    cert.n_probes = n_probes;
    double w_max = params.radial_weight(dec.R_tilde);
    for (long p = 0; p < n_probes; ++p) {
        double rho;
        do {  // rejection sampling against the radial volume density
            rho = dec.R_tilde * unif(rng);
        } while (unif(rng) * w_max > params.radial_weight(rho));
        Vec sig = random_direction(dec.d, rng);
        int k = std::min(int(rho / dec.r), dec.K - 1);
        const Annulus& a = dec.annuli[k];
        bool inside = false;
        for (const Vec& c : a.packing.centers)
            if (sphere_distance(sig, c) <= a.theta) {
                inside = true;
                break;
            }
        if (!inside) ++cert.misses;
    }
    cert.covered = cert.misses == 0;
    double vol_ball = volume_ball(dec.r, params);
    cert.min_cell_over_ball_volume = std::numeric_limits<double>::infinity();
    for (const Annulus& a : dec.annuli) {
        double shell = detail::adaptive_simpson(
            [&](double rho) { return params.radial_weight(rho); }, a.rho_lo, a.rho_hi, 1e-13);
        double vol_cell = detail::sphere_area(dec.d - 2) * sine_power_integral(a.theta, dec.d) * shell;
        cert.min_cell_over_ball_volume =
            std::min(cert.min_cell_over_ball_volume, vol_cell / vol_ball);
    }
    return cert;
}

struct DiameterReport {
    std::vector<double> diam_over_r;  // per annulus (cells are congruent within one)
    double max_diam_over_r = 0.0;
};

// Exact-distance diameter certificate. Cells are rotationally symmetric
// about their center direction, so the diameter is attained in a 2-plane
// section through the axis; that section is sampled densely and distances
// are evaluated with the exact hyperbolic law of cosines.
inline DiameterReport cell_diameter_certificate(const BallDecomposition& dec,
                                                int n_boundary = 60) {
    if (dec.alpha * dec.r > 1.0)
        throw std::invalid_argument(
            "cell_diameter_certificate: requires alpha * r <= 1 (flat-enough cells)");
    DiameterReport rep;
    for (const Annulus& a : dec.annuli) {
        std::vector<PolarPoint> boundary;
        for (int i = 0; i <= n_boundary; ++i) {
            double psi = -a.theta + 2.0 * a.theta * double(i) / n_boundary;
            Vec sig(2);
            sig << std::cos(psi), std::sin(psi);
            boundary.emplace_back(std::max(a.rho_lo, 1e-12), sig);
            boundary.emplace_back(a.rho_hi, sig);
        }
        double diam = 0.0;
        for (size_t i = 0; i < boundary.size(); ++i)
            for (size_t j = i + 1; j < boundary.size(); ++j)
                diam = std::max(diam, polar_distance(boundary[i], boundary[j], dec.alpha));
        rep.diam_over_r.push_back(diam / dec.r);
        rep.max_diam_over_r = std::max(rep.max_diam_over_r, diam / dec.r);
    }
    return rep;
}

// F_k(x) = x sinh^{-1}((k-1-eps)x) sinh(kx)/sinh(x/2), the quantity whose
// uniform boundedness over k >= 2, x in (0,1] drives the angular part of the
// Phi bound.
inline double angular_bound_function(int k, double x, double epsilon = 1.0 / 3.0) {
    if (k < 2 || x <= 0.0) throw std::invalid_argument("angular_bound_function: k >= 2, x > 0");
    return x / std::sinh((k - 1 - epsilon) * x) * std::sinh(k * x) / std::sinh(x / 2.0);
}

// Smooth partition of unity phi_{k,i} = eta_k(rho) zeta_{k,i}(sigma) in the
// squared convention: sum phi^2 = 1 identically on the ball.
//
// eta_k: squared-cosine crossfades on bands of half-width eps*r around the
// annulus boundaries (no inner fade at 0, no outer fade at R_tilde), so that
// sum_k eta_k^2 = 1 exactly and |eta_k'| <= pi/(4 eps r). The constant pi/4
// is recorded in eta_prime_constant.
//
// zeta_{k,i} = chi_{k,i} / sqrt(sum_j chi_{k,j}^2), with chi a plateau bump
// of the spherical distance to the center: 1 up to theta_k, cosine fade to 0
// at 2 theta_k. The cover property makes the denominator >= 1.
//
// The innermost annulus uses the single trivial angular cell zeta = 1: the
// angular metric factor alpha^2 sinh^{-2}(alpha rho) diverges at rho -> 0,
// so any nonconstant angular function there would break the Phi * r^2 bound
// at the coordinate singularity.
struct PartitionOfUnity {
    double r = 0.0;
    double alpha = 0.0;
    int d = 2;
    int K = 0;
    double epsilon = 1.0 / 3.0;
    double eta_prime_constant = std::numbers::pi / 4.0;  // |eta'| <= const/(eps r)
    std::vector<Annulus> annuli;  // annulus 1 carries an empty packing (trivial cell)

    // Radial bump of annulus k (1-based): crossfade u = position inside the
    // band [(boundary)-eps r, (boundary)+eps r], eta = cos(pi u / 2) on the
    // way out, sin on the way in.
    double eta(int k, double rho) const {
        const double lo = (k - 1) * r, hi = k * r, e = epsilon * r;
        if ((k > 1 && rho <= lo - e) || (k < K && rho >= hi + e) || rho < 0.0) return 0.0;
        if (k > 1 && rho < lo + e) {
            double u = (rho - (lo - e)) / (2.0 * e);
            return std::sin(0.5 * std::numbers::pi * u);
        }
        if (k < K && rho > hi - e) {
            double u = (rho - (hi - e)) / (2.0 * e);
            return std::cos(0.5 * std::numbers::pi * u);
        }
        return 1.0;
    }

    double eta_prime(int k, double rho) const {
        const double lo = (k - 1) * r, hi = k * r, e = epsilon * r;
        if ((k > 1 && rho <= lo - e) || (k < K && rho >= hi + e) || rho < 0.0) return 0.0;
        double c = 0.25 * std::numbers::pi / e;
        if (k > 1 && rho < lo + e) {
            double u = (rho - (lo - e)) / (2.0 * e);
            return c * std::cos(0.5 * std::numbers::pi * u);
        }
        if (k < K && rho > hi - e) {
            double u = (rho - (hi - e)) / (2.0 * e);
            return -c * std::sin(0.5 * std::numbers::pi * u);
        }
        return 0.0;
    }

    // Angular bump of spherical distance psi: plateau to theta, cosine fade
    // to zero at 2 theta.
    static double chi(double psi, double theta) {
        if (psi <= theta) return 1.0;
        if (psi >= 2.0 * theta) return 0.0;
        return std::cos(0.5 * std::numbers::pi * (psi - theta) / theta);
    }
    static double chi_prime(double psi, double theta) {
        if (psi <= theta || psi >= 2.0 * theta) return 0.0;
        return -0.5 * std::numbers::pi / theta *
               std::sin(0.5 * std::numbers::pi * (psi - theta) / theta);
    }

    // Per-annulus angular data at a direction sigma: zeta values and the
    // total squared spherical gradient sum_i |grad_sigma zeta_{k,i}|^2.
    // zeta_i = chi_i / S with S = sqrt(sum_j chi_j^2);
    // grad zeta_i = chi_i'(psi_i) t_i / S - chi_i S^{-3} sum_j chi_j chi_j' t_j,
    // with t_j the unit tangent of the distance function to center j.
    struct AngularEval {
        std::vector<double> zeta;
        double sum_zeta_sq = 0.0;
        double sum_grad_sq = 0.0;
    };

    AngularEval angular_eval(int k, const Vec& sigma) const {
        const Annulus& a = annuli[k - 1];
        AngularEval ev;
        if (a.packing.centers.empty()) {  // trivial single cell
            ev.zeta = {1.0};
            ev.sum_zeta_sq = 1.0;
            return ev;
        }
        const size_t n = a.packing.centers.size();
        std::vector<double> chi_v(n), chi_p(n);
        std::vector<Vec> tang(n);
        double s2 = 0.0;
        Vec g = Vec::Zero(sigma.size());
        for (size_t j = 0; j < n; ++j) {
            const Vec& c = a.packing.centers[j];
            double psi = sphere_distance(sigma, c);
            chi_v[j] = chi(psi, a.theta);
            chi_p[j] = chi_prime(psi, a.theta);
            s2 += chi_v[j] * chi_v[j];
            if (chi_p[j] != 0.0) {
                Vec t = -(c - c.dot(sigma) * sigma);  // direction of increasing psi
                double nrm = t.norm();
                tang[j] = nrm > 1e-14 ? Vec(t / nrm) : Vec(Vec::Zero(sigma.size()));
                g += chi_v[j] * chi_p[j] * tang[j];
            } else {
                tang[j] = Vec::Zero(sigma.size());
            }
        }
        if (s2 < 1e-12)
            throw std::runtime_error("PartitionOfUnity: direction not covered by annulus " +
                                     std::to_string(k));
        double s = std::sqrt(s2);
        ev.zeta.resize(n);
        for (size_t i = 0; i < n; ++i) {
            ev.zeta[i] = chi_v[i] / s;
            ev.sum_zeta_sq += ev.zeta[i] * ev.zeta[i];
            Vec grad = (chi_p[i] / s) * tang[i] - (chi_v[i] / (s2 * s)) * g;
            ev.sum_grad_sq += grad.squaredNorm();
        }
        return ev;
    }

    // sum_{k,i} phi_{k,i}^2 at a point; 1 on the ball by construction.
    double sum_phi_sq(double rho, const Vec& sigma) const {
        double s = 0.0;
        for (int k = 1; k <= K; ++k) {
            double e = eta(k, rho);
            if (e == 0.0) continue;
            s += e * e * angular_eval(k, sigma).sum_zeta_sq;
        }
        return s;
    }

    // Gradient sacrifice Phi = sum_{k,i} |grad^t phi_{k,i}|^2
    //   = sum_{k,i} (eta_k' zeta_{k,i})^2
    //     + alpha^2 sinh^{-2}(alpha rho) eta_k^2 |grad_sigma zeta_{k,i}|^2.
    double Phi(double rho, const Vec& sigma) const {
        double s = 0.0;
        double ang_metric = 1.0 / detail::sqr(rho * detail::sinhc(alpha * rho));
        for (int k = 1; k <= K; ++k) {
            double e = eta(k, rho);
            double ep = eta_prime(k, rho);
            if (e == 0.0 && ep == 0.0) continue;
            AngularEval ev = angular_eval(k, sigma);
            s += ep * ep * ev.sum_zeta_sq + ang_metric * e * e * ev.sum_grad_sq;
        }
        return s;
    }

    // phi_{k,i} for one named cell (i is the index into the annulus packing;
    // the trivial annulus has the single index 0).
    double phi(int k, int i, double rho, const Vec& sigma) const {
        double e = eta(k, rho);
        if (e == 0.0) return 0.0;
        AngularEval ev = angular_eval(k, sigma);
        return e * ev.zeta[size_t(i)];
    }
};

inline PartitionOfUnity build_pou(const BallDecomposition& dec, double epsilon = 1.0 / 3.0) {
    if (epsilon <= 0.0 || epsilon >= 0.5)
        throw std::invalid_argument("build_pou: epsilon must lie in (0, 1/2)");
    PartitionOfUnity pou;
    pou.r = dec.r;
    pou.alpha = dec.alpha;
    pou.d = dec.d;
    pou.K = dec.K;
    pou.epsilon = epsilon;
    pou.annuli = dec.annuli;
    for (const Annulus& a : pou.annuli)
        if (a.k > 1 && a.packing.centers.empty())
            throw std::runtime_error("build_pou: empty cover on annulus " + std::to_string(a.k));
    // trivial angular cell on the innermost annulus (see the struct comment)
    pou.annuli[0].packing.centers.clear();
    return pou;
}

struct PhiFieldReport {
    std::vector<double> values;
    double sup_phi = 0.0;
    double sup_phi_r_sq = 0.0;  // sup Phi * r^2, the quantity with the 1/r^2 law
};

// Phi evaluated over a probe set of polar points.
inline PhiFieldReport phi_field(const PartitionOfUnity& pou,
                                const std::vector<PolarPoint>& probes) {
    PhiFieldReport rep;
    rep.values.reserve(probes.size());
    for (const PolarPoint& p : probes) {
        double v = pou.Phi(p.rho, p.sigma);
        rep.values.push_back(v);
        rep.sup_phi = std::max(rep.sup_phi, v);
    }
    rep.sup_phi_r_sq = rep.sup_phi * pou.r * pou.r;
    return rep;
}

}  // namespace hypam
