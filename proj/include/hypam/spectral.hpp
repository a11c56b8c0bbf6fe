#pragma once

// Discretized Dirichlet eigenproblems for L^t + V on geodesic balls Sigma_R
// across curvatures: assembly (volume-weighted symmetrization), principal
// eigenpairs, spectrum heads, parabolic solves by spectral expansion,
// eigenvalue perturbation derivatives, the decomposition inequality and the
// eigenvalue scaling identity.
//
// Sign conventions, stated once: assemble() produces the matrix of
// -(L^t + V), whose eigenvalues lambda_0 < lambda_1 <= ... increase.
// The "maximizing" convention lambda^V(D) used by the decomposition
// inequality is the top of the spectrum of L + V, i.e. -lambda_0 of the
// assembled matrix. Every report records which convention it uses.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypam/field.hpp"
#include "hypam/geometry.hpp"

namespace hypam {

using SpMat = Eigen::SparseMatrix<double>;

enum class GridKind { interval1d, radial, disk2d };

// Interior grid nodes with volume quadrature weights. The discretization is
// cell-centered finite volume in rho (first node at h/2, off the coth
// singularity; Dirichlet face exactly at rho = R) and equispaced periodic in
// the angle for the 2-D disk. d = 1 uses the full interval [-R, R] with
// node-centered differences.
struct Grid {
    GridKind kind = GridKind::radial;
    MetricParams params;
    double R = 1.0;
    int n_radial = 0;   // cells (radial/disk) or subintervals (interval1d)
    int n_angular = 1;  // disk2d only
    std::vector<double> rho;     // per node; signed coordinate for interval1d
    std::vector<double> theta;   // per node, disk2d only
    std::vector<double> weight;  // volume quadrature weight per node

    int size() const { return int(rho.size()); }
    double h_radial() const {
        return kind == GridKind::interval1d ? 2.0 * R / n_radial : R / n_radial;
    }
};

inline Grid make_interval_grid(double R, int n) {
    if (R <= 0.0 || n < 4) throw std::invalid_argument("make_interval_grid: bad R or n");
    Grid g;
    g.kind = GridKind::interval1d;
    g.params = MetricParams(1, 0.0);
    g.R = R;
    g.n_radial = n;
    double h = 2.0 * R / n;
    for (int j = 1; j < n; ++j) {
        g.rho.push_back(-R + j * h);
        g.weight.push_back(h);
    }
    return g;
}

inline Grid make_radial_grid(const MetricParams& params, double R, int n) {
    if (params.d < 2)
        throw std::invalid_argument("make_radial_grid: use make_interval_grid for d = 1");
    if (R <= 0.0 || n < 4) throw std::invalid_argument("make_radial_grid: bad R or n");
    Grid g;
    g.kind = GridKind::radial;
    g.params = params;
    g.R = R;
    g.n_radial = n;
    double h = R / n;
    double omega = detail::sphere_area(params.d - 1);
    for (int j = 1; j <= n; ++j) {
        double rho = (j - 0.5) * h;
        g.rho.push_back(rho);
        g.weight.push_back(omega * params.radial_weight(rho) * h);
    }
    return g;
}

inline Grid make_disk_grid(const MetricParams& params, double R, int nr, int ntheta) {
    if (params.d != 2) throw std::invalid_argument("make_disk_grid: d must be 2");
    if (R <= 0.0 || nr < 4 || ntheta < 3)
        throw std::invalid_argument("make_disk_grid: bad R, nr or ntheta");
    Grid g;
    g.kind = GridKind::disk2d;
    g.params = params;
    g.R = R;
    g.n_radial = nr;
    g.n_angular = ntheta;
    double h = R / nr;
    double ht = 2.0 * std::numbers::pi / ntheta;
    for (int j = 1; j <= nr; ++j) {
        double rho = (j - 0.5) * h;
        double w = params.radial_weight(rho) * h * ht;
        for (int m = 0; m < ntheta; ++m) {
            g.rho.push_back(rho);
            g.theta.push_back(m * ht);
            g.weight.push_back(w);
        }
    }
    return g;
}

// Matrix of -(L + V) on the grid, symmetrized by D^{1/2} (.) D^{-1/2} with
// D the volume weights, so that it is symmetric in the plain inner product.
// Eigenvectors psi relate to grid functions phi by psi = sqrt(weight) phi.
// Assembly is verified symmetric to 1e-10 relative.
inline SpMat assemble(const Grid& grid, const Vec& V) {
    const int n = grid.size();
    if (V.size() != 0 && V.size() != n)
        throw std::invalid_argument("assemble: potential size mismatch");
    auto pot = [&](int i) { return V.size() ? V[i] : 0.0; };
    std::vector<Eigen::Triplet<double>> trip;
    if (grid.kind == GridKind::interval1d) {
        double h = grid.h_radial();
        double ih2 = 1.0 / (h * h);
        for (int i = 0; i < n; ++i) {
            trip.emplace_back(i, i, 2.0 * ih2 - pot(i));
            if (i + 1 < n) {
                trip.emplace_back(i, i + 1, -ih2);
                trip.emplace_back(i + 1, i, -ih2);
            }
        }
    } else {
        const int nr = grid.n_radial;
        const int nt = grid.kind == GridKind::disk2d ? grid.n_angular : 1;
        double h = grid.h_radial();
        double ih2 = 1.0 / (h * h);
        std::vector<double> wface(nr + 1), wnode(nr);
        for (int j = 0; j <= nr; ++j) wface[j] = grid.params.radial_weight(j * h);
        for (int j = 0; j < nr; ++j) wnode[j] = grid.params.radial_weight((j + 0.5) * h);
        double ht = 2.0 * std::numbers::pi / nt;
        for (int j = 0; j < nr; ++j) {
            double diag_r = (wface[j] + (j + 1 == nr ? 2.0 : 1.0) * wface[j + 1]) /
                            wnode[j] * ih2;
            double off_r = j + 1 < nr
                               ? -wface[j + 1] / std::sqrt(wnode[j] * wnode[j + 1]) * ih2
                               : 0.0;
            double a = 0.0;  // angular coupling
            if (grid.kind == GridKind::disk2d)
                a = 1.0 / (grid.params.angular_metric((j + 0.5) * h) * ht * ht);
            for (int m = 0; m < nt; ++m) {
                int i = j * nt + m;
                trip.emplace_back(i, i, diag_r + 2.0 * a - pot(i));
                if (off_r != 0.0) {
                    trip.emplace_back(i, i + nt, off_r);
                    trip.emplace_back(i + nt, i, off_r);
                }
                if (a != 0.0) {
                    int ip = j * nt + (m + 1) % nt;
                    trip.emplace_back(i, ip, -a);
                    trip.emplace_back(ip, i, -a);
                }
            }
        }
    }
    SpMat A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    // symmetry audit
    SpMat S = SpMat(A.transpose()) - A;
    double scale = 0.0, asym = 0.0;
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
    for (int k = 0; k < S.outerSize(); ++k)
        for (SpMat::InnerIterator it(S, k); it; ++it) asym = std::max(asym, std::abs(it.value()));
    if (asym > 1e-10 * scale)
        throw std::runtime_error("assemble: weighted symmetrization failed, asymmetry " +
                                 std::to_string(asym / scale));
    return A;
}

struct EigenSolveResult {
    double lambda0 = 0.0;
    Vec phi0;                           // grid function, unit weighted-L2 norm
    std::vector<double> spectrum_head;  // ascending eigenvalues of -(L+V)
    double residual = 0.0;              // |A psi - lambda psi| / max(1, |lambda|)
};

namespace detail_eig {

// Smallest k eigenpairs by shift-invert Lanczos with full reorthogonalization.
// The shift is placed just below lambda_min (found by positive-definiteness
// bisection) so the inverted spectrum is well separated.
// The start vector is a fixed-seed random draw: a structured start (e.g. all
// ones) can be orthogonal to entire symmetry sectors of the operator and the
// Krylov space would never reach them.
inline void lanczos_lowest(const SpMat& A, int k, std::vector<double>& values, Mat& vectors,
                           int max_iter = 300, double tol = 1e-11) {
    const int n = int(A.rows());
    double gersh = std::numeric_limits<double>::infinity();
    for (int c = 0; c < A.outerSize(); ++c) {
        double diag = 0.0, off = 0.0;
        for (SpMat::InnerIterator it(A, c); it; ++it) {
            if (it.row() == c)
                diag = it.value();
            else
                off += std::abs(it.value());
        }
        gersh = std::min(gersh, diag - off);
    }
    // The Gershgorin bound is far below lambda_min for fine grids, which would
    // destroy the spectral separation of the shift-invert transform. Bisect
    // for the largest shift that keeps A - shift I positive definite: any
    // diagonal entry is a Rayleigh quotient, hence an upper bound on
    // lambda_min.
    double min_diag = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) min_diag = std::min(min_diag, A.coeff(i, i));
    double lo = gersh - 1.0, hi = min_diag;
    SpMat B = A;
    Eigen::SimplicialLLT<SpMat> llt;
    llt.analyzePattern(B);
    auto factor_at = [&](double s) {
        for (int i = 0; i < n; ++i) B.coeffRef(i, i) = A.coeff(i, i) - s;
        llt.factorize(B);
        return llt.info() == Eigen::Success;
    };
    if (!factor_at(lo))
        throw std::runtime_error("lanczos_lowest: Cholesky factorization failed");
    for (int trial = 0; trial < 30 && hi - lo > 1e-3 * (std::abs(lo) + 1.0); ++trial) {
        double mid = 0.5 * (lo + hi);
        if (factor_at(mid))
            lo = mid;
        else
            hi = mid;
    }
    if (!factor_at(lo))
        throw std::runtime_error("lanczos_lowest: Cholesky factorization failed");

    int m_max = std::min(max_iter, n);
    Mat V(n, m_max);
    std::vector<double> alpha, beta;
    std::mt19937_64 start_rng(0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> start_gauss;
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = start_gauss(start_rng);
    v.normalize();
    V.col(0) = v;
    Vec v_prev = Vec::Zero(n);
    double b_prev = 0.0;
    int m = 0;
    Eigen::SelfAdjointEigenSolver<Mat> tsolve;
    for (; m < m_max; ++m) {
        Vec w = llt.solve(V.col(m));
        double a = V.col(m).dot(w);
        alpha.push_back(a);
        w -= a * V.col(m) + b_prev * v_prev;
        // full reorthogonalization, twice for safety
        for (int pass = 0; pass < 2; ++pass)
            w -= V.leftCols(m + 1) * (V.leftCols(m + 1).transpose() * w);
        double b = w.norm();
        // convergence check on the bottom-k Ritz pairs of the inverted operator
        if (m + 1 >= std::max(2 * k, 8) && (m % 5 == 4 || b < 1e-14 || m + 1 == m_max)) {
            Mat T = Mat::Zero(m + 1, m + 1);
            for (int i = 0; i <= m; ++i) {
                T(i, i) = alpha[i];
                if (i < m) T(i, i + 1) = T(i + 1, i) = beta[i];
            }
            tsolve.compute(T);
            bool done = true;
            for (int i = 0; i < k; ++i) {
                int idx = m - i;  // largest Ritz values of the inverse
                double theta = tsolve.eigenvalues()[idx];
                double res = b * std::abs(tsolve.eigenvectors()(m, idx));
                if (res > tol * std::abs(theta)) done = false;
            }
            if (done || b < 1e-14) {
                values.resize(k);
                vectors.resize(n, k);
                for (int i = 0; i < k; ++i) {
                    int idx = m - i;
                    values[i] = lo + 1.0 / tsolve.eigenvalues()[idx];
                    vectors.col(i) = V.leftCols(m + 1) * tsolve.eigenvectors().col(idx);
                    vectors.col(i).normalize();
                }
                // Inverse-iteration refinement with deflation: the Lanczos
                // residual lives in the inverted operator and is amplified
                // by |A - shift I| when mapped back, so polish each pair
                // until the residual in A itself is at machine level.
                for (int i = 0; i < k; ++i) {
                    Vec u = vectors.col(i);
                    double lam = values[i];
                    for (int it = 0; it < 40; ++it) {
                        double res = (A * u - lam * u).norm();
                        if (res <= 1e-9 * std::max(1.0, std::abs(lam))) break;
                        u = llt.solve(u);
                        for (int j = 0; j < i; ++j) u -= vectors.col(j).dot(u) * vectors.col(j);
                        u.normalize();
                        lam = u.dot(A * u);
                    }
                    vectors.col(i) = u;
                    values[i] = lam;
                }
                return;
            }
        }
        if (m + 1 < m_max) {
            beta.push_back(b);
            b_prev = b;
            v_prev = V.col(m);
            V.col(m + 1) = w / b;
        }
    }
    throw std::runtime_error("lanczos_lowest: no convergence in " + std::to_string(m_max) +
                             " iterations");
}

}  // namespace detail_eig

// Full eigensystem of the assembled matrix (dense path); ascending order.
inline void dense_eigensystem(const SpMat& A, Vec& values, Mat& vectors) {
    Eigen::SelfAdjointEigenSolver<Mat> es{Mat(A)};
    if (es.info() != Eigen::Success)
        throw std::runtime_error("dense_eigensystem: solver failed");
    values = es.eigenvalues();
    vectors = es.eigenvectors();
}

// Principal eigenpair (and the k smallest eigenvalues) of the assembled
// matrix. Dense below `dense_threshold` nodes, shift-invert Lanczos above.
// The eigenfunction is returned as a grid function, positive, unit norm in
// the weighted L2.
inline EigenSolveResult principal_eig(const SpMat& A, const Grid& grid, int k = 1,
                                      int dense_threshold = 1500) {
    const int n = int(A.rows());
    if (n != grid.size()) throw std::invalid_argument("principal_eig: grid/operator mismatch");
    if (k < 1 || k > std::max(1, n / 10))
        throw std::invalid_argument("principal_eig: need 1 <= k <= n/10");
    std::vector<double> values;
    Mat vectors;
    if (n <= dense_threshold) {
        Vec all;
        Mat vecs;
        dense_eigensystem(A, all, vecs);
        values.assign(all.data(), all.data() + k);
        vectors = vecs.leftCols(k);
    } else {
        detail_eig::lanczos_lowest(A, k, values, vectors);
    }
    EigenSolveResult res;
    res.lambda0 = values[0];
    res.spectrum_head = values;
    Vec psi = vectors.col(0);
    if (psi.sum() < 0.0) psi = -psi;
    double peak = psi.cwiseAbs().maxCoeff();
    for (int i = 0; i < n; ++i)
        if (psi[i] < -1e-8 * peak)
            throw std::runtime_error("principal_eig: ground state not positive");
    res.residual = (A * psi - res.lambda0 * psi).norm() / std::max(1.0, std::abs(res.lambda0));
    if (res.residual > 1e-8)
        throw std::runtime_error("principal_eig: residual " + std::to_string(res.residual) +
                                 " exceeds 1e-8");
    res.phi0.resize(n);
    for (int i = 0; i < n; ++i) res.phi0[i] = psi[i] / std::sqrt(grid.weight[i]);
    return res;
}

// Rayleigh quotient of the assembled operator at a test vector given as a
// grid function (Dirichlet values implied by the grid).
inline double rayleigh_quotient(const SpMat& A, const Grid& grid, const Vec& phi) {
    Vec psi(phi.size());
    for (int i = 0; i < phi.size(); ++i) psi[i] = phi[i] * std::sqrt(grid.weight[i]);
    return psi.dot(A * psi) / psi.squaredNorm();
}

// Lambda(f) = lambda_0^{eu;R} - lambda_0^{eu;f,R}: difference of the two
// principal eigenvalues on the same grid.
inline double lambda_functional(const Grid& grid, const Vec& f) {
    SpMat A0 = assemble(grid, Vec());
    SpMat Af = assemble(grid, f);
    return principal_eig(A0, grid).lambda0 - principal_eig(Af, grid).lambda0;
}

// Gateaux derivative of delta -> lambda_0 of -(Delta + f + delta g):
// -int g u^2 with u the weighted-L2-normalized ground state of -(Delta + f).
inline double eig_derivative(const Grid& grid, const Vec& f, const Vec& g) {
    if (g.size() != grid.size()) throw std::invalid_argument("eig_derivative: size mismatch");
    SpMat A = assemble(grid, f);
    EigenSolveResult res = principal_eig(A, grid);
    double s = 0.0;
    for (int i = 0; i < grid.size(); ++i)
        s += g[i] * detail::sqr(res.phi0[i]) * grid.weight[i];
    return -s;
}

// Parabolic solve d_s v = (L + f) v, v(0) = 1, Dirichlet, by full spectral
// expansion (dense path only), probed at given nodes and horizons.
struct LogAsymptoticReport {
    double lambda0 = 0.0;
    double gap = 0.0;  // lambda_1 - lambda_0
    bool horizon_ok = false;
    std::vector<double> betas;
    std::vector<int> probes;
    Mat log_v;                            // probes x betas
    double max_pointwise_deviation = 0.0; // |(1/beta) log v + lambda0|
    double max_slope_deviation = 0.0;     // |Delta log v / Delta beta + lambda0|
};

inline LogAsymptoticReport log_asymptotic_slope(const Grid& grid, const Vec& f,
                                                const std::vector<double>& betas,
                                                const std::vector<int>& probes) {
    if (grid.size() > 4000)
        throw std::invalid_argument("log_asymptotic_slope: grid too large for the dense path");
    if (betas.size() < 2) throw std::invalid_argument("log_asymptotic_slope: need >= 2 horizons");
    SpMat A = assemble(grid, f);
    Vec lam;
    Mat psi;
    dense_eigensystem(A, lam, psi);
    const int n = grid.size();
    Vec sqw(n);
    for (int i = 0; i < n; ++i) sqw[i] = std::sqrt(grid.weight[i]);
    Vec c = psi.transpose() * sqw;  // expansion coefficients of v(0) = 1

    LogAsymptoticReport rep;
    rep.lambda0 = lam[0];
    rep.gap = lam[1] - lam[0];
    rep.betas = betas;
    rep.probes = probes;
    double beta_min = *std::min_element(betas.begin(), betas.end());
    rep.horizon_ok = std::exp(-rep.gap * beta_min) <= 1e-6;
    rep.log_v.resize(probes.size(), betas.size());
    for (size_t b = 0; b < betas.size(); ++b) {
        double beta = betas[b];
        for (size_t p = 0; p < probes.size(); ++p) {
            int i = probes[p];
            double s = 0.0;
            for (int m = 0; m < n; ++m) {
                double e = std::exp(-(lam[m] - lam[0]) * beta);
                if (e == 0.0) break;  // ascending spectrum: all later terms vanish
                s += e * c[m] * psi(i, m) / sqw[i];
            }
            if (s <= 0.0)
                throw std::runtime_error("log_asymptotic_slope: nonpositive solution at probe");
            double lv = -lam[0] * beta + std::log(s);
            rep.log_v(p, b) = lv;
            rep.max_pointwise_deviation =
                std::max(rep.max_pointwise_deviation, std::abs(lv / beta + lam[0]));
        }
    }
    for (size_t p = 0; p < probes.size(); ++p)
        for (size_t b = 0; b + 1 < betas.size(); ++b) {
            double slope = (rep.log_v(p, b + 1) - rep.log_v(p, b)) / (betas[b + 1] - betas[b]);
            rep.max_slope_deviation = std::max(rep.max_slope_deviation, std::abs(slope + lam[0]));
        }
    return rep;
}

// Restriction of the assembled operator to a node subset (Dirichlet outside).
inline SpMat restrict_operator(const SpMat& A, const std::vector<int>& nodes) {
    const int n = int(A.rows());
    std::vector<int> pos(n, -1);
    for (size_t i = 0; i < nodes.size(); ++i) pos[nodes[i]] = int(i);
    std::vector<Eigen::Triplet<double>> trip;
    for (int c = 0; c < A.outerSize(); ++c) {
        if (pos[c] < 0) continue;
        for (SpMat::InnerIterator it(A, c); it; ++it)
            if (pos[it.row()] >= 0) trip.emplace_back(pos[it.row()], pos[c], it.value());
    }
    SpMat S(int(nodes.size()), int(nodes.size()));
    S.setFromTriplets(trip.begin(), trip.end());
    return S;
}

inline Grid restrict_grid(const Grid& grid, const std::vector<int>& nodes) {
    Grid g = grid;
    g.rho.clear();
    g.theta.clear();
    g.weight.clear();
    for (int i : nodes) {
        g.rho.push_back(grid.rho[i]);
        if (!grid.theta.empty()) g.theta.push_back(grid.theta[i]);
        g.weight.push_back(grid.weight[i]);
    }
    return g;
}

// lambda^{V-Phi}(D) <= sup_m lambda^V(D_m), maximizing sign convention
// (top of the spectrum of L + potential).
struct DecompIneqReport {
    double lambda_full = 0.0;  // lambda^{V-Phi}(D)
    std::vector<double> lambda_cells;
    double sup_cells = 0.0;
    double gap = 0.0;  // sup_cells - lambda_full; inequality demands >= -1e-6
    bool pass = false;
};

inline DecompIneqReport decomposition_inequality_check(const Grid& grid, const Vec& V,
                                                       const Vec& Phi,
                                                       const std::vector<std::vector<int>>& cells,
                                                       int dense_threshold = 1500) {
    if (V.size() != grid.size() || Phi.size() != grid.size())
        throw std::invalid_argument("decomposition_inequality_check: size mismatch");
    if ((Phi.array() < -1e-12).any())
        throw std::invalid_argument("decomposition_inequality_check: Phi must be >= 0");
    DecompIneqReport rep;
    SpMat Afull = assemble(grid, Vec(V - Phi));
    rep.lambda_full = -principal_eig(Afull, grid, 1, dense_threshold).lambda0;
    SpMat AV = assemble(grid, V);
    rep.sup_cells = -std::numeric_limits<double>::infinity();
    for (const auto& cell : cells) {
        if (cell.empty()) throw std::invalid_argument("decomposition_inequality_check: empty cell");
        SpMat Ac = restrict_operator(AV, cell);
        Grid gc = restrict_grid(grid, cell);
        double lam = -principal_eig(Ac, gc, 1, dense_threshold).lambda0;
        rep.lambda_cells.push_back(lam);
        rep.sup_cells = std::max(rep.sup_cells, lam);
    }
    rep.gap = rep.sup_cells - rep.lambda_full;
    rep.pass = rep.gap >= -1e-6;
    return rep;
}

// beta(t) lambda_k^{xi_t}(Sigma_R) = t lambda_k - H(t): both eigenproblems
// on matched (dilated) grids, one field sample evaluated once.
struct EigenScalingReport {
    std::vector<double> lambda_small;  // Delta + xi on (Sigma_{R alpha}, g^1), descending
    std::vector<double> lambda_resc;   // L^t + xi_t on (Sigma_R, g^t), descending
    double max_abs_deviation = 0.0;
    double max_rel_deviation = 0.0;
    double jitter_used = 0.0;
};

inline EigenScalingReport eigen_scaling_check(double R, double t, const CovarianceProfile& profile,
                                              int nr, int ntheta, std::uint64_t seed, int k = 3) {
    ScalingTriple triple(t, profile.sigma2);
    const double a = triple.alpha;
    Grid g_small = make_disk_grid(MetricParams(2, 1.0), R * a, nr, ntheta);
    Grid g_resc = make_disk_grid(MetricParams(2, a), R, nr, ntheta);

    std::vector<HyperPoint> pts;
    pts.reserve(g_small.size());
    for (int i = 0; i < g_small.size(); ++i) {
        Vec sigma(2);
        sigma << std::cos(g_small.theta[i]), std::sin(g_small.theta[i]);
        pts.push_back(HyperPoint::from_polar(g_small.rho[i], sigma, 1.0));
    }
    FieldSample sample = sample_field(pts, profile, seed);
    Vec xi = Eigen::Map<const Vec>(sample.values.data(), long(sample.values.size()));
    Vec xi_t(xi.size());
    double a2 = a * a, ctr = triple.centering();
    for (int i = 0; i < xi.size(); ++i) xi_t[i] = a2 * (xi[i] - ctr);

    EigenSolveResult r1 = principal_eig(assemble(g_small, xi), g_small, k);
    EigenSolveResult r2 = principal_eig(assemble(g_resc, xi_t), g_resc, k);
    EigenScalingReport rep;
    rep.jitter_used = sample.jitter_used;
    double H = triple.H();
    for (int i = 0; i < k; ++i) {
        double lam = -r1.spectrum_head[i];
        double lam_resc = -r2.spectrum_head[i];
        rep.lambda_small.push_back(lam);
        rep.lambda_resc.push_back(lam_resc);
        double target = t * lam - H;
        double dev = std::abs(triple.beta * lam_resc - target);
        rep.max_abs_deviation = std::max(rep.max_abs_deviation, dev);
        rep.max_rel_deviation = std::max(rep.max_rel_deviation, dev / std::max(1.0, std::abs(target)));
    }
    return rep;
}

}  // namespace hypam
