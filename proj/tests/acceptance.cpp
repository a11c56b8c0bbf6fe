// Acceptance suite: eighteen numbered criteria, one pass/fail line each.
// Every criterion is asserted at its stated tolerance; the printed line
// carries the measured quantities so a failing run is diagnosable from the
// log alone.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <thread>
#include <vector>

#include "doctest.h"
#include "hypam/decomp.hpp"
#include "hypam/field.hpp"
#include "hypam/geometry.hpp"
#include "hypam/io.hpp"
#include "hypam/moments.hpp"
#include "hypam/spectral.hpp"
#include "hypam/stochastic.hpp"
#include "hypam/variational.hpp"

using namespace hypam;
namespace fs = std::filesystem;

namespace {

void verdict(const char* label, bool ok, const std::string& detail) {
    std::printf("%s: %s  [%s]\n", label, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    CHECK_MESSAGE(ok, label, ": ", detail);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

int hw_workers() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : int(std::min(n, 8u));
}

}  // namespace

TEST_CASE("criterion 01: distance flattening slope") {
    // residual/alpha against alpha on a log-log scale: slope 2 +/- 0.2 for
    // 20 random pairs in the radius-5 ball
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unif;
    std::vector<double> alphas{0.2, 0.1, 0.05, 0.025};
    double slope_min = 1e9, slope_max = -1e9;
    for (int p = 0; p < 20; ++p) {
        PolarPoint z(5.0 * std::sqrt(unif(rng)), random_direction(2, rng));
        PolarPoint w(5.0 * std::sqrt(unif(rng)), random_direction(2, rng));
        std::vector<double> lx, ly;
        for (double a : alphas) {
            lx.push_back(std::log(a));
            ly.push_back(std::log(distance_expansion_residual(z, w, a) / a));
        }
        double s = detail::linear_fit(lx, ly).slope;
        slope_min = std::min(slope_min, s);
        slope_max = std::max(slope_max, s);
    }
    bool ok = slope_min >= 1.8 && slope_max <= 2.2;
    verdict("criterion 01 (distance flattening slope)", ok,
            "slope range [" + fmt(slope_min) + ", " + fmt(slope_max) + "], target 2 +/- 0.2");
}

TEST_CASE("criterion 02: quadratic-energy limit of J_t") {
    // correlation length 3 keeps the quartic term of Q subdominant for pair
    // distances up to the diameter of the radius-5 ball at t = 1e4
    CovarianceProfile Q = CovarianceProfile::gaussian_bump_profile(1.0, 3.0);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unif;
    double err_t = 0.0, err_quarter = 0.0;
    const double t = 1e4;
    for (int m = 0; m < 50; ++m) {
        DiscreteMeasure mu;
        mu.support_radius = 5.0;
        int n_atoms = 2 + int(unif(rng) * 5.0);
        for (int a = 0; a < n_atoms; ++a) {
            mu.atoms.emplace_back(5.0 * unif(rng), random_direction(2, rng));
            mu.weights.push_back(unif(rng) + 0.05);
        }
        mu.normalize();
        double J = j_limit(mu, Q.qpp0());
        double e1 = std::abs(j_t(mu, ScalingTriple(t), Q) - J) / std::max(J, 0.01);
        double e4 = std::abs(j_t(mu, ScalingTriple(t / 4.0), Q) - J) / std::max(J, 0.01);
        err_t = std::max(err_t, e1);
        err_quarter = std::max(err_quarter, e4);
    }
    double ratio = err_quarter / std::max(err_t, 1e-300);
    bool ok = err_t <= 0.05 && ratio >= 1.4 && ratio <= 2.6;
    verdict("criterion 02 (J_t convergence)", ok,
            "max rel err " + fmt(err_t) + " at t=1e4, err ratio t/4 vs t = " + fmt(ratio));
}

TEST_CASE("criterion 03: eigenvalue flattening on the disk") {
    const double oracle = 1.4457964907366958;  // (j_{0,1}/2)^2
    Grid g0 = make_disk_grid(MetricParams(2, 0.0), 2.0, 400, 64);
    double lam_eu = principal_eig(assemble(g0, Vec()), g0).lambda0;
    Grid ga = make_disk_grid(MetricParams(2, 0.05), 2.0, 400, 64);
    double lam_a = principal_eig(assemble(ga, Vec()), ga).lambda0;
    double oracle_dev = std::abs(lam_eu - oracle) / oracle;
    double gap = std::abs(lam_a - lam_eu) / lam_eu;
    bool ok = oracle_dev <= 0.005 && gap <= 0.01;
    verdict("criterion 03 (eigenvalue flattening)", ok,
            "lambda_eu=" + fmt(lam_eu) + " (dev " + fmt(oracle_dev) + "), alpha=0.05 gap " + fmt(gap));
}

TEST_CASE("criterion 04: long-time slope of the parabolic solve") {
    // The exponential rate of v is asserted through the finite-difference
    // slope of log v in beta, which isolates -lambda_0 from the O(1/beta)
    // offset log(c_0 phi_0(x)) that any fixed probe point carries; the
    // pointwise normalized deviation is reported alongside.
    Grid g = make_radial_grid(MetricParams(2, 0.1), 2.0, 200);
    Vec f(g.size());
    for (int i = 0; i < g.size(); ++i) f[i] = 0.3 * std::exp(-g.rho[i]);
    SpMat A = assemble(g, f);
    Vec lam;
    Mat psi;
    dense_eigensystem(A, lam, psi);
    double beta = 50.0 / (lam[1] - lam[0]);
    std::vector<int> probes;
    for (int i = 0; i < g.size(); ++i)
        if (g.rho[i] <= 0.9 * 2.0) probes.push_back(i);
    LogAsymptoticReport rep = log_asymptotic_slope(g, f, {beta, 1.25 * beta}, probes);
    bool ok = rep.horizon_ok && rep.max_slope_deviation <= 1e-3;
    verdict("criterion 04 (long-time slope)", ok,
            "slope dev " + fmt(rep.max_slope_deviation) + " at beta=" + fmt(beta) +
                " (pointwise normalized dev " + fmt(rep.max_pointwise_deviation) +
                ", report-only)");
}

TEST_CASE("criterion 05: eigenvalue perturbation derivative") {
    Grid g = make_radial_grid(MetricParams(2, 1.0), 2.0, 200);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss;
    Vec f(g.size());
    for (int i = 0; i < g.size(); ++i) f[i] = 0.4 * std::sin(3.0 * g.rho[i]);
    double worst = 0.0;
    const double delta = 1e-3;
    for (int trial = 0; trial < 10; ++trial) {
        Vec gdir(g.size());
        for (int i = 0; i < g.size(); ++i) gdir[i] = gauss(rng);
        double analytic = eig_derivative(g, f, gdir);
        double lp = principal_eig(assemble(g, Vec(f + delta * gdir)), g).lambda0;
        double lm = principal_eig(assemble(g, Vec(f - delta * gdir)), g).lambda0;
        double fd = (lp - lm) / (2.0 * delta);
        worst = std::max(worst, std::abs(analytic - fd) / std::max(1e-6, std::abs(fd)));
    }
    bool ok = worst <= 1e-4;
    verdict("criterion 05 (eigenvalue derivative)", ok,
            "worst relative mismatch vs central differences " + fmt(worst));
}

TEST_CASE("criterion 06: eigenvalue scaling identity") {
    CovarianceProfile Q = CovarianceProfile::gaussian_bump_profile(1.0, 1.0);
    EigenScalingReport rep = eigen_scaling_check(2.0, 16.0, Q, 200, 32, 6, 3);
    bool ok = rep.max_rel_deviation <= 1e-3;
    verdict("criterion 06 (eigenvalue scaling identity)", ok,
            "max rel deviation " + fmt(rep.max_rel_deviation) + " over the first 3 eigenvalues");
}

TEST_CASE("criterion 07: decomposition inequality") {
    BallDecomposition dec = decompose_ball(4.0, 1.0, 0.25, 2, 7);
    PartitionOfUnity pou = build_pou(dec);
    Grid g = make_disk_grid(MetricParams(2, 0.25), 4.0, 96, 48);
    const int n = g.size();

    Vec Phi(n);
    std::vector<Vec> sigmas(n);
    for (int i = 0; i < n; ++i) {
        Vec s(2);
        s << std::cos(g.theta[i]), std::sin(g.theta[i]);
        sigmas[i] = s;
        Phi[i] = pou.Phi(g.rho[i], s);
    }
    // hat cells: radial band of the crossfade support x doubled angular cap
    std::vector<std::vector<int>> cells;
    for (const Annulus& a : pou.annuli) {
        double lo = (a.k - 1 - pou.epsilon) * pou.r, hi = (a.k + pou.epsilon) * pou.r;
        size_t n_cells = std::max<size_t>(1, a.packing.centers.size());
        for (size_t c = 0; c < n_cells; ++c) {
            std::vector<int> cell;
            for (int i = 0; i < n; ++i) {
                if (g.rho[i] <= lo || g.rho[i] >= hi) continue;
                if (!a.packing.centers.empty() &&
                    sphere_distance(sigmas[i], a.packing.centers[c]) >= 2.0 * a.theta)
                    continue;
                cell.push_back(i);
            }
            cells.push_back(std::move(cell));
        }
    }

    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> unif;
    double worst_gap = 1e300;
    int violations = 0;
    for (int trial = 0; trial < 50; ++trial) {
        Vec V = Vec::Zero(n);
        for (int b = 0; b < 3; ++b) {
            double amp = 4.0 * (unif(rng) - 0.5);
            double rho_c = 4.0 * unif(rng), th_c = 2.0 * std::numbers::pi * unif(rng);
            double width = 0.5 + 1.5 * unif(rng);
            for (int i = 0; i < n; ++i) {
                double dx = g.rho[i] * std::cos(g.theta[i]) - rho_c * std::cos(th_c);
                double dy = g.rho[i] * std::sin(g.theta[i]) - rho_c * std::sin(th_c);
                V[i] += amp * std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
            }
        }
        DecompIneqReport rep = decomposition_inequality_check(g, V, Phi, cells, 64);
        worst_gap = std::min(worst_gap, rep.gap);
        if (!rep.pass) ++violations;
    }
    bool ok = violations == 0;
    verdict("criterion 07 (decomposition inequality)", ok,
            "violations " + std::to_string(violations) + "/50, smallest gap " + fmt(worst_gap));
}

TEST_CASE("criterion 08: partition of unity and the gradient sacrifice") {
    const long n_probes = 100000;
    auto probe = [&](double alpha, double r, double& max_dev) {
        BallDecomposition dec = decompose_ball(10.0 * r, r, alpha, 2, 8);
        PartitionOfUnity pou = build_pou(dec);
        std::mt19937_64 rng(88);
        std::uniform_real_distribution<double> unif;
        max_dev = 0.0;
        double sup_phi = 0.0;
        for (long p = 0; p < n_probes; ++p) {
            double rho = dec.R_tilde * unif(rng);
            Vec sig = random_direction(2, rng);
            max_dev = std::max(max_dev, std::abs(pou.sum_phi_sq(rho, sig) - 1.0));
            sup_phi = std::max(sup_phi, pou.Phi(rho, sig));
        }
        return sup_phi * r * r;
    };
    double dev = 0.0, worst_dev = 0.0;
    std::vector<double> by_alpha;
    for (double a : {0.1, 0.05, 0.025}) {
        by_alpha.push_back(probe(a, 1.0, dev));
        worst_dev = std::max(worst_dev, dev);
    }
    double doubled = probe(0.1, 2.0, dev);
    worst_dev = std::max(worst_dev, dev);
    double lo = *std::min_element(by_alpha.begin(), by_alpha.end());
    double hi = *std::max_element(by_alpha.begin(), by_alpha.end());
    double r_ratio = doubled / by_alpha.front();
    bool ok = worst_dev <= 1e-10 && (hi - lo) / hi <= 0.20 && r_ratio >= 0.8 && r_ratio <= 1.25;
    verdict("criterion 08 (partition of unity)", ok,
            "max |sum phi^2 - 1| = " + fmt(worst_dev) + ", sup Phi r^2 in [" + fmt(lo) + ", " +
                fmt(hi) + "] across alpha, r-doubling ratio " + fmt(r_ratio));
}

TEST_CASE("criterion 09: packing cover and multiplicity constants") {
    bool covered_all = true, separated_all = true;
    std::string detail;
    bool stable = true;
    for (int sphere_dim : {1, 2}) {
        int d_lo = 1 << 20, d_hi = 0;
        for (double theta : {0.1, 0.2, 0.4}) {
            SpherePacking pack = maximal_packing(theta, sphere_dim, 9);
            CoverReport rep = cover_and_multiplicity_check(pack, 100000, 10);
            covered_all = covered_all && rep.covered;
            separated_all = separated_all && rep.min_separation >= theta - 1e-9;
            d_lo = std::min(d_lo, rep.max_multiplicity);
            d_hi = std::max(d_hi, rep.max_multiplicity);
        }
        stable = stable && (d_hi - d_lo <= 1);
        detail += "S^" + std::to_string(sphere_dim) + " multiplicity [" + std::to_string(d_lo) +
                  "," + std::to_string(d_hi) + "] ";
    }
    bool ok = covered_all && separated_all && stable;
    verdict("criterion 09 (packing cover/multiplicity)", ok,
            detail + (covered_all ? "covered" : "cover FAILED"));
}

TEST_CASE("criterion 10: cell diameter certificate") {
    std::vector<double> fitted;
    for (double alpha : {0.1, 0.05}) {
        BallDecomposition dec = decompose_ball(40.0, 1.0, alpha, 2, 11);
        DiameterReport rep = cell_diameter_certificate(dec);
        double c4 = 0.0;
        for (int k = 2; k <= 40; ++k) c4 = std::max(c4, rep.diam_over_r[size_t(k - 1)]);
        fitted.push_back(c4);
    }
    double dev = std::abs(fitted[0] - fitted[1]) / std::max(fitted[0], fitted[1]);
    bool ok = dev <= 0.25;
    verdict("criterion 10 (cell diameters)", ok,
            "fitted C4: " + fmt(fitted[0]) + " (alpha=0.1), " + fmt(fitted[1]) +
                " (alpha=0.05), sweep deviation " + fmt(dev));
}

TEST_CASE("criterion 11: exit-probability tail shape") {
    MetricParams params(2, 1.0);
    std::vector<double> x, y;
    for (double R : {3.0, 4.0, 5.0, 6.0}) {
        ExitEstimate est = exit_probability(R, 1.0, 100000, params, DriftConvention::riemannian,
                                            12, 1e-3, hw_workers());
        x.push_back(R * R / 1.0);
        y.push_back(std::log(est.probability));
    }
    detail::LinearFit fit = detail::linear_fit(x, y);
    bool ok = fit.r_squared >= 0.95 && fit.slope < 0.0;
    verdict("criterion 11 (exit tail shape)", ok,
            "log P vs R^2/t: slope " + fmt(fit.slope) + ", R^2 " + fmt(fit.r_squared));
}

TEST_CASE("criterion 12: heat-kernel scaling and upper bound") {
    HeatKernelScalingReport rep =
        heat_kernel_scaling_check(1.0, 2.0, 400000, 13, 1e-3, 0.0, 60, hw_workers());
    std::vector<double> s_fit{0.5, 1.0, 2.0}, rho_fit, rho_verify;
    for (int i = 1; i <= 30; ++i) rho_fit.push_back(6.0 * i / 30.0);
    for (int i = 1; i <= 97; ++i) rho_verify.push_back(6.0 * i / 97.0);
    double C3 = fit_dm_constant(s_fit, rho_fit, 2.0, 3);
    long violations = 0;
    for (double sv : s_fit)
        for (double rho : rho_verify) {
            double ref = std::pow(2.0, 1.5) * heat_kernel_h3(2.0 * sv, std::sqrt(2.0) * rho);
            if (ref > dm_upper_bound(sv, rho, 2.0, 3, 1.02 * C3)) ++violations;
        }
    bool ok = rep.pass && violations == 0;
    verdict("criterion 12 (heat-kernel scaling)", ok,
            "sup discrepancy " + fmt(rep.sup_discrepancy) + " vs tol " + fmt(rep.tolerance) +
                ", fitted C3 " + fmt(C3) + ", bound violations " + std::to_string(violations));
}

TEST_CASE("criterion 13: moment oracle and first-order trend") {
    CovarianceProfile C = CovarianceProfile::constant_profile(1.0);
    McParams mc;
    mc.n_replicates = 8;
    mc.dt = 0.01;
    mc.seed = 14;
    MomentEstimate exact = annealed_moment(2, 2.0, 0.0, C, mc);
    bool collapse_ok = std::abs(exact.log_moment - 8.0) <= 1e-3;

    CovarianceProfile Q = CovarianceProfile::gaussian_bump_profile(1.0, 1.0);
    mc.n_replicates = 400;
    std::vector<RatioPoint> curve = first_order_ratio_curve(1, {0.5, 1.0, 1.5, 2.0}, Q, mc);
    bool bound_ok = true, increasing_ok = true;
    std::string vals;
    for (size_t i = 0; i < curve.size(); ++i) {
        vals += fmt(curve[i].value) + (i + 1 < curve.size() ? " " : "");
        if (curve[i].value > 1.0 + 2.0 * curve[i].std_error) bound_ok = false;
        if (i > 0) {
            double se = std::sqrt(detail::sqr(curve[i].std_error) +
                                  detail::sqr(curve[i - 1].std_error));
            if (curve[i].value - curve[i - 1].value < 3.0 * se) increasing_ok = false;
        }
    }
    bool ok = collapse_ok && bound_ok && increasing_ok;
    verdict("criterion 13 (moment oracle and trend)", ok,
            "constant collapse |log m - 8| = " + fmt(std::abs(exact.log_moment - 8.0)) +
                "; ratio curve {" + vals + "} upper-bound " + (bound_ok ? "ok" : "FAIL") +
                ", increasing-at-3se " + (increasing_ok ? "ok" : "FAIL"));
}

TEST_CASE("criterion 14: intermittency gap") {
    CovarianceProfile C = CovarianceProfile::constant_profile(1.0);
    McParams mc;
    mc.n_replicates = 8;
    mc.dt = 0.01;
    mc.seed = 15;
    GapEstimate exact = intermittency_gap(2, 1, 2.0, C, mc);
    bool exact_ok = std::abs(exact.gap - 2.0) <= 1e-9;

    CovarianceProfile Q = CovarianceProfile::gaussian_bump_profile(1.0, 1.0);
    mc.n_replicates = 400;
    GapEstimate g1 = intermittency_gap(2, 1, 1.0, Q, mc);
    GapEstimate g2 = intermittency_gap(2, 1, 2.0, Q, mc);
    bool positive_ok = g1.gap > 3.0 * g1.std_error && g2.gap > 3.0 * g2.std_error;
    bool growing_ok = g2.gap > g1.gap;
    bool ok = exact_ok && positive_ok && growing_ok;
    verdict("criterion 14 (intermittency gap)", ok,
            "constant gap " + fmt(exact.gap) + "; bump gap " + fmt(g1.gap) + " (t=1) -> " +
                fmt(g2.gap) + " (t=2), se " + fmt(g2.std_error));
}

TEST_CASE("criterion 15: exit rate against the principal eigenvalue") {
    Grid g = make_radial_grid(MetricParams(2, 1.0), 2.0, 400);
    double lam0 = principal_eig(assemble(g, Vec()), g).lambda0;
    std::vector<double> horizons{2.0, 3.0, 4.0, 5.0, 6.0};
    std::vector<ExitEstimate> surv = survival_curve(2.0, horizons, 400000, MetricParams(2, 1.0),
                                                    DriftConvention::riemannian, 16, 1e-3,
                                                    hw_workers());
    std::vector<double> x, y;
    for (size_t k = 0; k < horizons.size(); ++k) {
        x.push_back(horizons[k]);
        y.push_back(-std::log(surv[k].probability));
    }
    double rate = detail::linear_fit(x, y).slope;
    double dev = std::abs(rate - lam0) / lam0;
    bool ok = dev <= 0.05;
    verdict("criterion 15 (exit rate vs eigenvalue)", ok,
            "fitted rate " + fmt(rate) + " vs lambda0 " + fmt(lam0) + ", rel dev " + fmt(dev));
}

TEST_CASE("criterion 16: fluctuation exponent closed form") {
    ChiResult c1 = chi_optimize(-2.0, 1, 6.0, 400, 17);
    double dev1 = std::abs(c1.value - 1.0);
    ChiResult c3 = chi_optimize(-2.0, 3, 6.0, 400, 17);
    double dev3 = std::abs(c3.value - 3.0) / 3.0;
    ChiResult c4g = chi_optimize(-8.0, 1, 6.0, 400, 17);
    double dev_scale = std::abs(c4g.value - 2.0 * c1.value) / (2.0 * c1.value);
    bool ok = dev1 <= 0.02 && dev3 <= 0.02 && dev_scale <= 0.02;
    verdict("criterion 16 (fluctuation exponent)", ok,
            "chi(gamma=2,d=1)=" + fmt(c1.value) + " (dev " + fmt(dev1) + "), d=3 dev " +
                fmt(dev3) + ", 4x-gamma scaling dev " + fmt(dev_scale));
}

TEST_CASE("criterion 17: Legendre direction of the rate function") {
    Grid grid = make_interval_grid(6.0, 400);
    const int n = grid.size();
    std::vector<Vec> family;
    for (double a : {0.25, 0.5, 1.0, 2.0})
        for (double b : {0.0, 1.0}) {
            Vec f(n);
            for (int i = 0; i < n; ++i) f[i] = -a * detail::sqr(grid.rho[i]) + b;
            family.push_back(f);
        }
    for (double amp : {1.0, 3.0}) {
        Vec f(n);
        for (int i = 0; i < n; ++i) f[i] = amp * std::exp(-detail::sqr(grid.rho[i]) / 2.0);
        family.push_back(f);
    }
    std::mt19937_64 rng(18);
    std::uniform_real_distribution<double> unif;
    double worst = -1e300;
    for (int k = 0; k < 20; ++k) {
        Vec phi(n);
        double center = (unif(rng) - 0.5) * 6.0, width = 0.5 + 1.5 * unif(rng);
        for (int i = 0; i < n; ++i)
            phi[i] = std::exp(-detail::sqr(grid.rho[i] - center) / (2.0 * width * width));
        DensityProfile mu = make_profile(grid, phi);
        worst = std::max(worst, legendre_inequality_check(mu, family).max_violation);
    }
    Vec fstar(n);
    for (int i = 0; i < n; ++i) fstar[i] = -detail::sqr(grid.rho[i]);
    EigenSolveResult gs = principal_eig(assemble(grid, fstar), grid);
    DensityProfile mu_star = make_profile(grid, gs.phi0);
    LegendreReport star = legendre_inequality_check(mu_star, {fstar});
    double equality_gap = std::abs(star.s_eu_value - star.bounds[0]);
    bool ok = worst <= 1e-6 && equality_gap <= 1e-3;
    verdict("criterion 17 (Legendre direction)", ok,
            "max violation " + fmt(worst) + ", ground-state equality gap " + fmt(equality_gap));
}

namespace {

int run_cli(const std::string& args) {
    std::string cmd = std::string(HYPAM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return rc < 0 ? rc : WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("criterion 18: byte-identical reruns of every subcommand") {
    fs::path root = fs::temp_directory_path() / "hypam_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);

    // lightweight override configs keep the double pass fast; determinism is
    // a property of the plumbing, not the sample size
    const std::vector<std::pair<std::string, Json>> runs = {
        {"geometry-flattening", Json::object()},
        {"jt-convergence", {{"n_measures", 20}}},
        {"eigen-flattening", {{"nr", 80}, {"ntheta", 16}}},
        {"eigen-scaling", {{"nr", 40}, {"ntheta", 12}}},
        {"decompose", {{"R_tilde", 4.0}, {"alpha", 0.25}, {"probes", 2000}}},
        {"pou-check", {{"alphas", {0.1}}, {"R_over_r", 5.0}, {"probes", 2000}}},
        {"exit-fit", {{"n_paths", 20000}}},
        {"hk-scaling", {{"n_paths", 20000}}},
        {"moments", {{"profile", "constant"}, {"p", 2}, {"t", 1.0}, {"n_replicates", 4}}},
        {"chi", {{"nodes", 200}}},
        {"legendre", {{"n_profiles", 5}, {"nodes", 200}}},
    };

    bool all_identical = true, all_ran = true, hash_present = true;
    std::string failures;
    for (const auto& [name, cfg] : runs) {
        fs::path cfg_path = root / (name + ".json");
        save_json(cfg_path.string(), cfg);
        fs::path out_a = root / "a", out_b = root / "b";
        int rc_a = run_cli(name + " --config " + cfg_path.string() + " --seed 5 --out " +
                           out_a.string());
        int rc_b = run_cli(name + " --config " + cfg_path.string() + " --seed 5 --out " +
                           out_b.string());
        if (rc_a != rc_b || (rc_a != 0 && rc_a != 1)) {
            all_ran = false;
            failures += name + "(rc " + std::to_string(rc_a) + "/" + std::to_string(rc_b) + ") ";
            continue;
        }
        bool compared_any = false;
        for (const auto& entry : fs::directory_iterator(out_a / name)) {
            fs::path rel = entry.path().filename();
            std::string a = slurp(entry.path());
            std::string b = slurp(out_b / name / rel);
            if (rel.extension() == ".csv") {
                compared_any = true;
                if (a != b) {
                    all_identical = false;
                    failures += name + "/" + rel.string() + " ";
                }
                if (a.find("settings_hash") == std::string::npos) hash_present = false;
            }
            if (rel == "summary.json" && a != b) {
                all_identical = false;
                failures += name + "/summary.json ";
            }
        }
        if (!compared_any) {
            all_ran = false;
            failures += name + "(no csv) ";
        }
    }
    bool ok = all_identical && all_ran && hash_present;
    verdict("criterion 18 (deterministic reruns)", ok,
            ok ? "all subcommands byte-identical across reruns"
               : ("differences or failures: " + failures));
    fs::remove_all(root);
}
