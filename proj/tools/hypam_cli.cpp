// Experiment runner: every module's headline experiment as a subcommand with
// JSON configs, deterministic seeds, and CSV/JSON artifacts.
//
// Conventions: defaults < --config file < inline flags. Each run writes its
// CSV data, a summary.json {status, metrics}, and a log into --out. Every
// CSV row carries the settings hash, and a rerun with the same config and
// seed is byte-identical. Exit code 0 iff no asserted invariant failed
// (trend curves are report-only).

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "hypam/decomp.hpp"
#include "hypam/field.hpp"
#include "hypam/geometry.hpp"
#include "hypam/io.hpp"
#include "hypam/moments.hpp"
#include "hypam/spectral.hpp"
#include "hypam/stochastic.hpp"
#include "hypam/variational.hpp"

namespace fs = std::filesystem;
using hypam::Json;
using hypam::Vec;

namespace {

struct Ctx {
    Json config;
    std::string out_dir;
    std::string hash;
    std::ofstream log;

    std::string fd(double v) const { return hypam::format_double(v); }

    void note(const std::string& line) {
        log << line << "\n";
        std::cout << line << "\n";
    }
};

hypam::CovarianceProfile profile_from(const Json& c) {
    std::string kind = c.value("profile", "gaussian-bump");
    double sigma2 = c.value("sigma2", 1.0);
    if (kind == "constant") return hypam::CovarianceProfile::constant_profile(sigma2);
    if (kind == "gaussian-bump")
        return hypam::CovarianceProfile::gaussian_bump_profile(sigma2, c.value("ell", 1.0));
    if (kind == "compact-bump")
        return hypam::CovarianceProfile::compact_bump_profile(sigma2, c.value("support", 1.0));
    throw std::invalid_argument("unknown profile: " + kind);
}

hypam::DriftConvention convention_from(const Json& c) {
    std::string s = c.value("convention", "riemannian");
    if (s == "paper") return hypam::DriftConvention::paper;
    if (s == "riemannian") return hypam::DriftConvention::riemannian;
    throw std::invalid_argument("unknown drift convention: " + s);
}

// ---------------------------------------------------------------- geometry

Json run_geometry_flattening(Ctx& ctx) {
    const Json& c = ctx.config;
    int d = c.value("d", 2);
    double R = c.value("R", 5.0);
    int n_pairs = c.value("n_pairs", 20);
    std::vector<double> alphas = c.value("alphas", std::vector<double>{0.2, 0.1, 0.05, 0.025});
    std::mt19937_64 rng(c.value("seed", 1));
    std::uniform_real_distribution<double> unif;

    hypam::CsvWriter csv(ctx.out_dir + "/residuals.csv",
                         {"pair", "alpha", "residual", "normalized_residual", "settings_hash"});
    hypam::CsvWriter fits(ctx.out_dir + "/slopes.csv", {"pair", "slope", "settings_hash"});
    double slope_min = 1e9, slope_max = -1e9;
    for (int p = 0; p < n_pairs; ++p) {
        hypam::PolarPoint z(R * std::sqrt(unif(rng)), hypam::random_direction(d, rng));
        hypam::PolarPoint w(R * std::sqrt(unif(rng)), hypam::random_direction(d, rng));
        std::vector<double> lx, ly;
        for (double a : alphas) {
            double res = hypam::distance_expansion_residual(z, w, a);
            double norm_res = res / a;
            csv.row({std::to_string(p), ctx.fd(a), ctx.fd(res), ctx.fd(norm_res), ctx.hash});
            lx.push_back(std::log(a));
            ly.push_back(std::log(norm_res));
        }
        double slope = hypam::detail::linear_fit(lx, ly).slope;
        fits.row({std::to_string(p), ctx.fd(slope), ctx.hash});
        slope_min = std::min(slope_min, slope);
        slope_max = std::max(slope_max, slope);
    }
    bool pass = slope_min >= 1.8 && slope_max <= 2.2;
    ctx.note("slope range [" + ctx.fd(slope_min) + ", " + ctx.fd(slope_max) + "], target 2 +/- 0.2");
    return Json{{"status", pass ? "pass" : "fail"},
                {"metrics", {{"slope_min", slope_min}, {"slope_max", slope_max}}}};
}

Json run_jt_convergence(Ctx& ctx) {
    const Json& c = ctx.config;
    int d = c.value("d", 2);
    double R = c.value("R", 5.0);
    int n_measures = c.value("n_measures", 50);
    double t = c.value("t", 1e4);
    Json cq = c;
    // a correlation length comparable to the support radius keeps the
    // quartic term of Q subdominant at the default horizon
    if (!cq.contains("ell")) cq["ell"] = 3.0;
    hypam::CovarianceProfile Q = profile_from(cq);
    std::mt19937_64 rng(c.value("seed", 1));
    std::uniform_real_distribution<double> unif;

    hypam::CsvWriter csv(ctx.out_dir + "/jt.csv",
                         {"measure", "t", "j_t", "j_limit", "rel_error", "settings_hash"});
    double max_err_t = 0.0, max_err_quarter = 0.0;
    for (int m = 0; m < n_measures; ++m) {
        hypam::DiscreteMeasure mu;
        mu.support_radius = R;
        int n_atoms = 2 + int(unif(rng) * 5.0);
        for (int a = 0; a < n_atoms; ++a) {
            mu.atoms.emplace_back(R * unif(rng), hypam::random_direction(d, rng));
            mu.weights.push_back(unif(rng) + 0.05);
        }
        mu.normalize();
        double J = hypam::j_limit(mu, Q.qpp0());
        for (double tt : {t / 4.0, t}) {
            double Jt = hypam::j_t(mu, hypam::ScalingTriple(tt, Q.sigma2), Q);
            double err = std::abs(Jt - J) / std::max(J, 0.01);
            csv.row({std::to_string(m), ctx.fd(tt), ctx.fd(Jt), ctx.fd(J), ctx.fd(err), ctx.hash});
            (tt == t ? max_err_t : max_err_quarter) = std::max(tt == t ? max_err_t : max_err_quarter, err);
        }
    }
    double ratio = max_err_quarter / std::max(max_err_t, 1e-300);
    bool pass = max_err_t <= 0.05 && ratio >= 1.4 && ratio <= 2.6;
    ctx.note("max rel error " + ctx.fd(max_err_t) + " at t=" + ctx.fd(t) + ", error ratio t/4 vs t = " +
             ctx.fd(ratio) + " (rate sqrt(t))");
    return Json{{"status", pass ? "pass" : "fail"},
                {"metrics",
                 {{"max_rel_error", max_err_t},
                  {"max_rel_error_quarter_t", max_err_quarter},
                  {"error_ratio", ratio}}}};
}

// ---------------------------------------------------------------- spectral

Json run_eigen_flattening(Ctx& ctx) {
    const Json& c = ctx.config;
    double R = c.value("R", 2.0);
    int nr = c.value("nr", 400), nt = c.value("ntheta", 64);
    std::vector<double> alphas = c.value("alphas", std::vector<double>{0.2, 0.1, 0.05});
    const double bessel_oracle = 1.4457964907366958;  // (j_{0,1}/2)^2

    hypam::CsvWriter csv(ctx.out_dir + "/lambda0.csv", {"alpha", "lambda0", "settings_hash"});
    hypam::Grid g0 = hypam::make_disk_grid(hypam::MetricParams(2, 0.0), R, nr, nt);
    double lam_eu = hypam::principal_eig(hypam::assemble(g0, Vec()), g0).lambda0;
    csv.row({ctx.fd(0.0), ctx.fd(lam_eu), ctx.hash});
    std::vector<double> lams;
    for (double a : alphas) {
        hypam::Grid g = hypam::make_disk_grid(hypam::MetricParams(2, a), R, nr, nt);
        double lam = hypam::principal_eig(hypam::assemble(g, Vec()), g).lambda0;
        lams.push_back(lam);
        csv.row({ctx.fd(a), ctx.fd(lam), ctx.hash});
    }
    bool monotone = true;
    for (size_t i = 0; i + 1 < lams.size(); ++i)
        if (lams[i] < lams[i + 1]) monotone = false;
    if (!lams.empty() && lams.back() < lam_eu) monotone = false;
    double gap = std::abs(lams.back() - lam_eu) / lam_eu;
    double oracle_dev = std::abs(lam_eu - bessel_oracle) / bessel_oracle;
    bool pass = monotone && gap <= 0.01 && oracle_dev <= 0.005;
    ctx.note("lambda0_eu = " + ctx.fd(lam_eu) + " (oracle dev " + ctx.fd(oracle_dev) +
             "), gap at smallest alpha = " + ctx.fd(gap) + ", monotone=" + std::to_string(monotone));
    return Json{{"status", pass ? "pass" : "fail"},
                {"metrics",
                 {{"lambda0_eu", lam_eu},
                  {"oracle_rel_dev", oracle_dev},
                  {"flattening_gap", gap},
                  {"monotone", monotone}}}};
}

Json run_eigen_scaling(Ctx& ctx) {
    const Json& c = ctx.config;
    hypam::EigenScalingReport rep = hypam::eigen_scaling_check(
        c.value("R", 2.0), c.value("t", 16.0), profile_from(ctx.config), c.value("nr", 200),
        c.value("ntheta", 32), c.value("seed", 1), c.value("k", 3));
    hypam::CsvWriter csv(ctx.out_dir + "/eigen_scaling.csv",
                         {"k", "lambda_small", "lambda_rescaled", "settings_hash"});
    for (size_t k = 0; k < rep.lambda_small.size(); ++k)
        csv.row({std::to_string(k), ctx.fd(rep.lambda_small[k]), ctx.fd(rep.lambda_resc[k]), ctx.hash});
    bool pass = rep.max_rel_deviation <= 1e-3;
    ctx.note("max relative deviation of the scaling identity: " + ctx.fd(rep.max_rel_deviation));
    return Json{{"status", pass ? "pass" : "fail"},
                {"metrics",
                 {{"max_rel_deviation", rep.max_rel_deviation},
                  {"max_abs_deviation", rep.max_abs_deviation},
                  {"jitter_used", rep.jitter_used}}}};
}

// ------------------------------------------------------------------ decomp

Json run_decompose(Ctx& ctx) {
    const Json& c = ctx.config;
    double R_tilde = c.value("R_tilde", 10.0), r = c.value("r", 1.0), alpha = c.value("alpha", 0.1);
    int d = c.value("d", 2);
    long probes = c.value("probes", 100000L);
    std::uint64_t seed = c.value("seed", 1);
    hypam::BallDecomposition dec = hypam::decompose_ball(R_tilde, r, alpha, d, seed);
    hypam::CoveringCertificate cover = hypam::covering_certificate(dec, probes, seed + 777);
    hypam::DiameterReport diam = hypam::cell_diameter_certificate(dec);

    hypam::CsvWriter csv(ctx.out_dir + "/annuli.csv",
                         {"k", "theta_k", "n_centers", "min_separation", "max_multiplicity",
                          "diam_over_r", "settings_hash"});
    bool separated = true;
    int max_mult = 0;
    for (const hypam::Annulus& a : dec.annuli) {
        hypam::CoverReport cr =
            hypam::cover_and_multiplicity_check(a.packing, probes / dec.K, seed + 1000 + a.k);
        if (cr.min_separation < a.theta - 1e-9 && a.packing.centers.size() > 1) separated = false;
        max_mult = std::max(max_mult, cr.max_multiplicity);
        csv.row({std::to_string(a.k), ctx.fd(a.theta), std::to_string(a.packing.centers.size()),
                 ctx.fd(cr.min_separation), std::to_string(cr.max_multiplicity),
                 ctx.fd(diam.diam_over_r[size_t(a.k - 1)]), ctx.hash});
    }
    double bound = (dec.R_tilde / dec.r) *
                   std::pow(std::sinh(dec.R_tilde * alpha) / std::sinh(alpha * r / 2.0), d - 1);
    double fitted_C3 = double(dec.cell_count()) / bound;
    bool pass = cover.covered && separated;
    ctx.note("cells=" + std::to_string(dec.cell_count()) + ", covered=" + std::to_string(cover.covered) +
             ", fitted C3=" + ctx.fd(fitted_C3) + ", max diam/r=" + ctx.fd(diam.max_diam_over_r));
    return Json{{"status", pass ? "pass" : "fail"},
                {"metrics",
                 {{"cells", dec.cell_count()},
                  {"covered", cover.covered},
                  {"cover_misses", cover.misses},
                  {"separated", separated},
                  {"max_multiplicity", max_mult},
                  {"fitted_C3", fitted_C3},
                  {"max_diam_over_r", diam.max_diam_over_r},
                  {"min_cell_over_ball_volume", cover.min_cell_over_ball_volume}}}};
}

Json run_pou_check(Ctx& ctx) {
    const Json& c = ctx.config;
    double r = c.value("r", 1.0);
    double R_over_r = c.value("R_over_r", 10.0);
    double epsilon = c.value("epsilon", 1.0 / 3.0);
    std::vector<double> alphas = c.value("alphas", std::vector<double>{0.1, 0.05, 0.025});
    long probes = c.value("probes", 100000L);
    std::uint64_t seed = c.value("seed", 1);

    hypam::CsvWriter csv(ctx.out_dir + "/pou.csv",
                         {"alpha", "r", "max_partition_dev", "sup_phi_r_sq", "settings_hash"});
    auto probe_pou = [&](double alpha, double rr, double& max_dev) {
        hypam::BallDecomposition dec =
            hypam::decompose_ball(R_over_r * rr, rr, alpha, 2, seed);
        hypam::PartitionOfUnity pou = hypam::build_pou(dec, epsilon);
        std::mt19937_64 rng(seed + 99);
        std::uniform_real_distribution<double> unif;
        max_dev = 0.0;
        double sup_phi = 0.0;
        for (long p = 0; p < probes; ++p) {
            double rho = dec.R_tilde * unif(rng);
            Vec sig = hypam::random_direction(2, rng);
            max_dev = std::max(max_dev, std::abs(pou.sum_phi_sq(rho, sig) - 1.0));
            sup_phi = std::max(sup_phi, pou.Phi(rho, sig));
        }
        double val = sup_phi * rr * rr;
        csv.row({ctx.fd(alpha), ctx.fd(rr), ctx.fd(max_dev), ctx.fd(val), ctx.hash});
        return val;
    };

    double worst_dev = 0.0, dev = 0.0;
    std::vector<double> sup_by_alpha;
    for (double a : alphas) {
        sup_by_alpha.push_back(probe_pou(a, r, dev));
        worst_dev = std::max(worst_dev, dev);
    }
    double sup_r2 = probe_pou(alphas.front(), 2.0 * r, dev);
    worst_dev = std::max(worst_dev, dev);

    double lo = *std::min_element(sup_by_alpha.begin(), sup_by_alpha.end());
    double hi = *std::max_element(sup_by_alpha.begin(), sup_by_alpha.end());
    bool alpha_stable = (hi - lo) / hi <= 0.20;
    double r_ratio = sup_r2 / sup_by_alpha.front();
    bool r_stable = r_ratio >= 0.8 && r_ratio <= 1.25;
    bool partition_ok = worst_dev <= 1e-10;
    bool pass = partition_ok && alpha_stable && r_stable;
    ctx.note("max |sum phi^2 - 1| = " + ctx.fd(worst_dev) + ", sup Phi r^2 range [" + ctx.fd(lo) +
             ", " + ctx.fd(hi) + "], r-doubling ratio " + ctx.fd(r_ratio));
    return Json{{"status", pass ? "pass" : "fail"},
                {"metrics",
                 {{"max_partition_dev", worst_dev},
                  {"sup_phi_r_sq_by_alpha", sup_by_alpha},
                  {"sup_phi_r_sq_doubled_r", sup_r2},
                  {"alpha_stable", alpha_stable},
                  {"r_stable", r_stable}}}};
}

// -------------------------------------------------------------- stochastic

Json run_exit_fit(Ctx& ctx) {
    const Json& c = ctx.config;
    double t = c.value("t", 1.0), dt = c.value("dt", 1e-3);
    hypam::MetricParams params(c.value("d", 2), c.value("alpha", 1.0));
    std::vector<double> R_list = c.value("R_list", std::vector<double>{3.0, 4.0, 5.0, 6.0});
    long n_paths = c.value("n_paths", 100000L);
    int workers = c.value("workers", 1);
    hypam::DriftConvention conv = convention_from(c);

    hypam::CsvWriter csv(ctx.out_dir + "/exit.csv",
                         {"R", "t", "p_exit", "std_error", "hits", "settings_hash"});
    std::vector<double> x, y;
    for (double R : R_list) {
        hypam::ExitEstimate est =
            hypam::exit_probability(R, t, n_paths, params, conv, c.value("seed", 1), dt, workers);
        csv.row({ctx.fd(R), ctx.fd(t), ctx.fd(est.probability), ctx.fd(est.std_error),
                 std::to_string(est.hits), ctx.hash});
        x.push_back(R * R / t);
        y.push_back(std::log(est.probability));
    }
    hypam::detail::LinearFit fit = hypam::detail::linear_fit(x, y);
    bool pass = fit.r_squared >= 0.95 && fit.slope < 0.0;
    ctx.note("log P(exit) vs R^2/t: slope " + ctx.fd(fit.slope) + ", R^2 " + ctx.fd(fit.r_squared));
    return Json{{"status", pass ? "pass" : "fail"},
                {"metrics",
                 {{"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared}}}};
}

Json run_hk_scaling(Ctx& ctx) {
    const Json& c = ctx.config;
    double s = c.value("s", 1.0), kappa = c.value("kappa", 2.0), dt = c.value("dt", 1e-3);
    long n_paths = c.value("n_paths", 400000L);
    int workers = c.value("workers", 1);
    hypam::HeatKernelScalingReport rep = hypam::heat_kernel_scaling_check(
        s, kappa, n_paths, c.value("seed", 1), dt, 0.0, c.value("n_bins", 60), workers);
    hypam::CsvWriter csv(ctx.out_dir + "/hk.csv",
                         {"rho", "estimated", "reference", "settings_hash"});
    for (size_t i = 0; i < rep.grid.size(); ++i)
        csv.row({ctx.fd(rep.grid[i]), ctx.fd(rep.estimated[i]), ctx.fd(rep.reference[i]), ctx.hash});

    // DM-type bound: fit the smallest dominating constant on a sweep grid,
    // then verify dominance on a denser verification grid.
    std::vector<double> s_fit = {0.5, 1.0, 2.0}, rho_fit, rho_verify;
    for (int i = 1; i <= 30; ++i) rho_fit.push_back(6.0 * i / 30.0);
    for (int i = 1; i <= 97; ++i) rho_verify.push_back(6.0 * i / 97.0);
    double C3 = hypam::fit_dm_constant(s_fit, rho_fit, kappa, 3);
    long violations = 0;
    for (double sv : s_fit)
        for (double rho : rho_verify) {
            double ref = std::pow(kappa, 1.5) * hypam::heat_kernel_h3(kappa * sv, std::sqrt(kappa) * rho);
            if (ref > hypam::dm_upper_bound(sv, rho, kappa, 3, C3 * 1.02)) ++violations;
        }
    bool pass = rep.pass && violations == 0;
    ctx.note("kernel sup discrepancy " + ctx.fd(rep.sup_discrepancy) + " vs tolerance " +
             ctx.fd(rep.tolerance) + ", fitted C3 " + ctx.fd(C3) + ", bound violations " +
             std::to_string(violations));
    return Json{{"status", pass ? "pass" : "fail"},
                {"metrics",
                 {{"sup_discrepancy", rep.sup_discrepancy},
                  {"tolerance", rep.tolerance},
                  {"fitted_C3", C3},
                  {"bound_violations", violations}}}};
}

// ----------------------------------------------------------------- moments

Json run_moments(Ctx& ctx) {
    const Json& c = ctx.config;
    hypam::CovarianceProfile Q = profile_from(c);
    hypam::McParams mc;
    mc.d = c.value("d", 2);
    mc.alpha = c.value("alpha", 1.0);
    mc.convention = convention_from(c);
    mc.n_replicates = c.value("n_replicates", 200L);
    mc.dt = c.value("dt", 0.01);
    mc.seed = c.value("seed", 1);
    int p = c.value("p", 2);
    double t = c.value("t", 2.0);

    if (Q.kind == hypam::ProfileKind::constant) {
        mc.n_replicates = std::min<long>(mc.n_replicates, 8);  // deterministic collapse
        hypam::MomentEstimate est = hypam::annealed_moment(p, t, 0.0, Q, mc);
        double target = 0.5 * hypam::detail::sqr(double(p)) * Q.Q(0.0) * t * t;
        hypam::CsvWriter csv(ctx.out_dir + "/moments.csv",
                             {"t", "p", "log_moment", "std_error", "settings_hash"});
        csv.row({ctx.fd(t), std::to_string(p), ctx.fd(est.log_moment), ctx.fd(est.std_error), ctx.hash});
        bool pass = std::abs(est.log_moment - target) <= 1e-3;
        ctx.note("constant profile: log m_" + std::to_string(p) + " = " + ctx.fd(est.log_moment) +
                 " (target " + ctx.fd(target) + ")");
        return Json{{"status", pass ? "pass" : "fail"},
                    {"metrics", {{"log_moment", est.log_moment}, {"target", target}}}};
    }

    std::vector<double> t_grid = c.value("t_grid", std::vector<double>{0.5, 1.0, 1.5, 2.0});
    std::vector<hypam::RatioPoint> curve = hypam::first_order_ratio_curve(p, t_grid, Q, mc);
    hypam::CsvWriter csv(ctx.out_dir + "/moments.csv",
                         {"t", "p", "log_moment", "ratio_to_H", "std_error", "settings_hash"});
    bool bound_ok = true;
    for (const auto& pt : curve) {
        csv.row({ctx.fd(pt.t), std::to_string(p), ctx.fd(pt.log_moment), ctx.fd(pt.value),
                 ctx.fd(pt.std_error), ctx.hash});
        if (pt.value > 1.0 + 2.0 * pt.std_error) bound_ok = false;
    }
    bool increasing = true;
    for (size_t i = 0; i + 1 < curve.size(); ++i)
        if (curve[i + 1].value <= curve[i].value) increasing = false;
    ctx.note("ratio log m_p / H(pt) at t_max = " + ctx.fd(curve.back().value) +
             " (upper bound asserted; trend increasing=" + std::to_string(increasing) +
             " is report-only at desk scale)");
    return Json{{"status", bound_ok ? "pass" : "fail"},
                {"metrics",
                 {{"ratio_final", curve.back().value},
                  {"upper_bound_ok", bound_ok},
                  {"trend_increasing", increasing}}}};
}

// -------------------------------------------------------------- variational

Json run_chi(Ctx& ctx) {
    const Json& c = ctx.config;
    int d = c.value("d", 1);
    double gamma = c.value("gamma", 2.0);
    double R = c.value("R", 6.0);
    int nodes = c.value("nodes", 400);
    hypam::ChiResult res = hypam::chi_optimize(-gamma, d, R, nodes, c.value("seed", 1));
    double target = d * std::sqrt(gamma / 2.0);
    double rel = std::abs(res.value - target) / target;
    hypam::CsvWriter csv(ctx.out_dir + "/chi_profile.csv", {"x", "phi", "settings_hash"});
    for (int i = 0; i < res.profile.grid.size(); ++i)
        csv.row({ctx.fd(res.profile.grid.rho[size_t(i)]), ctx.fd(res.profile.phi[i]), ctx.hash});
    bool pass = rel <= 0.02;
    ctx.note("chi = " + ctx.fd(res.value) + " (target " + ctx.fd(target) + ", rel dev " + ctx.fd(rel) +
             "), converged=" + std::to_string(res.converged));
    return Json{{"status", pass ? "pass" : "fail"},
                {"metrics",
                 {{"value", res.value},
                  {"target", target},
                  {"rel_deviation", rel},
                  {"converged", res.converged},
                  {"iterations", res.iterations}}}};
}

Json run_legendre(Ctx& ctx) {
    const Json& c = ctx.config;
    double R = c.value("R", 6.0);
    int nodes = c.value("nodes", 400);
    int n_profiles = c.value("n_profiles", 20);
    std::mt19937_64 rng(c.value("seed", 1));
    std::uniform_real_distribution<double> unif;
    hypam::Grid grid = hypam::make_interval_grid(R, nodes);
    const int n = grid.size();

    // family: quadratic wells -a x^2 + b and centered smooth bumps
    std::vector<Vec> family;
    for (double a : {0.25, 0.5, 1.0, 2.0})
        for (double b : {0.0, 1.0}) {
            Vec f(n);
            for (int i = 0; i < n; ++i) f[i] = -a * hypam::detail::sqr(grid.rho[size_t(i)]) + b;
            family.push_back(f);
        }
    for (double amp : {1.0, 3.0}) {
        Vec f(n);
        for (int i = 0; i < n; ++i)
            f[i] = amp * std::exp(-hypam::detail::sqr(grid.rho[size_t(i)]) / 2.0);
        family.push_back(f);
    }

    hypam::CsvWriter csv(ctx.out_dir + "/legendre.csv",
                         {"profile", "s_eu", "best_lower_bound", "max_violation", "settings_hash"});
    double worst_violation = -1e300;
    for (int k = 0; k < n_profiles; ++k) {
        Vec phi(n);
        double center = (unif(rng) - 0.5) * R, width = 0.5 + 1.5 * unif(rng);
        for (int i = 0; i < n; ++i)
            phi[i] = std::exp(-hypam::detail::sqr(grid.rho[size_t(i)] - center) / (2.0 * width * width));
        hypam::DensityProfile mu = hypam::make_profile(grid, phi);
        hypam::LegendreReport rep = hypam::legendre_inequality_check(mu, family);
        worst_violation = std::max(worst_violation, rep.max_violation);
        csv.row({std::to_string(k), ctx.fd(rep.s_eu_value), ctx.fd(rep.best_lower_bound),
                 ctx.fd(rep.max_violation), ctx.hash});
    }

    // equality pair: mu = ground-state density of a well f*, where the sup
    // is attained and the two sides agree
    Vec fstar(n);
    for (int i = 0; i < n; ++i) fstar[i] = -hypam::detail::sqr(grid.rho[size_t(i)]);
    hypam::EigenSolveResult gs = hypam::principal_eig(hypam::assemble(grid, fstar), grid);
    hypam::DensityProfile mu_star = hypam::make_profile(grid, gs.phi0);
    hypam::LegendreReport star = hypam::legendre_inequality_check(mu_star, {fstar});
    double equality_gap = std::abs(star.s_eu_value - star.bounds[0]);

    bool pass = worst_violation <= 1e-6 && equality_gap <= 1e-3;
    ctx.note("max violation " + ctx.fd(worst_violation) + ", equality gap at the ground-state pair " +
             ctx.fd(equality_gap));
    return Json{{"status", pass ? "pass" : "fail"},
                {"metrics", {{"max_violation", worst_violation}, {"equality_gap", equality_gap}}}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hyperbolic Anderson-model numerics: experiment runner"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    long seed = -1;
    int workers = 1;
    if (const char* env = std::getenv("HYPAM_OUT_ROOT")) out_dir = env;
    app.add_option("--config", config_path, "JSON config file")->capture_default_str();
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--workers", workers, "seed-partitioned worker threads");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();

    struct Sub {
        const char* name;
        const char* desc;
        Json (*run)(Ctx&);
    };
    const Sub subs[] = {
        {"geometry-flattening", "distance expansion residual scaling in alpha", run_geometry_flattening},
        {"jt-convergence", "J_t toward the flat quadratic-kernel limit", run_jt_convergence},
        {"eigen-flattening", "principal Dirichlet eigenvalue across curvatures", run_eigen_flattening},
        {"eigen-scaling", "matched-grid eigenvalue scaling identity", run_eigen_scaling},
        {"decompose", "annulus/packing ball decomposition certificates", run_decompose},
        {"pou-check", "partition-of-unity identity and gradient sacrifice", run_pou_check},
        {"exit-fit", "exit probability tail shape in R^2/t", run_exit_fit},
        {"hk-scaling", "heat-kernel scaling and upper-bound fit", run_hk_scaling},
        {"moments", "Feynman-Kac annealed moment estimators", run_moments},
        {"chi", "fluctuation exponent by projected gradient descent", run_chi},
        {"legendre", "Legendre direction of the Donsker-Varadhan identity", run_legendre},
    };

    // per-subcommand inline flags for the documented headline parameters
    std::map<std::string, std::map<std::string, double>> inline_num;
    std::map<std::string, std::map<std::string, std::string>> inline_str;
    for (const Sub& s : subs) {
        CLI::App* cmd = app.add_subcommand(s.name, s.desc);
        cmd->fallthrough();  // let --config/--seed/--workers/--out follow the subcommand
        auto add_num = [&](const char* key) {
            cmd->add_option_function<double>(
                std::string("--") + key,
                [&inline_num, s, key](double v) { inline_num[s.name][key] = v; });
        };
        auto add_str = [&](const char* key) {
            cmd->add_option_function<std::string>(
                std::string("--") + key,
                [&inline_str, s, key](const std::string& v) { inline_str[s.name][key] = v; });
        };
        for (const char* key : {"d", "R", "t", "alpha", "gamma", "nodes", "p", "r", "R_tilde",
                                "n_paths", "n_replicates", "dt", "s", "kappa", "nr", "ntheta"})
            add_num(key);
        for (const char* key : {"profile", "convention"}) add_str(key);
    }

    try {
        CLI11_PARSE(app, argc, argv);
        CLI::App* picked = app.get_subcommands().front();
        const Sub* sub = nullptr;
        for (const Sub& s : subs)
            if (picked->get_name() == s.name) sub = &s;

        Ctx ctx;
        ctx.config = Json::object();
        if (!config_path.empty()) ctx.config = hypam::load_json(config_path);
        for (const auto& [k, v] : inline_num[sub->name]) {
            // integer-valued parameters stay integers in the config
            if (v == std::floor(v) && std::abs(v) < 1e15)
                ctx.config[k] = static_cast<long>(v);
            else
                ctx.config[k] = v;
        }
        for (const auto& [k, v] : inline_str[sub->name]) ctx.config[k] = v;
        if (seed >= 0) ctx.config["seed"] = seed;
        if (!ctx.config.contains("seed")) ctx.config["seed"] = 1;
        ctx.config["subcommand"] = sub->name;
        ctx.config["workers"] = workers;
        ctx.out_dir = (fs::path(out_dir) / sub->name).string();
        fs::create_directories(ctx.out_dir);
        ctx.hash = hypam::settings_hash_hex(ctx.config);
        ctx.log.open(ctx.out_dir + "/log.txt");
        ctx.log << ctx.config.dump(2) << "\n";

        Json summary = sub->run(ctx);
        summary["settings_hash"] = ctx.hash;
        summary["config"] = ctx.config;
        hypam::save_json(ctx.out_dir + "/summary.json", summary);
        std::string status = summary["status"];
        ctx.note("status: " + status);
        return status == "fail" ? 1 : 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
