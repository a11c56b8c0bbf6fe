#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "hypam/stochastic.hpp"

using namespace hypam;

namespace {
Vec unit(int d, int axis) {
    Vec v = Vec::Zero(d);
    v[axis] = 1.0;
    return v;
}
}  // namespace

TEST_CASE("drift conventions and coefficient fields") {
    CHECK(drift_coefficient(DriftConvention::paper, 3) == 1.0);
    CHECK(drift_coefficient(DriftConvention::riemannian, 3) == 2.0);
    CHECK(coth_drift(0.0, 2.0) == doctest::Approx(0.5));
    CHECK(coth_drift(1.0, 2.0) == doctest::Approx(1.0 / std::tanh(2.0)));
    // large rho: coth -> 1, so the drift approaches alpha
    CHECK(coth_drift(0.7, 50.0) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(angular_rate(0.0, 2.0) == doctest::Approx(0.25));
    CHECK(angular_rate(1.0, 2.0) == doctest::Approx(1.0 / (std::sinh(2.0) * std::sinh(2.0))));
}

TEST_CASE("path simulation: reproducibility and invariants") {
    MetricParams params(2, 1.0);
    PolarPoint start(0.5, unit(2, 0));
    PathSample a = simulate_bm(start, params, 1.0, 1e-3, DriftConvention::riemannian, 9);
    PathSample b = simulate_bm(start, params, 1.0, 1e-3, DriftConvention::riemannian, 9);
    PathSample c = simulate_bm(start, params, 1.0, 1e-3, DriftConvention::riemannian, 10);
    CHECK(a.rho == b.rho);
    CHECK(a.rho != c.rho);
    CHECK(a.rho.size() == 1001);
    CHECK(a.duration() == doctest::Approx(1.0));
    for (double rho : a.rho) CHECK(rho >= 0.0);
    for (const Vec& s : a.sigma) CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS(simulate_bm(start, params, 1.0, 0.5, DriftConvention::riemannian, 1));
}

TEST_CASE("radial marginal matches the closed-form kernel on curvature -1 three-space") {
    HeatKernelScalingReport rep = heat_kernel_scaling_check(0.5, 1.0, 60000, 77, 1e-3, 0.0, 40);
    CHECK(rep.pass);
    CHECK(rep.sup_discrepancy <= rep.tolerance);
}

TEST_CASE("heat kernel scaling collapse across curvatures") {
    HeatKernelScalingReport rep = heat_kernel_scaling_check(1.0, 2.0, 60000, 78, 1e-3, 0.0, 40);
    CHECK(rep.pass);
}

TEST_CASE("closed-form kernel integrates to one and obeys the fitted upper bound") {
    // int p_1(t, rho) omega_2 sinh^2(rho) drho = 1 up to a tiny tail
    double t = 0.7;
    double mass = detail::adaptive_simpson(
        [&](double rho) {
            return heat_kernel_h3(t, rho) * detail::sphere_area(2) *
                   detail::sqr(rho * detail::sinhc(rho));
        },
        1e-9, 25.0, 1e-12);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));

    std::vector<double> s_values{0.5, 1.0, 2.0};
    std::vector<double> rho_grid;
    for (int i = 0; i < 30; ++i) rho_grid.push_back(0.05 + 0.3 * i);
    double kappa = 2.0;
    double C = fit_dm_constant(s_values, rho_grid, kappa, 3);
    CHECK(C > 0.0);
    // with 2% headroom the bound dominates on a denser verification grid
    for (double s : {0.4, 0.8, 1.3, 1.9})
        for (int i = 0; i < 97; ++i) {
            double rho = 0.03 + 0.11 * i;
            double ref = std::pow(kappa, 1.5) * heat_kernel_h3(kappa * s, std::sqrt(kappa) * rho);
            CHECK(ref <= dm_upper_bound(s, rho, kappa, 3, 1.02 * C) * (1.0 + 1e-12));
        }
}

TEST_CASE("exit probabilities: monotonicity and bridge correction direction") {
    MetricParams params(2, 1.0);
    ExitEstimate p_near =
        exit_probability(1.0, 1.0, 20000, params, DriftConvention::riemannian, 3, 1e-3, 2);
    ExitEstimate p_far =
        exit_probability(2.0, 1.0, 20000, params, DriftConvention::riemannian, 3, 1e-3, 2);
    ExitEstimate p_long =
        exit_probability(2.0, 2.0, 20000, params, DriftConvention::riemannian, 3, 1e-3, 2);
    CHECK(p_near.probability > p_far.probability);
    CHECK(p_long.probability > p_far.probability);
    CHECK(p_near.hits + p_far.hits + p_long.hits > 0);
    // a very distant barrier over a short horizon is never hit; the estimate
    // degrades to the rule-of-three upper bound
    ExitEstimate p_zero =
        exit_probability(30.0, 0.1, 500, params, DriftConvention::riemannian, 3, 1e-3);
    CHECK(p_zero.zero_hits);
    CHECK(p_zero.probability == doctest::Approx(3.0 / 500.0));
}

TEST_CASE("worker count does not change exit tallies") {
    MetricParams params(2, 1.0);
    ExitEstimate w1 = exit_probability(1.5, 1.0, 8000, params, DriftConvention::riemannian, 5, 1e-3, 1);
    ExitEstimate w4 = exit_probability(1.5, 1.0, 8000, params, DriftConvention::riemannian, 5, 1e-3, 4);
    CHECK(w1.hits == w4.hits);
    std::vector<double> horizons{0.5, 1.0};
    auto s1 = survival_curve(1.5, horizons, 8000, params, DriftConvention::riemannian, 5, 1e-3, 1);
    auto s3 = survival_curve(1.5, horizons, 8000, params, DriftConvention::riemannian, 5, 1e-3, 3);
    for (size_t k = 0; k < horizons.size(); ++k) CHECK(s1[k].hits == s3[k].hits);
    CHECK(s1[0].probability >= s1[1].probability);
}

TEST_CASE("occupation measure is a probability measure on the bins") {
    MetricParams params(2, 1.0);
    PathSample path = simulate_bm(PolarPoint(0.2, unit(2, 0)), params, 2.0, 1e-3,
                                  DriftConvention::riemannian, 13);
    OccupationBins bins;
    bins.R = 12.0;
    bins.n_radial = 24;
    bins.n_angular = 8;
    OccupationMeasure occ = occupation_measure(path, bins);
    double s = std::accumulate(occ.measure.weights.begin(), occ.measure.weights.end(), 0.0);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(occ.total_time == doctest::Approx(2.0));
    CHECK(int(occ.measure.atoms.size()) == 24 * 8);
}
