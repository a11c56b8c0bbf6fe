#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "hypam/variational.hpp"

using namespace hypam;

TEST_CASE("density profiles validate and normalize") {
    Grid g = make_interval_grid(3.0, 100);
    Vec raw(g.size());
    for (int i = 0; i < g.size(); ++i) raw[i] = std::exp(-g.rho[i] * g.rho[i]);
    DensityProfile p = make_profile(g, raw);
    CHECK_NOTHROW(p.validate());
    double mass = 0.0;
    for (int i = 0; i < g.size(); ++i) mass += p.phi[i] * p.phi[i] * g.weight[i];
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));

    Grid curved = make_radial_grid(MetricParams(2, 1.0), 2.0, 50);
    DensityProfile bad;
    bad.grid = curved;
    bad.phi = Vec::Ones(curved.size());
    CHECK_THROWS(bad.validate());
}

TEST_CASE("Dirichlet energy of the discrete ground state equals its eigenvalue") {
    Grid g = make_interval_grid(2.0, 300);
    EigenSolveResult res = principal_eig(assemble(g, Vec()), g);
    DensityProfile p = make_profile(g, res.phi0);
    CHECK(s_eu(p) == doctest::Approx(res.lambda0).epsilon(1e-10));

    Grid disk = make_radial_grid(MetricParams(2, 0.0), 2.0, 300);
    EigenSolveResult rd = principal_eig(assemble(disk, Vec()), disk);
    DensityProfile pd = make_profile(disk, rd.phi0);
    CHECK(s_eu(pd) == doctest::Approx(1.4457964907366958).epsilon(1e-4));
}

TEST_CASE("quadratic energy J of centered Gaussians") {
    // J = (gamma/2) Var(nu); a Gaussian density with variance s^2 gives
    // (gamma/2) s^2
    Grid g = make_interval_grid(8.0, 800);
    double s2 = 0.5;
    Vec raw(g.size());
    for (int i = 0; i < g.size(); ++i) raw[i] = std::exp(-g.rho[i] * g.rho[i] / (4.0 * s2));
    DensityProfile p = make_profile(g, raw);
    CHECK(j_of_density(p, -2.0) == doctest::Approx(0.5 * 2.0 * s2).epsilon(1e-4));
    // translation changes the mean but not the variance term
    Vec shifted(g.size());
    for (int i = 0; i < g.size(); ++i)
        shifted[i] = std::exp(-detail::sqr(g.rho[i] - 1.0) / (4.0 * s2));
    DensityProfile q = make_profile(g, shifted);
    CHECK(j_of_density(q, -2.0) == doctest::Approx(j_of_density(p, -2.0)).epsilon(1e-3));
    CHECK_THROWS(j_of_density(p, 1.0));
}

TEST_CASE("one-dimensional fluctuation constant hits sqrt(gamma/2)") {
    // gamma = 2: chi = sqrt(1) = 1, attained by the Gaussian of s^2 = 1/2
    ChiResult res = chi_optimize(-2.0, 1, 6.0, 400, 31);
    CHECK(res.value == doctest::Approx(1.0).epsilon(0.02));
    CHECK(res.chi_1d == doctest::Approx(1.0).epsilon(0.02));
    res.profile.validate();
    // gamma = 1: chi = sqrt(1/2)
    ChiResult res1 = chi_optimize(-1.0, 1, 6.0, 400, 31);
    CHECK(res1.value == doctest::Approx(std::sqrt(0.5)).epsilon(0.02));
}

TEST_CASE("fluctuation constant scaling and dimensional additivity") {
    double c1 = chi_optimize(-2.0, 1, 6.0, 300, 32).value;
    double c4 = chi_optimize(-8.0, 1, 6.0, 300, 32).value;
    CHECK(c4 == doctest::Approx(2.0 * c1).epsilon(0.02));  // chi ~ sqrt(gamma)
    double c3d = chi_optimize(-2.0, 3, 6.0, 300, 32).value;
    CHECK(c3d == doctest::Approx(3.0 * c1).epsilon(1e-12));  // separable product ansatz
}

TEST_CASE("the optimizer value is a lower bound over random candidates") {
    double gamma = 2.0;
    Grid g = make_interval_grid(6.0, 300);
    ChiResult res = chi_optimize(-gamma, 1, 6.0, 300, 33);
    std::mt19937_64 rng(34);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 100; ++trial) {
        Vec raw(g.size());
        double width = 0.3 + 0.1 * (trial % 20);
        for (int i = 0; i < g.size(); ++i)
            raw[i] = std::exp(-g.rho[i] * g.rho[i] / width) * (1.0 + 0.3 * std::abs(gauss(rng)));
        DensityProfile cand = make_profile(g, raw);
        double value = j_of_density(cand, -gamma) + s_eu(cand);
        CHECK(value >= res.chi_1d - 1e-9);
    }
}

TEST_CASE("domain growth relaxes the constrained minimum") {
    std::vector<std::pair<double, double>> curve =
        chi_R_monotonicity(-2.0, 1, {2.0, 4.0, 6.0}, 300, 35);
    CHECK(curve[0].second >= curve[1].second - 1e-10);
    CHECK(curve[1].second >= curve[2].second - 1e-10);
    // the limit d sqrt(gamma/2) is approached from above
    CHECK(curve[2].second >= 1.0 - 5e-3);
}

TEST_CASE("Legendre-direction inequality with an exact equality pair") {
    Grid g = make_interval_grid(6.0, 400);
    EigenSolveResult base = principal_eig(assemble(g, Vec()), g);
    DensityProfile mu = make_profile(g, base.phi0);
    std::vector<Vec> family;
    // constant shifts give exact equality: int c dmu + (lambda_0 - c) = lambda_0
    family.push_back(Vec::Constant(g.size(), 0.7));
    family.push_back(Vec::Zero(g.size()));
    std::mt19937_64 rng(36);
    std::normal_distribution<double> gauss;
    for (int k = 0; k < 10; ++k) {
        Vec f(g.size());
        for (int i = 0; i < g.size(); ++i) f[i] = 0.5 * gauss(rng);
        family.push_back(f);
    }
    LegendreReport rep = legendre_inequality_check(mu, family);
    CHECK(rep.pass);
    CHECK(rep.max_violation <= 1e-6);
    // the constant members achieve the supremum exactly
    CHECK(rep.bounds[0] == doctest::Approx(rep.s_eu_value).epsilon(1e-10));
    CHECK(rep.bounds[1] == doctest::Approx(rep.s_eu_value).epsilon(1e-10));
}

TEST_CASE("quadratic-well equality pair for the optimal Gaussian") {
    // for f(x) = -gamma x^2 / 2 ... the ground state of -(d^2/dx^2 + f)
    // realizes equality in the duality between S_eu and the eigenvalue bound
    Grid g = make_interval_grid(6.0, 400);
    double gamma = 2.0;
    Vec f(g.size());
    for (int i = 0; i < g.size(); ++i) f[i] = -0.5 * gamma * g.rho[i] * g.rho[i];
    EigenSolveResult res = principal_eig(assemble(g, f), g);
    DensityProfile mu = make_profile(g, res.phi0);
    LegendreReport rep = legendre_inequality_check(mu, {f});
    CHECK(rep.pass);
    // equality: S_eu(mu) = int f dmu + lambda_0^{f}
    CHECK(std::abs(rep.bounds[0] - rep.s_eu_value) < 1e-3);
}
