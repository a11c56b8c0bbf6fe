#include <cmath>
#include <random>

#include "doctest.h"
#include "hypam/geometry.hpp"

using namespace hypam;

namespace {
Vec unit(int d, int axis) {
    Vec v = Vec::Zero(d);
    v[axis] = 1.0;
    return v;
}
}  // namespace

TEST_CASE("lorentz inner product and hyperboloid constraint") {
    Vec x(3), y(3);
    x << 1.0, 2.0, 3.0;
    y << -0.5, 1.0, 2.0;
    CHECK(lorentz_inner(x, y) == doctest::Approx(1.0 * -0.5 + 2.0 * 1.0 - 3.0 * 2.0));
    CHECK_THROWS(lorentz_inner(x, Vec::Zero(4)));

    HyperPoint p = HyperPoint::from_polar(0.7, unit(2, 0), 1.3);
    CHECK(lorentz_inner(p.ambient, p.ambient) ==
          doctest::Approx(-1.0 / (1.3 * 1.3)).epsilon(1e-12));
}

TEST_CASE("polar and ambient representations round-trip") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        int d = 2 + trial % 2;
        double alpha = 0.25 + unif(rng) / 3.0;
        double rho = unif(rng);
        Vec sigma = random_direction(d, rng);
        HyperPoint p = HyperPoint::from_polar(rho, sigma, alpha);
        HyperPoint q = HyperPoint::from_ambient(p.ambient, alpha);
        CHECK(q.rho == doctest::Approx(rho).epsilon(1e-10));
        if (rho > 1e-10) CHECK((q.sigma - sigma).norm() < 1e-9);
    }
    HyperPoint o = HyperPoint::origin(3, 2.0);
    CHECK(o.rho == 0.0);
    CHECK(o.ambient[3] == doctest::Approx(0.5));
}

TEST_CASE("distance closed form: two points at rho=0.1 in orthogonal directions") {
    // cosh d = cosh(0.1)^2 when the directions are orthogonal (alpha = 1)
    HyperPoint a = HyperPoint::from_polar(0.1, unit(2, 0), 1.0);
    HyperPoint b = HyperPoint::from_polar(0.1, unit(2, 1), 1.0);
    double expect = 0.14153900130024827;  // arccosh(cosh(0.1)^2)
    CHECK(hyper_distance(a, b) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(polar_distance(a.polar(), b.polar(), 1.0) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("distance is a metric and agrees between formulas") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(0.0, 4.0);
    for (int trial = 0; trial < 100; ++trial) {
        int d = 2 + trial % 3;
        double alpha = 0.1 + unif(rng) / 4.0;
        HyperPoint x = HyperPoint::from_polar(unif(rng), random_direction(d, rng), alpha);
        HyperPoint y = HyperPoint::from_polar(unif(rng), random_direction(d, rng), alpha);
        HyperPoint z = HyperPoint::from_polar(unif(rng), random_direction(d, rng), alpha);
        double dxy = hyper_distance(x, y);
        CHECK(dxy >= 0.0);
        // acosh near 1 loses half the working precision, so allow ~sqrt(eps)
        CHECK(hyper_distance(x, x) < 2e-6);
        CHECK(hyper_distance(y, x) == doctest::Approx(dxy).epsilon(1e-12));
        CHECK(dxy <= hyper_distance(x, z) + hyper_distance(z, y) + 1e-10);
        CHECK(polar_distance(x.polar(), y.polar(), alpha) == doctest::Approx(dxy).epsilon(1e-9));
        // radial distances are exact differences
        HyperPoint r1 = HyperPoint::from_polar(1.0, x.sigma, alpha);
        HyperPoint r2 = HyperPoint::from_polar(2.5, x.sigma, alpha);
        CHECK(hyper_distance(r1, r2) == doctest::Approx(1.5).epsilon(1e-10));
    }
}

TEST_CASE("distances are invariant under random isometries") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unif(0.0, 3.0);
    for (int trial = 0; trial < 40; ++trial) {
        int d = 2 + trial % 2;
        double alpha = 0.5 + unif(rng) / 6.0;
        HyperPoint x = HyperPoint::from_polar(unif(rng), random_direction(d, rng), alpha);
        HyperPoint y = HyperPoint::from_polar(unif(rng), random_direction(d, rng), alpha);
        Mat g = random_isometry(d, rng);
        double before = hyper_distance(x, y);
        double after = hyper_distance(apply_isometry(g, x), apply_isometry(g, y));
        CHECK(after == doctest::Approx(before).epsilon(1e-8));
    }
}

TEST_CASE("dilation scales the radius and fixes the direction") {
    HyperPoint x = HyperPoint::from_polar(1.2, unit(3, 1), 0.7);
    HyperPoint y = dilate(x, 2.5);
    CHECK(y.rho == doctest::Approx(3.0));
    CHECK((y.sigma - x.sigma).norm() < 1e-14);
    CHECK_THROWS(dilate(x, 0.0));
}

TEST_CASE("small-curvature flattening of distances") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unif(0.0, 5.0);
    for (int trial = 0; trial < 30; ++trial) {
        int d = 2 + trial % 2;
        PolarPoint z(unif(rng), random_direction(d, rng));
        PolarPoint w(unif(rng), random_direction(d, rng));
        double deu = euclidean_polar_distance(z, w);
        // |d(alpha z, alpha w) - alpha d_eu| decays like alpha^3: consecutive
        // halvings of alpha shrink the residual by ~8
        double r1 = distance_expansion_residual(z, w, 0.1);
        double r2 = distance_expansion_residual(z, w, 0.05);
        if (r2 > 1e-12 && deu > 0.5) {
            double ratio = r1 / r2;
            CHECK(ratio > 5.0);
            CHECK(ratio < 11.0);
        }
        // the hyperbolic distance between dilated points exceeds the flat one
        PolarPoint zs(0.1 * z.rho, z.sigma), ws(0.1 * w.rho, w.sigma);
        CHECK(polar_distance(zs, ws, 1.0) >= 0.1 * deu - 1e-12);
    }
}

TEST_CASE("euclidean limit alpha = 0 is exact") {
    MetricParams flat(3, 0.0);
    CHECK(flat.angular_metric(2.0) == doctest::Approx(4.0));
    CHECK(flat.radial_weight(2.0) == doctest::Approx(4.0));
    // alpha -> 0 continuity
    MetricParams tiny(3, 1e-8);
    CHECK(tiny.angular_metric(2.0) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(tiny.radial_weight(2.0) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("ball volumes: closed forms and monotonicity in curvature") {
    // hyperbolic plane, alpha = 1, R = 1: 2 pi (cosh 1 - 1)
    CHECK(volume_ball(1.0, MetricParams(2, 1.0)) ==
          doctest::Approx(3.412276265284902).epsilon(1e-12));
    // Euclidean limits
    CHECK(volume_ball(2.0, MetricParams(2, 0.0)) ==
          doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-12));
    CHECK(volume_ball(1.5, MetricParams(3, 0.0)) ==
          doctest::Approx(4.0 / 3.0 * std::numbers::pi * std::pow(1.5, 3)).epsilon(1e-12));
    // volume grows with curvature at fixed radius
    double v0 = volume_ball(2.0, MetricParams(3, 0.0));
    double v1 = volume_ball(2.0, MetricParams(3, 0.5));
    double v2 = volume_ball(2.0, MetricParams(3, 1.0));
    CHECK(v0 < v1);
    CHECK(v1 < v2);
    CHECK(volume_ball(0.0, MetricParams(2, 1.0)) == 0.0);
}

TEST_CASE("input validation") {
    CHECK_THROWS(MetricParams(0, 1.0));
    CHECK_THROWS(MetricParams(2, -0.1));
    CHECK_THROWS(PolarPoint(-1.0, unit(2, 0)));
    CHECK_THROWS(PolarPoint(1.0, Vec(2.0 * unit(2, 0))));
    CHECK_THROWS(HyperPoint::from_polar(1.0, unit(2, 0), 0.0));
    std::mt19937_64 rng(1);
    PolarPoint z(1.0, unit(2, 0)), w(2.0, unit(2, 1));
    CHECK_THROWS(distance_expansion_residual(z, w, 0.0));
    CHECK_THROWS(distance_expansion_residual(z, w, 1.5));
}
