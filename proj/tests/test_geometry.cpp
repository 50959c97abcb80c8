#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include <dunkl/geometry.hpp>

#include "oracles.hpp"

using namespace dunkl;

TEST(Geometry, SpherePointValidation)
{
    EXPECT_NO_THROW(make_sphere_point(1, {0.6, 0.8, 0}));
    EXPECT_THROW(make_sphere_point(1, {0.6, 0.7, 0}), std::domain_error);
    EXPECT_THROW(make_sphere_point(1, {0.6, 0.0, 0.8}), std::domain_error);
    EXPECT_THROW(make_sphere_point(3, {1, 0, 0}), std::invalid_argument);
}

TEST(Geometry, GeodesicDistance)
{
    EXPECT_NEAR(geodesic({1, 0, 0}, {0, 1, 0}), std::numbers::pi / 2, 1e-15);
    EXPECT_NEAR(geodesic({1, 0, 0}, {-1, 0, 0}), std::numbers::pi, 1e-15);
    Vec3 a = normalized({1, 2, 2});
    EXPECT_NEAR(geodesic(a, a), 0, 1e-7);
}

TEST(Geometry, BallDistanceIsArcsineDifferenceOnInterval)
{
    for (double x : {-0.9, -0.2, 0.0, 0.5}) {
        for (double y : {-0.7, 0.1, 0.99}) {
            EXPECT_NEAR(ball_distance(1, {x, 0, 0}, {y, 0, 0}), std::abs(std::asin(x) - std::asin(y)), 1e-7);
        }
    }
    EXPECT_THROW(ball_distance(1, {1.2, 0, 0}, {0, 0, 0}), std::domain_error);
}

TEST(Geometry, SimplexBallMapsInvert)
{
    Vec3 u{0.2, 0.3, 0};
    Vec3 x = simplex_to_ball(2, u);
    Vec3 v = ball_to_simplex(2, x);
    EXPECT_NEAR(v[0], 0.2, 1e-15);
    EXPECT_NEAR(v[1], 0.3, 1e-15);
    EXPECT_NEAR(simplex_distance(2, u, u), 0, 1e-7);
    // d_T(u, v) = d_B(sqrt u, sqrt v)
    Vec3 w{0.05, 0.6, 0};
    EXPECT_NEAR(simplex_distance(2, u, w), ball_distance(2, simplex_to_ball(2, u), simplex_to_ball(2, w)), 1e-14);
    EXPECT_THROW(simplex_to_ball(1, {-0.1, 0, 0}), std::domain_error);
}

TEST(Geometry, LiftLandsOnSphere)
{
    Vec3 X = lift_to_sphere(2, {0.3, -0.4, 0});
    EXPECT_NEAR(norm(X), 1, 1e-15);
    EXPECT_GE(X[2], 0);
}

TEST(Grids, UnweightedSphereArea)
{
    EXPECT_NEAR(sphere_grid(1, 9).total(), 2 * std::numbers::pi, 1e-13);
    EXPECT_NEAR(sphere_grid(2, 9).total(), 4 * std::numbers::pi, 1e-12);
}

TEST(Grids, WeightedSphereGridMoments)
{
    // Exactness 4n - 1 against the product weight, checked on monomials.
    for (auto tau : {std::vector<double>{0.5, 1.0}, {-0.4, 0.3}, {1.0, 2.0, 0.5}, {-0.3, 0.0, 1.2}}) {
        const int d = static_cast<int>(tau.size()) - 1;
        const int n = 4;
        QuadratureGrid g = weighted_sphere_grid(d, tau, n);
        for (int a0 = 0; a0 <= 6; ++a0) {
            for (int a1 = 0; a0 + a1 <= 6; ++a1) {
                for (int a2 = 0; a0 + a1 + a2 <= 6 && (d == 2 || a2 == 0); ++a2) {
                    std::vector<int> a{a0, a1};
                    if (d == 2) a.push_back(a2);
                    double s = 0;
                    for (std::size_t k = 0; k < g.size(); ++k) {
                        double m = 1;
                        for (int i = 0; i <= d; ++i) m *= std::pow(g.points[k][i], a[i]);
                        s += g.weights[k] * m;
                    }
                    double ref = oracle::sphere_moment(a, tau);
                    EXPECT_NEAR(s, ref, 1e-12 * std::max(1.0, std::abs(ref)));
                }
            }
        }
    }
}

TEST(Grids, BallAndSimplexGridsCarryTheirWeights)
{
    // int_{-1}^{1} x^2 |x|^{2k} (1-x^2)^{k2-1/2} dx = B(k1 + 3/2, k2 + 1/2)
    std::vector<double> k{0.5, 1.0};
    QuadratureGrid b = weighted_ball_grid(1, k, 6);
    double s = 0;
    for (std::size_t i = 0; i < b.size(); ++i) s += b.weights[i] * b.points[i][0] * b.points[i][0];
    EXPECT_NEAR(s, boost::math::beta(k[0] + 1.5, k[1] + 0.5), 1e-13);
    // int_0^1 u u^{k1-1/2} (1-u)^{k2-1/2} du = B(k1 + 3/2, k2 + 1/2)
    QuadratureGrid t = weighted_simplex_grid(1, k, 6);
    s = 0;
    for (std::size_t i = 0; i < t.size(); ++i) s += t.weights[i] * t.points[i][0];
    EXPECT_NEAR(s, boost::math::beta(k[0] + 1.5, k[1] + 0.5), 1e-13);
}

TEST(Grids, DirichletRuleTotalMass)
{
    // int_T u1^a u2^b (1-u1-u2)^c = Gamma(a+1)Gamma(b+1)Gamma(c+1)/Gamma(a+b+c+3)
    std::vector<double> a{-0.5, 0.25, 1.0};
    QuadratureGrid g = dirichlet_rule(2, a, 5);
    double ref = std::tgamma(a[0] + 1) * std::tgamma(a[1] + 1) * std::tgamma(a[2] + 1) / std::tgamma(a[0] + a[1] + a[2] + 3);
    EXPECT_NEAR(g.total(), ref, 1e-13);
}

TEST(Grids, RejectBadExponents)
{
    EXPECT_THROW(weighted_sphere_grid(1, {-0.5, 1.0}, 3), std::domain_error);
    EXPECT_THROW(weighted_sphere_grid(2, {0.5, 1.0}, 3), std::invalid_argument);
}
