#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include <dunkl/weights.hpp>

#include "oracles.hpp"

using namespace dunkl;

namespace {

double arc_weight(double phi, const std::vector<double>& tau)
{
    return std::pow(std::abs(std::cos(phi)), 2 * tau[0]) * std::pow(std::abs(std::sin(phi)), 2 * tau[1]);
}

// The same weight with the coordinate that vanishes at a multiple of pi/2
// taken from the exact distance to that end of the piece.
double arc_weight_sided(double phi, double dl, double du, const std::vector<double>& tau)
{
    double c = std::abs(std::cos(phi)), s = std::abs(std::sin(phi));
    for (auto [end, dist] : {std::pair{phi - dl, dl}, std::pair{phi + du, du}}) {
        double k = std::round(end / (std::numbers::pi / 2));
        if (std::abs(end - k * std::numbers::pi / 2) > 1e-12) continue;
        (static_cast<long>(k) % 2 == 0 ? s : c) = std::sin(dist);
    }
    return std::pow(c, 2 * tau[0]) * std::pow(s, 2 * tau[1]);
}

std::vector<double> quarter_breaks(double a, double b)
{
    std::vector<double> br;
    for (int k = -8; k <= 8; ++k) {
        double x = k * std::numbers::pi / 2;
        if (x > a && x < b) br.push_back(x);
    }
    return br;
}

} // namespace

TEST(Weights, EvaluationOnEachDomain)
{
    auto s = make_weight_spec(Domain::sphere, {0.5, 1.0});
    EXPECT_NEAR(weight_eval(s, {0.6, 0.8, 0}), 0.6 * 0.64, 1e-15);
    EXPECT_TRUE(weight_is_singular(make_weight_spec(Domain::sphere, {-0.25, 1.0}), {0, 1, 0}));
    auto b = make_weight_spec(Domain::ball, {0.5, 1.0});
    EXPECT_NEAR(weight_eval(b, {0.6, 0, 0}), 0.6 * std::pow(0.64, 0.5), 1e-15);
    auto t = make_weight_spec(Domain::simplex, {1.0, 0.5});
    EXPECT_NEAR(weight_eval(t, {0.25, 0, 0}), std::pow(0.25, 0.5), 1e-15);
    EXPECT_THROW(make_weight_spec(Domain::sphere, {-0.5, 1.0}), std::domain_error);
    EXPECT_THROW(make_weight_spec(Domain::sphere, {1.0}), std::invalid_argument);
}

TEST(Weights, AKappaGammaFormula)
{
    // 1/a_kappa = 2 prod Gamma(kappa_i + 1/2) / Gamma(|kappa| + (d+1)/2)
    for (auto k : {std::vector<double>{0.5, 1.0}, {0.0, 0.0}, {1.0, 2.0, 0.5}, {0.0, 0.3, 0.0}}) {
        double ref = 1 / oracle::sphere_moment(std::vector<int>(k.size(), 0), k);
        EXPECT_NEAR(a_kappa(make_multiplicity(k)), ref, 1e-13 * ref);
    }
    EXPECT_NEAR(a_kappa(make_multiplicity({0.0, 0.0, 0.0})), 1 / (4 * std::numbers::pi), 1e-15);
}

TEST(Weights, AKappaMonteCarlo)
{
    // Uniform points on S^2: mean of h^2 times the area.
    std::vector<double> k{1.0, 2.0, 0.5};
    std::mt19937_64 rng(7);
    std::normal_distribution<double> N(0, 1);
    double s = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        Vec3 x = normalized({N(rng), N(rng), N(rng)});
        s += std::pow(x[0] * x[0], k[0]) * std::pow(x[1] * x[1], k[1]) * std::pow(x[2] * x[2], k[2]);
    }
    double mc = 4 * std::numbers::pi * s / n;
    EXPECT_NEAR(1 / a_kappa(make_multiplicity(k)), mc, 0.02 * mc);
}

TEST(CapMeasure, CircleAgainstArcIntegral)
{
    for (auto tau : {std::vector<double>{0.5, 1.0}, {-0.4, 0.3}, {0.0, -0.45}}) {
        auto spec = make_weight_spec(Domain::sphere, tau);
        for (double c : {0.0, 0.3, 1.5, 1.5707, 2.9}) {
            for (double th : {0.01, 0.2, 1.0, 2.5, std::numbers::pi}) {
                double a = c - th, b = c + th;
                double ref = oracle::integrate_sided(
                    [&](double p, double dl, double du) { return arc_weight_sided(p, dl, du, tau); }, a, b,
                    quarter_breaks(a, b));
                double got = cap_measure(spec, {std::cos(c), std::sin(c), 0}, th);
                EXPECT_NEAR(got, ref, 1e-8 * ref) << "tau0=" << tau[0] << " c=" << c << " theta=" << th;
            }
        }
    }
}

TEST(CapMeasure, SphereClosedForms)
{
    // Unweighted sphere: 2 pi (1 - cos theta).
    auto flat = make_weight_spec(Domain::sphere, {0.0, 0.0, 0.0});
    Vec3 x = normalized({0.3, -0.5, 0.8});
    for (double th : {0.05, 0.7, 2.0}) {
        double ref = 2 * std::numbers::pi * (1 - std::cos(th));
        EXPECT_NEAR(cap_measure(flat, x, th), ref, 1e-8 * ref);
    }
    // |z|^{2t} around the pole: 2 pi (1 - cos^{2t+1} theta) / (2t + 1) for theta <= pi/2.
    const double t = 0.7;
    auto polar = make_weight_spec(Domain::sphere, {0.0, 0.0, t});
    for (double th : {0.1, 0.9, 1.5}) {
        double ref = 2 * std::numbers::pi * (1 - std::pow(std::cos(th), 2 * t + 1)) / (2 * t + 1);
        // The edge at theta = 1.5 passes 0.07 from the singular equator.
        EXPECT_NEAR(cap_measure(polar, {0, 0, 1}, th), ref, 1e-7 * ref);
    }
    // Whole sphere.
    std::vector<double> tau{1.0, -0.4, 0.5};
    auto spec = make_weight_spec(Domain::sphere, tau);
    EXPECT_NEAR(cap_measure(spec, x, std::numbers::pi), oracle::sphere_moment({0, 0, 0}, tau), 1e-8);
}

TEST(CapMeasure, BallIntervalAgainstDirectIntegral)
{
    std::vector<double> tau{-0.4, 1.0};
    auto spec = make_weight_spec(Domain::ball, tau);
    auto w = [&](double x) { return std::pow(std::abs(x), 2 * tau[0]) * std::pow(1 - x * x, tau[1] - 0.5); };
    for (double c : {0.0, 0.4, -0.95}) {
        for (double th : {0.02, 0.5, 2.0}) {
            double a = std::asin(c);
            double lo = std::sin(std::max(-std::numbers::pi / 2, a - th));
            double hi = std::sin(std::min(std::numbers::pi / 2, a + th));
            double ref = oracle::integrate(w, lo, hi, {0.0});
            EXPECT_NEAR(cap_measure(spec, {c, 0, 0}, th), ref, 1e-8 * ref) << "c=" << c << " theta=" << th;
        }
    }
}

TEST(CapMeasure, SimplexIntervalAgainstDirectIntegral)
{
    std::vector<double> tau{0.5, -0.2};
    auto spec = make_weight_spec(Domain::simplex, tau);
    // 1 - u from the distance to the upper end when the piece ends at u = 1.
    auto w = [&](double u, double, double du) {
        double v = std::abs(u + du - 1) < 1e-15 ? du : 1 - u;
        return std::pow(u, tau[0] - 0.5) * std::pow(v, tau[1] - 0.5);
    };
    for (double c : {0.5, 0.02, 0.9}) {
        for (double th : {0.03, 0.4, 1.5}) {
            double b = std::asin(std::sqrt(c));
            double lo = std::pow(std::sin(std::max(0.0, b - th)), 2);
            double hi = std::pow(std::sin(std::min(std::numbers::pi / 2, b + th)), 2);
            double ref = oracle::integrate_sided(w, lo, hi);
            EXPECT_NEAR(cap_measure(spec, {c, 0, 0}, th), ref, 1e-8 * ref) << "c=" << c << " theta=" << th;
        }
    }
}

TEST(CapMeasure, ComparandConventions)
{
    auto spec = make_weight_spec(Domain::sphere, {0.5, 1.0});
    Vec3 x{0.6, 0.8, 0};
    double th = 0.1;
    EXPECT_NEAR(lemma3_comparand(spec, x, th, Convention::measure), th * std::pow(0.7, 1.0) * std::pow(0.9, 2.0), 1e-15);
    EXPECT_NEAR(lemma3_comparand(spec, x, th, Convention::density_power), th * std::pow(0.7, 0.5) * std::pow(0.9, 1.0),
                1e-15);
    // The printed density |y_j|^{tau_j} is the measure density with tau/2.
    auto half = make_weight_spec(Domain::sphere, {0.25, 0.5});
    EXPECT_NEAR(cap_measure_density_power(1, {0.5, 1.0}, x, th), cap_measure(half, x, th), 1e-14);
}

TEST(Lifting, SphereBallAndBallSimplexSides)
{
    auto G = [](const Vec3& y) { return 1 + y[0] * y[0] + y[1]; };
    auto [l, r] = sphere_ball_sides(2, G, 12);
    // int_{S^2} (1 + x^2 + y) = 4 pi + 4 pi / 3
    EXPECT_NEAR(l, 4 * std::numbers::pi + 4 * std::numbers::pi / 3, 1e-12);
    EXPECT_NEAR(r, l, 1e-12);
    auto g = [](const Vec3& u) { return u[0]; };
    auto [bl, tr] = ball_simplex_sides(1, g, 8);
    // int_{-1}^{1} x^2 = 2/3
    EXPECT_NEAR(bl, 2.0 / 3, 1e-14);
    EXPECT_NEAR(tr, 2.0 / 3, 1e-14);
}
