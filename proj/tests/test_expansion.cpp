#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <gtest/gtest.h>

#include <dunkl/expansion.hpp>

#include "oracles.hpp"

using namespace dunkl;

namespace {

using Poly = std::vector<std::pair<std::vector<int>, double>>;

Poly random_monomial_poly(int m, int deg, std::mt19937_64& rng)
{
    std::normal_distribution<double> N(0, 1);
    Poly f;
    for (int n = 0; n <= deg; ++n) {
        for (auto& e : oracle::monomials(m, n)) f.push_back({e, N(rng) / (1 + n)});
    }
    return f;
}

double eval_poly(const Poly& f, const Vec3& y)
{
    double s = 0;
    for (const auto& [e, c] : f) {
        double t = c;
        for (std::size_t i = 0; i < e.size(); ++i) t *= std::pow(y[i], e[i]);
        s += t;
    }
    return s;
}

Vec3 random_point(int d, std::mt19937_64& rng)
{
    std::normal_distribution<double> N(0, 1);
    return normalized({N(rng), N(rng), d == 2 ? N(rng) : 0.0});
}

} // namespace

TEST(HarmonicSpace, BasisIsOrthonormalAndSized)
{
    for (auto k : {std::vector<double>{0.5, 1.0}, {1.0, 2.0, 0.5}}) {
        auto sp = make_harmonic_space(make_multiplicity(k), 6, 2);
        const int d = sp->dim();
        for (int n = 0; n <= 6; ++n) EXPECT_EQ(sp->block_size(n), harmonic_dimension(d, n));
        const int T = sp->total();
        // Gram matrix on a finer independent grid.
        QuadratureGrid g = weighted_sphere_grid_for_degree(d, k, 16);
        double mass = g.total();
        std::vector<double> v(T), G(T * T, 0.0);
        for (std::size_t q = 0; q < g.size(); ++q) {
            sp->eval_all(g.points[q], v.data());
            for (int a = 0; a < T; ++a) {
                for (int b = 0; b < T; ++b) G[a * T + b] += g.weights[q] / mass * v[a] * v[b];
            }
        }
        for (int a = 0; a < T; ++a) {
            for (int b = 0; b < T; ++b) EXPECT_NEAR(G[a * T + b], a == b ? 1.0 : 0.0, 1e-11);
        }
    }
}

TEST(Projection, MatchesSphereGramSchmidt)
{
    for (auto k : {std::vector<double>{0.5, 1.0}, {0.0, 0.0}, {1.0, 2.0, 0.5}, {0.3, 0.0, 1.2}}) {
        auto mk = make_multiplicity(k);
        const int d = mk.dim();
        const int D = 5;
        auto sp = make_harmonic_space(mk, D);
        std::mt19937_64 rng(17);
        Poly f = random_monomial_poly(d + 1, D, rng);
        DegreeDecomposition dec = project(sp, [&](const Vec3& y) { return eval_poly(f, y); }, D);
        EXPECT_TRUE(dec.exact);
        for (int s = 0; s < 4; ++s) {
            Vec3 y = random_point(d, rng);
            std::vector<double> yv(y.begin(), y.begin() + d + 1);
            for (int n = 0; n <= D; ++n) {
                double ref = static_cast<double>(oracle::sphere_poly_projection(k, f, n, yv) -
                                                 oracle::sphere_poly_projection(k, f, n - 1, yv));
                EXPECT_NEAR(dec.eval_component(n, y), ref, 1e-9) << "d=" << d << " n=" << n;
            }
            EXPECT_NEAR(dec.eval(y), eval_poly(f, y), 1e-11);
        }
    }
}

TEST(Projection, ReproducingKernelRoute)
{
    auto mk = make_multiplicity({0.5, 1.0});
    auto sp = make_harmonic_space(mk, 6);
    auto ctx = make_intertwine_context(mk, 24);
    std::mt19937_64 rng(4);
    DegreeDecomposition f = random_polynomial(sp, 6, rng);
    auto fv = f.grid_values();
    Vec3 x = random_point(1, rng);
    for (int n = 0; n <= 6; ++n) EXPECT_NEAR(project_kernel(ctx, *sp, n, fv, x), f.eval_component(n, x), 1e-11);
}

TEST(Projection, RandomPolynomialMeanZero)
{
    auto sp = make_harmonic_space(make_multiplicity({0.5, 1.0}), 4);
    std::mt19937_64 rng(1);
    DegreeDecomposition f = random_polynomial(sp, 4, rng, true);
    EXPECT_EQ(f.coef[0], 0.0);
    std::mt19937_64 a(9), b(9);
    EXPECT_EQ(random_polynomial(sp, 4, a).coef, random_polynomial(sp, 4, b).coef);
}

TEST(Poisson, ClosedFormKernelMatchesSeries)
{
    for (double lam : {0.0, 0.5, 1.5, 4.0}) {
        for (double r : {0.2, 0.6}) {
            for (double s : {-1.0, -0.3, 0.5, 1.0}) {
                double series = 0;
                for (int n = 0; n <= 200; ++n) series += std::pow(r, n) * gegenbauer_kernel_term<double>(n, lam, s);
                EXPECT_NEAR(poisson_kernel(lam, r, s), series, 1e-10 * std::max(1.0, std::abs(series)));
            }
        }
    }
}

TEST(Poisson, SeriesAndKernelRoutesAgree)
{
    auto mk = make_multiplicity({0.5, 1.0});
    auto sp = make_harmonic_space(mk, 6, 32);
    auto ctx = make_intertwine_context(mk, 24);
    std::mt19937_64 rng(2);
    DegreeDecomposition f = random_polynomial(sp, 6, rng);
    Vec3 x = random_point(1, rng);
    EXPECT_NO_THROW(poisson_checked(ctx, f, 0.4, x, 1e-10));
    EXPECT_THROW(poisson(f, 1.0), std::domain_error);
}

TEST(Heat, KernelTruncationAndPositivity)
{
    const double lam = 1.5;
    for (double t : {0.05, 0.3}) {
        int N = heat_truncation(lam, t);
        EXPECT_LT(std::exp(-N * (N + 2 * lam) * t), 1e-14);
        for (double s = -1; s <= 1; s += 0.01) EXPECT_GT(heat_kernel(lam, t, s, N), -1e-10);
    }
    EXPECT_THROW(heat_kernel(lam, 0.01, 0.3, 3), std::invalid_argument);
}

TEST(Subordination, ScalarIdentityAgainstIndependentQuadrature)
{
    boost::math::quadrature::exp_sinh<double> es;
    for (double lam : {0.0, 0.5, 2.0}) {
        for (double t : {0.1, 1.0, 5.0}) {
            for (int n : {0, 1, 3, 10}) {
                double ref = es.integrate([&](double s) {
                    return s > 0 ? std::exp(-n * (n + 2 * lam) * s) * subordinator(lam, t, s) : 0.0;
                });
                EXPECT_NEAR(subordinated_exponential(lam, t, n), ref, 1e-9);
                EXPECT_NEAR(subordinated_exponential(lam, t, n), std::exp(-n * t), 1e-10);
            }
        }
    }
}

TEST(Subordination, OperatorIdentity)
{
    auto sp = make_harmonic_space(make_multiplicity({1.0, 2.0, 0.5}), 6);
    std::mt19937_64 rng(8);
    DegreeDecomposition f = random_polynomial(sp, 6, rng);
    Vec3 x = random_point(2, rng);
    for (double t : {0.1, 1.0}) EXPECT_NEAR(subordinated_heat(f, t, x), poisson(f, std::exp(-t)).eval(x), 1e-10);
}

TEST(Cesaro, RatiosMatchGammaFormula)
{
    // A_k^delta = Gamma(k + delta + 1) / (Gamma(k + 1) Gamma(delta + 1))
    auto A = [](int k, double delta) { return std::exp(std::lgamma(k + delta + 1) - std::lgamma(k + 1.0) - std::lgamma(delta + 1)); };
    for (double delta : {0.3, 1.0, 2.6}) {
        const int n = 12;
        auto r = cesaro_ratios(n, delta);
        for (int k = 0; k <= n; ++k) EXPECT_NEAR(r[k], A(n - k, delta) / A(n, delta), 1e-13);
        EXPECT_DOUBLE_EQ(r[0], 1.0);
    }
}

TEST(Cesaro, KernelIntegratesToOne)
{
    // The degree-0 coefficient of q_n is 1: c_lambda int q_n(cos t) sin^{2 lambda} t dt = 1.
    const double lam = 1.5;
    JacobiRule r = gauss_jacobi_rule(30, lam - 0.5, lam - 0.5);
    double s = 0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * cesaro_kernel(lam, 8, lam + 0.1, r.nodes[i]);
    EXPECT_NEAR(c_lambda(lam) * s, 1.0, 1e-12);
}

TEST(Translation, ScalesHarmonicsByGegenbauerRatio)
{
    auto sp = make_harmonic_space(make_multiplicity({0.5, 1.0}), 5);
    std::mt19937_64 rng(6);
    DegreeDecomposition f = random_polynomial(sp, 5, rng).component(3);
    Vec3 x = random_point(1, rng);
    EXPECT_NEAR(translate(f, 0.0).eval(x), f.eval(x), 1e-13);
    double lam = sp->lambda();
    EXPECT_NEAR(translate(f, 0.7).eval(x), gegenbauer_ratio<double>(3, lam, std::cos(0.7)) * f.eval(x), 1e-13);
}

TEST(LittlewoodPaley, SingleHarmonicClosedForm)
{
    auto sp = make_harmonic_space(make_multiplicity({0.5, 1.0, 1.5}), 6);
    std::mt19937_64 rng(3);
    for (int n = 1; n <= 6; ++n) {
        DegreeDecomposition f = random_polynomial(sp, 6, rng).component(n);
        auto g = littlewood_paley_g(f);
        auto v = f.grid_values();
        double c = n / std::sqrt(2.0 * n * (2 * n - 1));
        for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(g[k], c * std::abs(v[k]), 1e-12);
    }
}

TEST(Multiplier, FiniteDifferencesOfPowers)
{
    // mu_l = l^k has Delta^k mu = k!, so block j gives 2^{j(k-1)} (2^j + 1) k!.
    for (int k : {1, 2, 3}) {
        MultiplierSequence mu;
        mu.k = k;
        for (int l = 0; l < 70; ++l) mu.values.push_back(std::pow(l, k));
        auto c = multiplier_condition(mu, k);
        ASSERT_GE(c.blocks, 4);
        double fact = std::tgamma(k + 1.0);
        for (int j = 0; j < c.blocks; ++j) {
            double ref = std::ldexp((std::ldexp(1.0, j) + 1) * fact, j * (k - 1));
            EXPECT_NEAR(c.block_values[j], ref, 1e-9 * ref);
        }
    }
}

TEST(Multiplier, HighPrecisionOverloadAgreesWhereDoubleIsReliable)
{
    MultiplierSequence mu;
    mu.k = 2;
    for (int l = 0; l < 64; ++l) mu.values.push_back(std::cos(3 * std::log(1.0 + l)));
    auto a = multiplier_condition(mu, 2);
    using HP = boost::multiprecision::cpp_bin_float_50;
    auto b = multiplier_condition([](const HP& l) { return cos(3 * log(1 + l)); }, 64, 2);
    ASSERT_EQ(a.blocks, b.blocks);
    for (int j = 0; j < a.blocks; ++j) EXPECT_NEAR(a.block_values[j], b.block_values[j], 1e-9);
    EXPECT_DOUBLE_EQ(a.sup_abs, 1.0);
}

TEST(Multiplier, ApplyAndValidate)
{
    auto sp = make_harmonic_space(make_multiplicity({0.5, 1.0}), 4);
    std::mt19937_64 rng(5);
    DegreeDecomposition f = random_polynomial(sp, 4, rng);
    MultiplierSequence one{std::vector<double>(5, 1.0), 1};
    EXPECT_EQ(apply_multiplier(f, one).coef, f.coef);
    MultiplierSequence shrt{std::vector<double>(3, 1.0), 1};
    EXPECT_THROW(apply_multiplier(f, shrt), std::invalid_argument);
    EXPECT_EQ(default_difference_order(0.5), 2);
    EXPECT_EQ(default_difference_order(1.0), 2);
    EXPECT_EQ(default_difference_order(4.0), 5);
}

TEST(Norms, GridNormOfConstant)
{
    auto sp = make_harmonic_space(make_multiplicity({0.5, 1.0}), 3);
    std::vector<double> ones(sp->grid.size(), 2.0);
    for (double p : {1.0, 1.5, 3.0}) EXPECT_NEAR(grid_norm(sp->grid.weights, ones, p), 2.0, 1e-14);
}

TEST(BallSimplex, SimplexProjectionNeedsDoubleDegree)
{
    auto sp = make_harmonic_space(make_multiplicity({0.5, 1.0}), 4);
    auto f = [](const Vec3& u) { return u[0]; };
    EXPECT_THROW(project_simplex(sp, 3, f, {0.3, 0, 0}, 1), std::invalid_argument);
    // proj_0 is the weighted mean: B(k1+3/2,k2+1/2)/B(k1+1/2,k2+1/2) = (k1+1/2)/(k1+k2+1)
    EXPECT_NEAR(project_simplex(sp, 0, f, {0.3, 0, 0}, 1), 1.0 / 2.5, 1e-13);
}
