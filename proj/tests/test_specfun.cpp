#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/legendre.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>
#include <gtest/gtest.h>

#include <dunkl/specfun.hpp>

using namespace dunkl;
using Big = boost::multiprecision::cpp_dec_float_50;

namespace {

// C_n^lambda(t) = sum_k (-1)^k Gamma(n-k+lambda) / (Gamma(lambda) k! (n-2k)!) (2t)^{n-2k}
Big gegenbauer_explicit(int n, Big lambda, Big t)
{
    Big s = 0;
    for (int k = 0; 2 * k <= n; ++k) {
        Big term = boost::math::tgamma(Big(n - k) + lambda) /
                   (boost::math::tgamma(lambda) * boost::math::factorial<Big>(k) * boost::math::factorial<Big>(n - 2 * k)) *
                   pow(2 * t, n - 2 * k);
        s += (k % 2 ? -term : term);
    }
    return s;
}

} // namespace

TEST(Gegenbauer, MatchesExplicitSumInHighPrecision)
{
    for (double lam : {0.25, 0.5, 1.0, 2.5, 4.0}) {
        for (int n = 0; n <= 12; ++n) {
            for (double t : {-1.0, -0.7, -0.1, 0.0, 0.33, 0.9, 1.0}) {
                double ref = static_cast<double>(gegenbauer_explicit(n, Big(lam), Big(t)));
                double got = gegenbauer<double>(n, lam, t);
                EXPECT_NEAR(got, ref, 1e-12 * std::max(1.0, std::abs(ref))) << "n=" << n << " lambda=" << lam;
            }
        }
    }
}

TEST(Gegenbauer, LongDoubleAgreesWithDouble)
{
    EXPECT_NEAR(static_cast<double>(gegenbauer<long double>(7, 1.5L, 0.3L)), gegenbauer<double>(7, 1.5, 0.3), 1e-13);
}

TEST(Gegenbauer, HalfIsLegendre)
{
    for (int n = 0; n <= 10; ++n) {
        for (double t : {-0.9, -0.2, 0.4, 0.95}) {
            EXPECT_NEAR(gegenbauer<double>(n, 0.5, t), boost::math::legendre_p(n, t), 1e-13);
        }
    }
}

TEST(Gegenbauer, ValueAtOne)
{
    // C_n^lambda(1) = Gamma(n + 2 lambda) / (n! Gamma(2 lambda))
    for (double lam : {0.3, 1.0, 2.0}) {
        for (int n = 0; n <= 10; ++n) {
            double ref = std::exp(std::lgamma(n + 2 * lam) - std::lgamma(n + 1.0) - std::lgamma(2 * lam));
            EXPECT_NEAR(gegenbauer<double>(n, lam, 1.0), ref, 1e-12 * ref);
        }
    }
}

TEST(Gegenbauer, LambdaZeroLimitIsTwiceChebyshev)
{
    // (n+lambda)/lambda C_n^lambda(t) -> 2 T_n(t) as lambda -> 0
    for (int n = 1; n <= 8; ++n) {
        double t = 0.37;
        double near0 = gegenbauer_kernel_term<double>(n, 1e-9, t);
        EXPECT_NEAR(gegenbauer_kernel_term<double>(n, 0.0, t), near0, 1e-7);
        EXPECT_NEAR(gegenbauer_kernel_term<double>(n, 0.0, t), 2 * std::cos(n * std::acos(t)), 1e-13);
    }
    EXPECT_EQ(gegenbauer<double>(3, 0.0, 0.5), 0.0);
    EXPECT_NEAR(gegenbauer_ratio<double>(4, 0.0, 0.2), std::cos(4 * std::acos(0.2)), 1e-14);
}

TEST(Gegenbauer, KernelTermsSweepMatchesSingleTerms)
{
    double out[11];
    for (double lam : {0.0, 0.5, 1.75}) {
        gegenbauer_kernel_terms(10, lam, -0.42, out);
        for (int n = 0; n <= 10; ++n) EXPECT_NEAR(out[n], gegenbauer_kernel_term<double>(n, lam, -0.42), 1e-12);
    }
}

TEST(Gegenbauer, DomainErrors)
{
    EXPECT_THROW(gegenbauer<double>(2, -0.5, 0.1), std::domain_error);
    EXPECT_THROW(gegenbauer<double>(2, 1.0, 1.5), std::domain_error);
}

TEST(Jacobi, ReducesToLegendre)
{
    for (int n = 0; n <= 9; ++n) EXPECT_NEAR(jacobi_polynomial(n, 0, 0, 0.31), boost::math::legendre_p(n, 0.31), 1e-13);
}

TEST(Jacobi, ValueAtOne)
{
    // P_n^{(a,b)}(1) = binom(n + a, n)
    for (int n = 0; n <= 8; ++n) {
        double a = 0.7, b = -0.3;
        double ref = std::exp(std::lgamma(n + a + 1) - std::lgamma(n + 1.0) - std::lgamma(a + 1));
        EXPECT_NEAR(jacobi_polynomial(n, a, b, 1.0), ref, 1e-12 * ref);
    }
}

TEST(GaussJacobi, IntegratesBetaMomentsExactly)
{
    // int (1-t)^a (1+t)^{b+j} dt = 2^{a+b+j+1} B(a+1, b+j+1)
    for (auto [a, b] : {std::pair{-0.5, 0.5}, {0.0, 0.0}, {1.5, 2.5}, {-0.3, 0.2}}) {
        const int m = 12;
        JacobiRule r = gauss_jacobi_rule(m, a, b);
        ASSERT_EQ(r.size(), static_cast<std::size_t>(m));
        for (int j = 0; j < 2 * m; ++j) {
            double s = 0;
            for (int k = 0; k < m; ++k) s += r.weights[k] * std::pow(1 + r.nodes[k], j);
            double ref = std::pow(2.0, a + b + j + 1) * boost::math::beta(a + 1, b + j + 1);
            EXPECT_NEAR(s, ref, 1e-11 * ref) << "a=" << a << " b=" << b << " j=" << j;
        }
        for (int k = 1; k < m; ++k) EXPECT_LT(r.nodes[k - 1], r.nodes[k]);
    }
}

TEST(GaussJacobi, RejectsBadParameters)
{
    EXPECT_THROW(gauss_jacobi_rule(0, 0, 0), std::invalid_argument);
    EXPECT_THROW(gauss_jacobi_rule(4, -1, 0), std::domain_error);
}

TEST(CLambda, NormalizesSinePower)
{
    // int_0^pi sin^{2 lambda} = sqrt(pi) Gamma(lambda + 1/2) / Gamma(lambda + 1)
    for (double lam : {0.25, 0.5, 1.0, 3.5}) {
        double integral = std::sqrt(std::numbers::pi) * std::tgamma(lam + 0.5) / std::tgamma(lam + 1);
        EXPECT_NEAR(c_lambda(lam) * integral, 1.0, 1e-14);
    }
    EXPECT_THROW(c_lambda(0.0), std::domain_error);
    EXPECT_NEAR(c_lambda(0.0, true), 1 / std::numbers::pi, 1e-15);
}

TEST(Multiplicity, LambdaAndGamma)
{
    auto m = make_multiplicity({1.0, 2.0, 0.5});
    EXPECT_DOUBLE_EQ(m.gamma_kappa, 3.5);
    EXPECT_DOUBLE_EQ(m.lambda_kappa, 4.0);
    EXPECT_EQ(m.dim(), 2);
    auto z = make_multiplicity({0.0, 0.0});
    EXPECT_TRUE(z.is_zero());
    EXPECT_DOUBLE_EQ(z.lambda_kappa, 0.0);
    EXPECT_THROW(make_multiplicity({1.0}), std::invalid_argument);
    EXPECT_THROW(make_multiplicity({1.0, -0.1}), std::domain_error);
}

TEST(HarmonicDimension, CircleAndSphere)
{
    EXPECT_EQ(harmonic_dimension(1, 0), 1);
    for (int n = 1; n <= 10; ++n) EXPECT_EQ(harmonic_dimension(1, n), 2);
    for (int n = 0; n <= 10; ++n) EXPECT_EQ(harmonic_dimension(2, n), 2 * n + 1);
}
