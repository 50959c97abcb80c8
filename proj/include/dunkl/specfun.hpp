#ifndef DUNKL_SPECFUN_HPP
#define DUNKL_SPECFUN_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace dunkl {

// C_n^lambda(t) by the three-term recurrence. lambda = 0 returns the limit of
// C_n^lambda itself, which is 0 for n >= 1; kernels that need the finite
// limit of (n+lambda)/lambda C_n^lambda call gegenbauer_kernel_term instead.
template <typename Real>
Real gegenbauer(unsigned n, Real lambda, Real t)
{
    static_assert(!std::is_integral<Real>::value, "floating point arguments required");
    if (lambda <= Real(-0.5)) {
        throw std::domain_error("gegenbauer: lambda > -1/2 is required");
    }
    using std::abs;
    if (abs(t) > 1 + Real(1e-12)) {
        throw std::domain_error("gegenbauer: |t| <= 1 is required");
    }
    if (n == 0) {
        return Real(1);
    }
    if (lambda == 0) {
        return Real(0);
    }
    Real y0 = 1;
    Real y1 = 2 * lambda * t;
    for (unsigned k = 1; k < n; ++k) {
        Real y2 = (2 * (k + lambda) * t * y1 - (k + 2 * lambda - 1) * y0) / (k + 1);
        y0 = y1;
        y1 = y2;
    }
    return y1;
}

// Chebyshev polynomial of the first kind, T_n(t).
template <typename Real>
Real chebyshev_t(unsigned n, Real t)
{
    if (n == 0) {
        return Real(1);
    }
    Real y0 = 1;
    Real y1 = t;
    for (unsigned k = 1; k < n; ++k) {
        Real y2 = 2 * t * y1 - y0;
        y0 = y1;
        y1 = y2;
    }
    return y1;
}

// (n+lambda)/lambda * C_n^lambda(t), the zonal kernel factor. At lambda = 0
// the finite limit 2 T_n(t) (n >= 1) is used.
template <typename Real>
Real gegenbauer_kernel_term(unsigned n, Real lambda, Real t)
{
    if (lambda == 0) {
        return n == 0 ? Real(1) : 2 * chebyshev_t(n, t);
    }
    return (n + lambda) / lambda * gegenbauer(n, lambda, t);
}

// C_n^lambda(t) / C_n^lambda(1); T_n(t) at lambda = 0.
template <typename Real>
Real gegenbauer_ratio(unsigned n, Real lambda, Real t)
{
    if (lambda == 0) {
        return chebyshev_t(n, t);
    }
    Real one = gegenbauer(n, lambda, Real(1));
    return gegenbauer(n, lambda, t) / one;
}

// All values (n+lambda)/lambda C_n^lambda(t) for n = 0..N in one sweep.
inline void gegenbauer_kernel_terms(unsigned N, double lambda, double t, double* out)
{
    if (lambda == 0) {
        double y0 = 1, y1 = t;
        out[0] = 1;
        if (N >= 1) out[1] = 2 * t;
        for (unsigned k = 1; k < N; ++k) {
            double y2 = 2 * t * y1 - y0;
            y0 = y1;
            y1 = y2;
            out[k + 1] = 2 * y2;
        }
        return;
    }
    double y0 = 1, y1 = 2 * lambda * t;
    out[0] = 1;
    if (N >= 1) out[1] = (1 + lambda) / lambda * y1;
    for (unsigned k = 1; k < N; ++k) {
        double y2 = (2 * (k + lambda) * t * y1 - (k + 2 * lambda - 1) * y0) / (k + 1);
        y0 = y1;
        y1 = y2;
        out[k + 1] = (k + 1 + lambda) / lambda * y2;
    }
}

// P_n^{(a,b)}(x) by the three-term recurrence.
inline double jacobi_polynomial(int n, double a, double b, double x)
{
    if (n == 0) return 1;
    double p0 = 1;
    double p1 = 0.5 * (a - b + (a + b + 2) * x);
    for (int k = 1; k < n; ++k) {
        double s = 2 * k + a + b;
        double c0 = 2 * (k + 1) * (k + a + b + 1) * s;
        double c1 = (s + 1) * (s * (s + 2) * x + a * a - b * b);
        double c2 = 2 * (k + a) * (k + b) * (s + 2);
        double p2 = (c1 * p1 - c2 * p0) / c0;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

struct JacobiRule {
    double alpha = 0;
    double beta = 0;
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

namespace detail {

// P_m^{(a,b)}(x) and its derivative.
inline void jacobi_p(int m, double a, double b, double x, double& p, double& dp)
{
    double p0 = 1;
    double p1 = 0.5 * (a - b + (a + b + 2) * x);
    if (m == 0) {
        p = 1;
        dp = 0;
        return;
    }
    for (int k = 1; k < m; ++k) {
        double k1 = k + 1;
        double s = 2 * k + a + b;
        double a1 = 2 * k1 * (k1 + a + b) * s;
        double a2 = (s + 1) * (a * a - b * b);
        double a3 = s * (s + 1) * (s + 2);
        double a4 = 2 * (k + a) * (k + b) * (s + 2);
        double p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    p = p1;
    // (2m+a+b)(1-x^2) P' = m(a-b-(2m+a+b)x) P_m + 2(m+a)(m+b) P_{m-1}
    double s = 2 * m + a + b;
    dp = (m * (a - b - s * x) * p1 + 2 * (m + a) * (m + b) * p0) / (s * (1 - x * x));
}

} // namespace detail

// m-point Gauss-Jacobi rule for (1-t)^alpha (1+t)^beta on [-1,1]. Roots by
// Newton iteration with deflation from Chebyshev initial guesses.
inline JacobiRule gauss_jacobi_rule(int m, double alpha, double beta)
{
    if (m < 1) {
        throw std::invalid_argument("gauss_jacobi_rule: m >= 1 is required");
    }
    if (!(alpha > -1) || !(beta > -1)) {
        throw std::domain_error("gauss_jacobi_rule: alpha, beta > -1 are required");
    }
    JacobiRule r;
    r.alpha = alpha;
    r.beta = beta;
    r.nodes.resize(m);
    r.weights.resize(m);
    const double tol = 1e-14;
    for (int k = 0; k < m; ++k) {
        double x = -std::cos((2.0 * k + 1) * std::numbers::pi / (2.0 * m));
        if (k > 0) {
            x = 0.5 * (x + r.nodes[k - 1]);
        }
        for (int it = 0; it < 100; ++it) {
            double p, dp;
            detail::jacobi_p(m, alpha, beta, x, p, dp);
            double s = 0;
            for (int j = 0; j < k; ++j) {
                s += 1.0 / (x - r.nodes[j]);
            }
            double delta = -p / (dp - s * p);
            x += delta;
            if (std::abs(delta) < tol) {
                break;
            }
        }
        r.nodes[k] = x;
    }
    const double lc = std::lgamma(m + alpha + 1) + std::lgamma(m + beta + 1) -
                      std::lgamma(m + alpha + beta + 1) - std::lgamma(m + 1.0) +
                      (alpha + beta + 1) * std::log(2.0);
    for (int k = 0; k < m; ++k) {
        double p, dp;
        detail::jacobi_p(m, alpha, beta, r.nodes[k], p, dp);
        double x = r.nodes[k];
        r.weights[k] = std::exp(lc) / ((1 - x * x) * dp * dp);
    }
    return r;
}

inline JacobiRule gauss_legendre_rule(int m) { return gauss_jacobi_rule(m, 0.0, 0.0); }

// Normalizer of (sin theta)^{2 lambda} d theta on [0, pi].
inline double c_lambda(double lambda, bool allow_degenerate = false)
{
    if (lambda < 0 || (lambda == 0 && !allow_degenerate)) {
        throw std::domain_error("c_lambda: lambda > 0 is required");
    }
    return std::exp(std::lgamma(lambda + 1) - std::lgamma(lambda + 0.5)) / std::sqrt(std::numbers::pi);
}

struct MultiplicityVector {
    std::vector<double> kappa;
    double gamma_kappa = 0;
    double lambda_kappa = 0;

    int dim() const { return static_cast<int>(kappa.size()) - 1; }
    std::size_t size() const { return kappa.size(); }
    double operator[](std::size_t i) const { return kappa[i]; }
    bool is_zero() const
    {
        for (double k : kappa) {
            if (k != 0) return false;
        }
        return true;
    }
};

inline MultiplicityVector make_multiplicity(std::vector<double> kappa)
{
    if (kappa.size() < 2 || kappa.size() > 3) {
        throw std::invalid_argument("multiplicity vector needs d+1 entries with d in {1,2}");
    }
    MultiplicityVector m;
    for (double k : kappa) {
        if (!(k >= 0) || !std::isfinite(k)) {
            throw std::domain_error("multiplicity entries must be finite and >= 0");
        }
        m.gamma_kappa += k;
    }
    m.kappa = std::move(kappa);
    m.lambda_kappa = m.gamma_kappa + 0.5 * (m.dim() - 1);
    return m;
}

// Number of spherical h-harmonics of degree n on S^d.
inline long harmonic_dimension(int d, int n)
{
    auto binom = [](long a, long b) -> long {
        if (b < 0 || a < b) return 0;
        long r = 1;
        for (long i = 1; i <= b; ++i) r = r * (a - b + i) / i;
        return r;
    };
    return binom(n + d, n) - binom(n + d - 2, n - 2);
}

} // namespace dunkl

#endif
