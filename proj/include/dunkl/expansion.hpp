#ifndef DUNKL_EXPANSION_HPP
#define DUNKL_EXPANSION_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "geometry.hpp"
#include "intertwine.hpp"
#include "specfun.hpp"
#include "weights.hpp"

namespace dunkl {

// One member of the orthogonal basis of H_n: y^eps Q(y_1^2, ..., y_{d+1}^2)
// where Q is the (k, j) Proriol-Jacobi polynomial of degree k on the simplex
// for the Dirichlet weight prod u_i^{kappa_i + eps_i - 1/2}, |eps| + 2k = n.
struct BasisFunction {
    std::array<int, 3> eps{};
    int k = 0;
    int j = 0;
    double scale = 1;
};

namespace detail {

inline int eps_size(const std::array<int, 3>& e) { return e[0] + e[1] + e[2]; }

// S^j P_j^{(a,b)}(X/S) for j = 0..J, by the homogenized recurrence.
inline void homogeneous_jacobi(int J, double a, double b, double X, double S, double* out)
{
    out[0] = 1;
    if (J == 0) return;
    out[1] = 0.5 * ((a - b) * S + (a + b + 2) * X);
    for (int k = 1; k < J; ++k) {
        double s = 2 * k + a + b;
        double c0 = 2 * (k + 1) * (k + a + b + 1) * s;
        double c1 = (s + 1) * (s * (s + 2) * X + (a * a - b * b) * S);
        double c2 = 2 * (k + a) * (k + b) * (s + 2);
        out[k + 1] = (c1 * out[k] - c2 * S * S * out[k - 1]) / c0;
    }
}

} // namespace detail

// Orthonormal basis of the h-harmonics of degree <= N for h_kappa^2, together
// with the symmetric weighted grid used for every projection. Grid weights
// include a_kappa h_kappa^2 and sum to 1.
struct HarmonicSpace {
    MultiplicityVector kappa;
    int max_degree = 0;
    double a_kappa = 1;
    QuadratureGrid grid;
    std::vector<std::vector<BasisFunction>> blocks;
    std::vector<int> offset;     // block n occupies [offset[n], offset[n+1])
    std::vector<double> table;   // basis values at grid nodes, row-major by node

    int dim() const { return kappa.dim(); }
    int total() const { return offset.back(); }
    int block_size(int n) const { return offset[n + 1] - offset[n]; }
    double lambda() const { return kappa.lambda_kappa; }

    // Values of all basis functions at y (length total()).
    void eval_all(const Vec3& y, double* out) const
    {
        const int d = dim();
        const int N = max_degree;
        Vec3 u{};
        for (int i = 0; i <= d; ++i) u[i] = y[i] * y[i];
        std::vector<double> inner(N + 2), outer(N + 2);
        for (int n = 0; n <= N; ++n) {
            for (int b = 0; b < block_size(n); ++b) out[offset[n] + b] = 0;
        }
        // Group by parity pattern; each pattern fills its members in all blocks.
        const int patterns = 1 << (d + 1);
        for (int e = 0; e < patterns; ++e) {
            std::array<int, 3> eps{};
            double mono = 1;
            for (int i = 0; i <= d; ++i) {
                eps[i] = (e >> i) & 1;
                if (eps[i]) mono *= y[i];
            }
            const int ne = detail::eps_size(eps);
            if (ne > N) continue;
            const int K = (N - ne) / 2;
            double a[3];
            for (int i = 0; i <= d; ++i) a[i] = kappa[i] + eps[i] - 0.5;
            if (d == 1) {
                // P_k^{(a_2, a_1)}(2 u_1 - 1) = P_k^{(a_2,a_1)}(u_1 - u_2)
                detail::homogeneous_jacobi(K, a[1], a[0], u[0] - u[1], u[0] + u[1], outer.data());
                for (int k = 0; k <= K; ++k) {
                    int n = ne + 2 * k;
                    for (int b = 0; b < block_size(n); ++b) {
                        const BasisFunction& f = blocks[n][b];
                        if (f.eps == eps && f.k == k) out[offset[n] + b] = f.scale * mono * outer[k];
                    }
                }
                continue;
            }
            // Q_{k,j} = P_{k-j}^{(2j+a_2+a_3+1, a_1)}(2u_1 - 1) (u_2+u_3)^j P_j^{(a_3,a_2)}((u_2-u_3)/(u_2+u_3))
            const double s23 = u[1] + u[2];
            detail::homogeneous_jacobi(K, a[2], a[1], u[1] - u[2], s23, inner.data());
            for (int j = 0; j <= K; ++j) {
                detail::homogeneous_jacobi(K - j, 2 * j + a[1] + a[2] + 1, a[0], u[0] - s23, u[0] + s23,
                                           outer.data());
                for (int k = j; k <= K; ++k) {
                    int n = ne + 2 * k;
                    double v = mono * inner[j] * outer[k - j];
                    for (int b = 0; b < block_size(n); ++b) {
                        const BasisFunction& f = blocks[n][b];
                        if (f.eps == eps && f.k == k && f.j == j) out[offset[n] + b] = f.scale * v;
                    }
                }
            }
        }
    }

    const double* row(std::size_t node) const { return table.data() + node * total(); }
};

// Builds the space for degrees <= N; the grid integrates sphere polynomials of
// degree 2N + extra_degree against h_kappa^2 exactly.
inline std::shared_ptr<const HarmonicSpace> make_harmonic_space(const MultiplicityVector& kappa, int N,
                                                                int extra_degree = 0)
{
    if (N < 0) throw std::invalid_argument("harmonic space: degree >= 0 required");
    auto sp = std::make_shared<HarmonicSpace>();
    const int d = kappa.dim();
    sp->kappa = kappa;
    sp->max_degree = N;
    sp->blocks.resize(N + 1);
    for (int n = 0; n <= N; ++n) {
        for (int e = 0; e < (1 << (d + 1)); ++e) {
            std::array<int, 3> eps{};
            for (int i = 0; i <= d; ++i) eps[i] = (e >> i) & 1;
            int ne = detail::eps_size(eps);
            if (ne > n || (n - ne) % 2 != 0) continue;
            int k = (n - ne) / 2;
            if (d == 1) {
                sp->blocks[n].push_back({eps, k, 0, 1.0});
            } else {
                for (int j = 0; j <= k; ++j) sp->blocks[n].push_back({eps, k, j, 1.0});
            }
        }
    }
    sp->offset.assign(N + 2, 0);
    for (int n = 0; n <= N; ++n) sp->offset[n + 1] = sp->offset[n] + static_cast<int>(sp->blocks[n].size());
    QuadratureGrid g = weighted_sphere_grid_for_degree(d, kappa.kappa, 2 * N + extra_degree);
    double mass = g.total();
    sp->a_kappa = 1 / mass;
    for (double& w : g.weights) w /= mass;
    g.exact_degree = 2 * N + extra_degree;
    sp->grid = std::move(g);
    const int T = sp->total();
    sp->table.assign(sp->grid.size() * T, 0.0);
    for (std::size_t k = 0; k < sp->grid.size(); ++k) sp->eval_all(sp->grid.points[k], sp->table.data() + k * T);
    // Normalize; distinct members are orthogonal by construction.
    std::vector<double> nrm(T, 0.0);
    for (std::size_t k = 0; k < sp->grid.size(); ++k) {
        const double* r = sp->row(k);
        for (int b = 0; b < T; ++b) nrm[b] += sp->grid.weights[k] * r[b] * r[b];
    }
    for (int n = 0; n <= N; ++n) {
        for (int b = 0; b < sp->block_size(n); ++b) {
            double s = 1 / std::sqrt(nrm[sp->offset[n] + b]);
            sp->blocks[n][b].scale = s;
        }
    }
    for (std::size_t k = 0; k < sp->grid.size(); ++k) {
        double* r = sp->table.data() + k * T;
        for (int n = 0; n <= N; ++n) {
            for (int b = 0; b < sp->block_size(n); ++b) r[sp->offset[n] + b] *= sp->blocks[n][b].scale;
        }
    }
    return sp;
}

// Truncated expansion f = sum_n proj_n f, stored as coefficients in the
// orthonormal basis of the space.
struct DegreeDecomposition {
    std::shared_ptr<const HarmonicSpace> space;
    std::vector<double> coef;
    bool exact = true;  // false when the projection grid was under-resolved

    int max_degree() const { return space->max_degree; }

    double eval(const Vec3& y) const
    {
        std::vector<double> v(space->total());
        space->eval_all(y, v.data());
        double s = 0;
        for (int b = 0; b < space->total(); ++b) s += coef[b] * v[b];
        return s;
    }

    double eval_component(int n, const Vec3& y) const
    {
        std::vector<double> v(space->total());
        space->eval_all(y, v.data());
        double s = 0;
        for (int b = space->offset[n]; b < space->offset[n + 1]; ++b) s += coef[b] * v[b];
        return s;
    }

    // Values on the space grid.
    std::vector<double> grid_values() const
    {
        const std::size_t G = space->grid.size();
        std::vector<double> out(G, 0.0);
        for (std::size_t k = 0; k < G; ++k) {
            const double* r = space->row(k);
            double s = 0;
            for (int b = 0; b < space->total(); ++b) s += coef[b] * r[b];
            out[k] = s;
        }
        return out;
    }

    std::vector<double> component_values(int n) const { return component(n).grid_values(); }

    DegreeDecomposition component(int n) const
    {
        DegreeDecomposition c{space, std::vector<double>(coef.size(), 0.0), exact};
        for (int b = space->offset[n]; b < space->offset[n + 1]; ++b) c.coef[b] = coef[b];
        return c;
    }

    // Sup over the grid of |component n|.
    double component_sup(int n) const
    {
        auto v = component_values(n);
        double m = 0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
};

// Projection of grid samples onto all degrees <= N.
inline DegreeDecomposition project_values(std::shared_ptr<const HarmonicSpace> sp, const std::vector<double>& values,
                                          int f_degree = -1)
{
    if (values.size() != sp->grid.size()) throw std::invalid_argument("project: sample count mismatch");
    DegreeDecomposition out{sp, std::vector<double>(sp->total(), 0.0), true};
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double* r = sp->row(k);
        double w = sp->grid.weights[k] * values[k];
        for (int b = 0; b < sp->total(); ++b) out.coef[b] += w * r[b];
    }
    out.exact = f_degree >= 0 && f_degree + sp->max_degree <= sp->grid.exact_degree;
    return out;
}

// Projection of a function given pointwise. f_degree is its polynomial degree
// (or -1 if it is not a polynomial); exact reports whether the grid resolves it.
template <class F>
DegreeDecomposition project(std::shared_ptr<const HarmonicSpace> sp, F&& f, int f_degree = -1)
{
    std::vector<double> v(sp->grid.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(sp->grid.points[k]);
    return project_values(std::move(sp), v, f_degree);
}

// proj_n f as its own decomposition.
template <class F>
DegreeDecomposition project_degree(std::shared_ptr<const HarmonicSpace> sp, int n, F&& f, int f_degree = -1)
{
    return project(std::move(sp), std::forward<F>(f), f_degree).component(n);
}

// Multiplies block n by m(n).
template <class M>
DegreeDecomposition apply_degree_multiplier(const DegreeDecomposition& f, M&& m)
{
    DegreeDecomposition out = f;
    const auto& sp = *f.space;
    for (int n = 0; n <= sp.max_degree; ++n) {
        double s = m(n);
        for (int b = sp.offset[n]; b < sp.offset[n + 1]; ++b) out.coef[b] *= s;
    }
    return out;
}

// Random polynomial of degree <= deg with N(0,1) coefficients scaled by 1/(1+n).
inline DegreeDecomposition random_polynomial(std::shared_ptr<const HarmonicSpace> sp, int deg, std::mt19937_64& rng,
                                             bool mean_zero = false)
{
    std::normal_distribution<double> N(0.0, 1.0);
    DegreeDecomposition f{sp, std::vector<double>(sp->total(), 0.0), true};
    for (int n = 0; n <= std::min(deg, sp->max_degree); ++n) {
        for (int b = sp->offset[n]; b < sp->offset[n + 1]; ++b) {
            double c = N(rng) / (1 + n);
            f.coef[b] = (mean_zero && n == 0) ? 0.0 : c;
        }
    }
    return f;
}

// ---- zonal kernels ----

// (n+lambda)/lambda V[C_n^lambda(<x,.>)](y); at lambda = 0 (d = 1, kappa = 0)
// the factor is the limit 2 T_n.
inline double reproducing_kernel(const IntertwineContext& ctx, int n, const Vec3& x, const Vec3& y)
{
    const double lam = ctx.kappa.lambda_kappa;
    return intertwine_profile(
        ctx, [&](double s) { return gegenbauer_kernel_term<double>(n, lam, clamp_unit(s)); }, x, y);
}

// proj_n f(x) = a_kappa int f(y) P_n(x,y) h^2(y) dw(y) on the space grid.
inline double project_kernel(const IntertwineContext& ctx, const HarmonicSpace& sp, int n,
                             const std::vector<double>& values, const Vec3& x)
{
    double s = 0;
    for (std::size_t k = 0; k < sp.grid.size(); ++k) {
        s += sp.grid.weights[k] * values[k] * reproducing_kernel(ctx, n, x, sp.grid.points[k]);
    }
    return s;
}

// (f *_kappa g)(x) = a_kappa int f(y) V[g(<x,.>)](y) h^2(y) dw(y) on the space grid.
template <class G>
double convolve(const IntertwineContext& ctx, const HarmonicSpace& sp, const std::vector<double>& values, G&& g,
                const Vec3& x)
{
    double s = 0;
    for (std::size_t k = 0; k < sp.grid.size(); ++k) {
        if (values[k] == 0) continue;
        s += sp.grid.weights[k] * values[k] *
             intertwine_profile(ctx, [&](double t) { return g(clamp_unit(t)); }, x, sp.grid.points[k]);
    }
    return s;
}

// c_lambda int_{-1}^1 g(t) C_n(t)/C_n(1) (1-t^2)^{lambda-1/2} dt, the factor by
// which convolution with g multiplies proj_n (T_n in place of C_n/C_n(1) at
// lambda = 0). Gauss-Jacobi with m nodes.
template <class G>
double zonal_coefficient(double lambda, int n, G&& g, int m = 64)
{
    JacobiRule r = gauss_jacobi_rule(m, lambda - 0.5, lambda - 0.5);
    double c = 0, mass = 0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        c += r.weights[k] * g(r.nodes[k]) * gegenbauer_ratio<double>(n, lambda, r.nodes[k]);
        mass += r.weights[k];
    }
    return c / mass;
}

// Convolution with a zonal g through its coefficients.
template <class G>
DegreeDecomposition convolve_coefficients(const DegreeDecomposition& f, G&& g, int m = 64)
{
    const double lam = f.space->lambda();
    return apply_degree_multiplier(f, [&](int n) { return zonal_coefficient(lam, n, g, m); });
}

// Poisson kernel (1-r^2)/(1-2rs+r^2)^{lambda+1}.
inline double poisson_kernel(double lambda, double r, double s)
{
    return (1 - r * r) / std::pow(1 - 2 * r * s + r * r, lambda + 1);
}

namespace detail {

inline void check_radius(double r)
{
    if (!(r >= 0 && r < 1)) throw std::domain_error("poisson: 0 <= r < 1 is required");
}

} // namespace detail

// P_r f = sum r^n proj_n f.
inline DegreeDecomposition poisson(const DegreeDecomposition& f, double r)
{
    detail::check_radius(r);
    return apply_degree_multiplier(f, [&](int n) { return std::pow(r, n); });
}

// P_r f(x) from the kernel: f *_kappa p_r.
inline double poisson_convolve(const IntertwineContext& ctx, const HarmonicSpace& sp, const std::vector<double>& values,
                               double r, const Vec3& x)
{
    detail::check_radius(r);
    const double lam = ctx.kappa.lambda_kappa;
    return convolve(ctx, sp, values, [&](double s) { return poisson_kernel(lam, r, s); }, x);
}

// Both Poisson routes at x; throws when they differ by more than tol.
inline double poisson_checked(const IntertwineContext& ctx, const DegreeDecomposition& f, double r, const Vec3& x,
                              double tol = 1e-6)
{
    double a = poisson(f, r).eval(x);
    double b = poisson_convolve(ctx, *f.space, f.grid_values(), r, x);
    if (std::abs(a - b) > tol * std::max(1.0, std::abs(a))) {
        throw std::runtime_error("poisson: series and kernel routes disagree");
    }
    return a;
}

// Truncated heat kernel sum_{n<=N} e^{-n(n+2 lambda)t} (n+lambda)/lambda C_n(s).
inline double heat_kernel(double lambda, double t, double s, int N)
{
    if (!(t > 0)) throw std::domain_error("heat: t > 0 is required");
    if (std::exp(-N * (N + 2 * lambda) * t) >= 1e-14) {
        throw std::invalid_argument("heat: truncation too small for t");
    }
    std::vector<double> terms(N + 1);
    gegenbauer_kernel_terms(N, lambda, clamp_unit(s), terms.data());
    double acc = 0;
    for (int n = N; n >= 0; --n) acc += std::exp(-n * (n + 2 * lambda) * t) * terms[n];
    return acc;
}

// Smallest N with e^{-N(N+2 lambda)t} < 1e-14.
inline int heat_truncation(double lambda, double t)
{
    int N = 1;
    while (std::exp(-N * (N + 2 * lambda) * t) >= 1e-14) ++N;
    return N;
}

// H_t f = sum e^{-n(n+2 lambda)t} proj_n f. The truncation N of the kernel must
// satisfy the 1e-14 tail condition; the series itself is finite.
inline DegreeDecomposition heat(const DegreeDecomposition& f, double t, int N)
{
    const double lam = f.space->lambda();
    if (!(t > 0)) throw std::domain_error("heat: t > 0 is required");
    if (std::exp(-N * (N + 2 * lam) * t) >= 1e-14 && N < f.max_degree()) {
        throw std::invalid_argument("heat: truncation too small for t");
    }
    return apply_degree_multiplier(f, [&](int n) { return n > N ? 0.0 : std::exp(-n * (n + 2 * lam) * t); });
}

inline double heat_convolve(const IntertwineContext& ctx, const HarmonicSpace& sp, const std::vector<double>& values,
                            double t, int N, const Vec3& x)
{
    const double lam = ctx.kappa.lambda_kappa;
    return convolve(ctx, sp, values, [&](double s) { return heat_kernel(lam, t, s, N); }, x);
}

// phi_t(s) = t/(2 sqrt(pi)) s^{-3/2} exp(-(t/(2 sqrt s) - lambda sqrt s)^2).
inline double subordinator(double lambda, double t, double s)
{
    if (!(t > 0) || !(s > 0)) throw std::domain_error("subordinator: t, s > 0 are required");
    double q = t / (2 * std::sqrt(s)) - lambda * std::sqrt(s);
    return t / (2 * std::sqrt(std::numbers::pi)) * std::pow(s, -1.5) * std::exp(-q * q);
}

namespace detail {

// Upper end S of the s-integral: mass of phi_t beyond S below tol. For
// lambda > 0, phi_t(s) <= t/(2 sqrt pi) s^{-3/2} e^{lambda t - lambda^2 s};
// for lambda = 0 the tail erf(t/(2 sqrt S)) is added in closed form instead.
inline double subordination_cutoff(double lambda, double t, double tol = 1e-12)
{
    double S = std::max(1.0, t * t);
    if (lambda == 0) {
        // Degrees n >= 1 carry e^{-s} at least; the tail mass is below t/sqrt(pi S).
        while (t / std::sqrt(std::numbers::pi * S) * std::exp(-S) > tol) S *= 1.5;
        return S;
    }
    auto bound = [&](double s) {
        return t / (2 * std::sqrt(std::numbers::pi)) * std::pow(s, -1.5) * std::exp(lambda * t - lambda * lambda * s) /
               (lambda * lambda);
    };
    while (bound(S) > tol) S *= 1.5;
    return S;
}

// int_0^S g(s) phi_t(s) ds by adaptive Gauss-Kronrod on dyadic pieces that
// follow the peak of phi_t near s = t/(2 lambda) (or t^2/6 at lambda = 0).
template <class G>
double subordinated_integral(double lambda, double t, double S, G&& g)
{
    auto f = [&](double s) { return s > 0 ? g(s) * subordinator(lambda, t, s) : 0.0; };
    std::vector<double> cuts{0.0};
    double peak = lambda > 0 ? std::min(t / (2 * lambda), t * t / 6) : t * t / 6;
    for (double q = peak / 64; q < S; q *= 2) cuts.push_back(q);
    cuts.push_back(S);
    double acc = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        acc += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, cuts[i], cuts[i + 1], 4, 1e-14);
    }
    return acc;
}

} // namespace detail

// int_0^inf e^{-n(n+2 lambda)s} phi_t(s) ds, which equals e^{-nt}.
inline double subordinated_exponential(double lambda, double t, int n)
{
    double S = detail::subordination_cutoff(lambda, t);
    double v = detail::subordinated_integral(lambda, t, S, [&](double s) { return std::exp(-n * (n + 2 * lambda) * s); });
    if (lambda == 0 && n == 0) v += std::erf(t / (2 * std::sqrt(S)));
    return v;
}

// int_0^inf phi_t(s) (H_s f)(x) ds at the point x.
inline double subordinated_heat(const DegreeDecomposition& f, double t, const Vec3& x)
{
    const auto& sp = *f.space;
    const double lam = sp.lambda();
    std::vector<double> comp(sp.max_degree + 1);
    for (int n = 0; n <= sp.max_degree; ++n) comp[n] = f.eval_component(n, x);
    double S = detail::subordination_cutoff(lam, t);
    double v = detail::subordinated_integral(lam, t, S, [&](double s) {
        double h = 0;
        for (int n = 0; n <= sp.max_degree; ++n) h += std::exp(-n * (n + 2 * lam) * s) * comp[n];
        return h;
    });
    if (lam == 0) v += comp[0] * std::erf(t / (2 * std::sqrt(S)));
    return v;
}

// T_theta f = sum C_n(cos theta)/C_n(1) proj_n f (Chebyshev T_n at lambda = 0).
inline DegreeDecomposition translate(const DegreeDecomposition& f, double theta)
{
    const double lam = f.space->lambda();
    const double c = std::cos(theta);
    return apply_degree_multiplier(f, [&](int n) { return gegenbauer_ratio<double>(n, lam, c); });
}

// Cesaro numbers A_k^delta / A_n^delta for k = 0..n, via A_k/A_{k-1} = (k+delta)/k.
inline std::vector<double> cesaro_ratios(int n, double delta)
{
    std::vector<double> A(n + 1);
    A[0] = 1;
    for (int k = 1; k <= n; ++k) A[k] = A[k - 1] * (k + delta) / k;
    std::vector<double> r(n + 1);
    for (int k = 0; k <= n; ++k) r[k] = A[n - k] / A[n];
    return r;
}

// S_n^delta f = sum_{k<=n} (A_{n-k}/A_n) proj_k f.
inline DegreeDecomposition cesaro_mean(const DegreeDecomposition& f, int n, double delta)
{
    if (!(delta > 0)) throw std::domain_error("cesaro: delta > 0 is required");
    auto r = cesaro_ratios(n, delta);
    return apply_degree_multiplier(f, [&](int k) { return k <= n ? r[k] : 0.0; });
}

// q_n^delta(s) = sum_k (A_{n-k}/A_n) (k+lambda)/lambda C_k(s).
inline double cesaro_kernel(double lambda, int n, double delta, double s)
{
    auto r = cesaro_ratios(n, delta);
    std::vector<double> terms(n + 1);
    gegenbauer_kernel_terms(n, lambda, clamp_unit(s), terms.data());
    double acc = 0;
    for (int k = n; k >= 0; --k) acc += r[k] * terms[k];
    return acc;
}

inline double cesaro_convolve(const IntertwineContext& ctx, const HarmonicSpace& sp, const std::vector<double>& values,
                              int n, double delta, const Vec3& x)
{
    const double lam = ctx.kappa.lambda_kappa;
    auto r = cesaro_ratios(n, delta);
    std::vector<double> terms(n + 1);
    return convolve(ctx, sp, values,
                    [&](double s) {
                        gegenbauer_kernel_terms(n, lam, s, terms.data());
                        double acc = 0;
                        for (int k = n; k >= 0; --k) acc += r[k] * terms[k];
                        return acc;
                    },
                    x);
}

// g(f)(x) = (int_0^1 (1-r) |sum_n n r^{n-1} proj_n f(x)|^2 dr)^{1/2}; the r
// integrand is a polynomial of degree 2N-1, integrated exactly.
inline std::vector<double> littlewood_paley_g(const DegreeDecomposition& f)
{
    const auto& sp = *f.space;
    const int N = sp.max_degree;
    std::vector<std::vector<double>> comp(N + 1);
    for (int n = 1; n <= N; ++n) comp[n] = f.component_values(n);
    JacobiRule r = gauss_jacobi_rule(std::max(1, N + 1), 1.0, 0.0);  // weight (1-t), t = 2r-1
    std::vector<double> out(sp.grid.size(), 0.0);
    for (std::size_t k = 0; k < sp.grid.size(); ++k) {
        double acc = 0;
        for (std::size_t q = 0; q < r.size(); ++q) {
            double rr = 0.5 * (1 + r.nodes[q]);
            double s = 0;
            for (int n = 1; n <= N; ++n) s += n * std::pow(rr, n - 1) * comp[n][k];
            acc += r.weights[q] * 0.25 * s * s;  // (1-r) dr = (1/4)(1-t) dt
        }
        out[k] = std::sqrt(acc);
    }
    return out;
}

// ---- multipliers ----

struct MultiplierSequence {
    std::vector<double> values;
    int k = 1;  // difference order
};

struct MultiplierCondition {
    double sup_abs = 0;
    double variation = 0;
    int blocks = 0;
    std::vector<double> block_values;  // 2^{j(k-1)} sum over block j
};

// Smallest integer >= lambda + 1.
inline int default_difference_order(double lambda) { return static_cast<int>(std::ceil(lambda + 1 - 1e-12)); }

namespace detail {

// Dyadic block statistics of Delta^k mu accumulated in Real.
template <class Real, class At>
MultiplierCondition multiplier_blocks(At&& at, long L, int k)
{
    using std::abs;
    if (k < 1) throw std::invalid_argument("multiplier_condition: k >= 1 required");
    if (L < 2 + k + 1) throw std::invalid_argument("multiplier_condition: sequence too short");
    MultiplierCondition c;
    for (long l = 0; l < L; ++l) c.sup_abs = std::max(c.sup_abs, static_cast<double>(abs(Real(at(l)))));
    auto diff = [&](long l) {
        // Delta^k mu_l = sum_i (-1)^{k-i} binom(k,i) mu_{l+i}
        Real s = 0, b = 1;
        for (int i = 0; i <= k; ++i) {
            s += ((k - i) % 2 ? -b : b) * Real(at(l + i));
            b = b * (k - i) / (i + 1);
        }
        return s;
    };
    for (int j = 0;; ++j) {
        long lo = 1L << j, hi = 1L << (j + 1);
        if (hi + k >= L) break;
        Real s = 0;
        for (long l = lo; l <= hi; ++l) s += abs(diff(l));
        double v = std::ldexp(static_cast<double>(s), j * (k - 1));
        c.block_values.push_back(v);
        c.variation = std::max(c.variation, v);
        ++c.blocks;
    }
    if (c.blocks == 0) throw std::invalid_argument("multiplier_condition: sequence too short");
    return c;
}

} // namespace detail

// sup |mu_j| and sup_j 2^{j(k-1)} sum_{l=2^j}^{2^{j+1}} |Delta^k mu_l| over
// the dyadic blocks covered by the sequence. In double precision the block
// values lose all digits once |Delta^k mu| nears 1e-16 |mu|.
inline MultiplierCondition multiplier_condition(const MultiplierSequence& mu, int k)
{
    return detail::multiplier_blocks<double>([&](long l) { return mu.values[l]; },
                                             static_cast<long>(mu.values.size()), k);
}

// Same statistics for mu_l = gen(l), l < length, with gen evaluated and
// differenced in 50-digit arithmetic.
template <class Gen>
MultiplierCondition multiplier_condition(Gen&& gen, long length, int k)
{
    using Real = boost::multiprecision::cpp_bin_float_50;
    return detail::multiplier_blocks<Real>([&](long l) { return Real(gen(Real(l))); }, length, k);
}

inline DegreeDecomposition apply_multiplier(const DegreeDecomposition& f, const MultiplierSequence& mu)
{
    if (static_cast<int>(mu.values.size()) <= f.max_degree()) {
        throw std::invalid_argument("apply_multiplier: sequence shorter than the expansion");
    }
    return apply_degree_multiplier(f, [&](int n) { return mu.values[n]; });
}

// ---- norms ----

// (sum w |v|^p)^{1/p} for grid weights summing to one.
inline double grid_norm(const std::vector<double>& w, const std::vector<double>& v, double p)
{
    double s = 0;
    for (std::size_t k = 0; k < v.size(); ++k) s += w[k] * std::pow(std::abs(v[k]), p);
    return std::pow(s, 1 / p);
}

// ---- ball and simplex ----

// proj_n(W^B; f)(x) = proj_n F(X) with F(x, x_{d+1}) = f(x), X = lift(x).
template <class F>
DegreeDecomposition project_ball_decomposition(std::shared_ptr<const HarmonicSpace> sp, F&& f, int f_degree = -1)
{
    const int d = sp->dim();
    return project(
        sp,
        [&](const Vec3& y) {
            Vec3 x{};
            for (int i = 0; i < d; ++i) x[i] = y[i];
            return f(x);
        },
        f_degree);
}

template <class F>
double project_ball(std::shared_ptr<const HarmonicSpace> sp, int n, F&& f, const Vec3& x, int f_degree = -1)
{
    auto dec = project_ball_decomposition(sp, std::forward<F>(f), f_degree);
    return dec.eval_component(n, lift_to_sphere(sp->dim(), x));
}

// proj_n(W^T; f)(u) = 2^{-d} sum_eps proj_{2n}(W^B; f o sq, sqrt(u) eps).
template <class F>
double project_simplex(std::shared_ptr<const HarmonicSpace> sp, int n, F&& f, const Vec3& u, int f_degree = -1)
{
    const int d = sp->dim();
    if (2 * n > sp->max_degree) throw std::invalid_argument("project_simplex: space degree below 2n");
    auto dec = project_ball_decomposition(
        sp, [&](const Vec3& x) { return f(ball_to_simplex(d, x)); }, f_degree < 0 ? -1 : 2 * f_degree);
    Vec3 r = simplex_to_ball(d, u);
    double acc = 0;
    for (int e = 0; e < (1 << d); ++e) {
        Vec3 x = r;
        for (int i = 0; i < d; ++i) {
            if ((e >> i) & 1) x[i] = -x[i];
        }
        acc += dec.eval_component(2 * n, lift_to_sphere(d, x));
    }
    return acc / (1 << d);
}

} // namespace dunkl

#endif
