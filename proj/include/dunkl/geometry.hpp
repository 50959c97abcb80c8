#ifndef DUNKL_GEOMETRY_HPP
#define DUNKL_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "specfun.hpp"

namespace dunkl {

// Points of R^{d+1} for d <= 2; unused trailing entries are zero.
using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 hadamard(const Vec3& a, const Vec3& b) { return {a[0] * b[0], a[1] * b[1], a[2] * b[2]}; }
inline Vec3 abs_coords(const Vec3& a) { return {std::abs(a[0]), std::abs(a[1]), std::abs(a[2])}; }

inline double clamp_unit(double t) { return t > 1 ? 1.0 : (t < -1 ? -1.0 : t); }

inline void check_dim(int d)
{
    if (d != 1 && d != 2) {
        throw std::invalid_argument("only d = 1 and d = 2 are supported");
    }
}

struct SpherePoint {
    Vec3 coords{};
    int d = 1;
};

inline SpherePoint make_sphere_point(int d, const Vec3& c)
{
    check_dim(d);
    if (d == 1 && c[2] != 0) {
        throw std::domain_error("point on S^1 must have zero third coordinate");
    }
    if (std::abs(norm(c) - 1) > 1e-12) {
        throw std::domain_error("sphere point must have unit norm");
    }
    return {c, d};
}

inline Vec3 normalized(const Vec3& c)
{
    double r = norm(c);
    return {c[0] / r, c[1] / r, c[2] / r};
}

struct SphericalCap {
    SpherePoint center;
    double angle = 0;
};

inline SphericalCap make_cap(const SpherePoint& x, double angle)
{
    if (!(angle >= 0 && angle <= std::numbers::pi)) {
        throw std::domain_error("cap angle must lie in [0, pi]");
    }
    return {x, angle};
}

// Boundary points count as inside.
inline bool in_cap(const SphericalCap& c, const Vec3& y)
{
    return dot(c.center.coords, y) >= std::cos(c.angle);
}

inline double geodesic(const Vec3& x, const Vec3& y) { return std::acos(clamp_unit(dot(x, y))); }

inline double ball_norm2(int d, const Vec3& x)
{
    double s = 0;
    for (int i = 0; i < d; ++i) s += x[i] * x[i];
    return s;
}

inline void check_ball(int d, const Vec3& x)
{
    check_dim(d);
    if (ball_norm2(d, x) > 1 + 1e-12) {
        throw std::domain_error("point lies outside the closed ball");
    }
}

inline void check_simplex(int d, const Vec3& x)
{
    check_dim(d);
    double s = 0;
    for (int i = 0; i < d; ++i) {
        if (x[i] < -1e-14) throw std::domain_error("simplex coordinates must be nonnegative");
        s += x[i];
    }
    if (s > 1 + 1e-12) throw std::domain_error("simplex coordinates must sum to at most 1");
}

// (x, sqrt(1 - |x|^2)).
inline Vec3 lift_to_sphere(int d, const Vec3& x)
{
    Vec3 X{};
    for (int i = 0; i < d; ++i) X[i] = x[i];
    X[d] = std::sqrt(std::max(0.0, 1 - ball_norm2(d, x)));
    return X;
}

inline double ball_distance(int d, const Vec3& x, const Vec3& y)
{
    check_ball(d, x);
    check_ball(d, y);
    double s = 0;
    for (int i = 0; i < d; ++i) s += x[i] * y[i];
    s += std::sqrt(std::max(0.0, 1 - ball_norm2(d, x))) * std::sqrt(std::max(0.0, 1 - ball_norm2(d, y)));
    return std::acos(clamp_unit(s));
}

// Coordinate-wise square root, T^d -> first orthant of B^d.
inline Vec3 simplex_to_ball(int d, const Vec3& u)
{
    check_simplex(d, u);
    Vec3 x{};
    for (int i = 0; i < d; ++i) x[i] = std::sqrt(std::max(0.0, u[i]));
    return x;
}

// Coordinate-wise square, B^d -> T^d.
inline Vec3 ball_to_simplex(int d, const Vec3& x)
{
    check_ball(d, x);
    Vec3 u{};
    for (int i = 0; i < d; ++i) u[i] = x[i] * x[i];
    return u;
}

inline double simplex_distance(int d, const Vec3& u, const Vec3& v)
{
    check_simplex(d, u);
    check_simplex(d, v);
    double s = 0, su = 0, sv = 0;
    for (int i = 0; i < d; ++i) {
        s += std::sqrt(std::max(0.0, u[i] * v[i]));
        su += u[i];
        sv += v[i];
    }
    s += std::sqrt(std::max(0.0, 1 - su)) * std::sqrt(std::max(0.0, 1 - sv));
    return std::acos(clamp_unit(s));
}

struct QuadratureGrid {
    int d = 1;
    std::vector<Vec3> points;
    std::vector<double> weights;
    int exact_degree = 0;

    std::size_t size() const { return points.size(); }
    double total() const
    {
        double s = 0;
        for (double w : weights) s += w;
        return s;
    }
};

// Unweighted tensor grid on S^d: trapezoid in the periodic angle, Gauss-Legendre
// in z = cos(polar angle), i.e. the sin factor absorbed into the rule.
inline QuadratureGrid sphere_grid(int d, int exact_degree)
{
    check_dim(d);
    if (exact_degree < 1) {
        throw std::invalid_argument("sphere_grid: exact_degree >= 1 is required");
    }
    QuadratureGrid g;
    g.d = d;
    g.exact_degree = exact_degree;
    const int m = exact_degree + 1;
    const double two_pi = 2 * std::numbers::pi;
    if (d == 1) {
        for (int k = 0; k < m; ++k) {
            double phi = two_pi * k / m;
            g.points.push_back({std::cos(phi), std::sin(phi), 0.0});
            g.weights.push_back(two_pi / m);
        }
        return g;
    }
    JacobiRule z = gauss_legendre_rule((exact_degree + 2) / 2);
    for (std::size_t j = 0; j < z.size(); ++j) {
        double zz = z.nodes[j];
        double rho = std::sqrt(1 - zz * zz);
        for (int k = 0; k < m; ++k) {
            double phi = two_pi * k / m;
            g.points.push_back({rho * std::cos(phi), rho * std::sin(phi), zz});
            g.weights.push_back(z.weights[j] * two_pi / m);
        }
    }
    return g;
}

// Rule for the Dirichlet weight prod_{i<=d+1} u_i^{a_i} on T^d, u_{d+1} = 1 - |u|.
// Points carry all d+1 barycentric coordinates.
inline QuadratureGrid dirichlet_rule(int d, const std::vector<double>& a, int n)
{
    check_dim(d);
    if (static_cast<int>(a.size()) != d + 1) {
        throw std::invalid_argument("dirichlet_rule: d+1 exponents required");
    }
    QuadratureGrid g;
    g.d = d;
    g.exact_degree = 2 * n - 1;
    if (d == 1) {
        JacobiRule r = gauss_jacobi_rule(n, a[1], a[0]);
        double f = std::pow(0.5, a[0] + a[1] + 1);
        for (std::size_t k = 0; k < r.size(); ++k) {
            double t = r.nodes[k];
            g.points.push_back({0.5 * (1 + t), 0.5 * (1 - t), 0.0});
            g.weights.push_back(f * r.weights[k]);
        }
        return g;
    }
    JacobiRule rs = gauss_jacobi_rule(n, a[1] + a[2] + 1, a[0]);
    JacobiRule rr = gauss_jacobi_rule(n, a[2], a[1]);
    double fs = std::pow(0.5, a[0] + a[1] + a[2] + 2);
    double fr = std::pow(0.5, a[1] + a[2] + 1);
    for (std::size_t i = 0; i < rs.size(); ++i) {
        double s = 0.5 * (1 + rs.nodes[i]);
        double oms = 0.5 * (1 - rs.nodes[i]);
        for (std::size_t j = 0; j < rr.size(); ++j) {
            double r = 0.5 * (1 + rr.nodes[j]);
            double omr = 0.5 * (1 - rr.nodes[j]);
            g.points.push_back({s, oms * r, oms * omr});
            g.weights.push_back(fs * rs.weights[i] * fr * rr.weights[j]);
        }
    }
    return g;
}

// Nodes per coordinate so that a sphere polynomial of degree D times the
// product weight is integrated exactly by the symmetric grid.
inline int symmetric_nodes_for_degree(int D) { return std::max(1, (D / 2 + 2) / 2); }

// Z_2^{d+1}-symmetric grid whose weights include h_tau^2 = prod |y_i|^{2 tau_i}.
// Built from sign copies of the Dirichlet rule in u = y^2, using
// dw = 2^{-d} prod u_i^{-1/2} du on each orthant.
inline QuadratureGrid weighted_sphere_grid(int d, const std::vector<double>& tau, int n)
{
    check_dim(d);
    if (static_cast<int>(tau.size()) != d + 1) {
        throw std::invalid_argument("weighted_sphere_grid: d+1 exponents required");
    }
    std::vector<double> a(tau.size());
    for (std::size_t i = 0; i < tau.size(); ++i) {
        if (!(tau[i] > -0.5)) throw std::domain_error("weight exponents must exceed -1/2");
        a[i] = tau[i] - 0.5;
    }
    QuadratureGrid u = dirichlet_rule(d, a, n);
    QuadratureGrid g;
    g.d = d;
    g.exact_degree = 4 * n - 1;
    const double f = std::pow(0.5, d);
    const int copies = 1 << (d + 1);
    for (int e = 0; e < copies; ++e) {
        for (std::size_t k = 0; k < u.size(); ++k) {
            Vec3 y{};
            for (int i = 0; i <= d; ++i) {
                double s = (e >> i) & 1 ? -1.0 : 1.0;
                y[i] = s * std::sqrt(u.points[k][i]);
            }
            g.points.push_back(y);
            g.weights.push_back(f * u.weights[k]);
        }
    }
    return g;
}

inline QuadratureGrid weighted_sphere_grid_for_degree(int d, const std::vector<double>& tau, int degree)
{
    return weighted_sphere_grid(d, tau, symmetric_nodes_for_degree(degree));
}

// Grid on B^d carrying W^B_kappa: upper-hemisphere half of the symmetric grid.
inline QuadratureGrid weighted_ball_grid(int d, const std::vector<double>& kappa, int n)
{
    QuadratureGrid s = weighted_sphere_grid(d, kappa, n);
    QuadratureGrid g;
    g.d = d;
    g.exact_degree = s.exact_degree;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (s.points[k][d] > 0) {
            Vec3 x{};
            for (int i = 0; i < d; ++i) x[i] = s.points[k][i];
            g.points.push_back(x);
            g.weights.push_back(s.weights[k]);
        }
    }
    return g;
}

// Grid on T^d carrying W^T_kappa = prod u_i^{kappa_i - 1/2} (1-|u|)^{kappa_{d+1} - 1/2}.
inline QuadratureGrid weighted_simplex_grid(int d, const std::vector<double>& kappa, int n)
{
    std::vector<double> a(kappa.size());
    for (std::size_t i = 0; i < kappa.size(); ++i) a[i] = kappa[i] - 0.5;
    QuadratureGrid g = dirichlet_rule(d, a, n);
    for (auto& p : g.points) p[d] = 0;
    return g;
}

// Grid on B^d for the weight (1 - |x|^2)^mu.
inline QuadratureGrid ball_grid(int d, double mu, int n)
{
    check_dim(d);
    QuadratureGrid g;
    g.d = d;
    g.exact_degree = 2 * n - 1;
    if (d == 1) {
        JacobiRule r = gauss_jacobi_rule(n, mu, mu);
        for (std::size_t k = 0; k < r.size(); ++k) {
            g.points.push_back({r.nodes[k], 0.0, 0.0});
            g.weights.push_back(r.weights[k]);
        }
        return g;
    }
    // x = rho (cos phi, sin phi), v = rho^2: dx = (1/2) dv dphi.
    JacobiRule r = gauss_jacobi_rule(n, mu, 0.0);
    const int m = 2 * n + 1;
    const double two_pi = 2 * std::numbers::pi;
    for (std::size_t k = 0; k < r.size(); ++k) {
        double v = 0.5 * (1 + r.nodes[k]);
        double rho = std::sqrt(v);
        double w = 0.5 * std::pow(0.5, mu + 1) * r.weights[k] * two_pi / m;
        for (int j = 0; j < m; ++j) {
            double phi = two_pi * (j + 0.5) / m;
            g.points.push_back({rho * std::cos(phi), rho * std::sin(phi), 0.0});
            g.weights.push_back(w);
        }
    }
    return g;
}

} // namespace dunkl

#endif
