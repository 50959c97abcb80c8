#ifndef DUNKL_WEIGHTS_HPP
#define DUNKL_WEIGHTS_HPP

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "detail/capint.hpp"
#include "geometry.hpp"
#include "specfun.hpp"

namespace dunkl {

enum class Domain { sphere, ball, simplex };

inline const char* domain_name(Domain d)
{
    switch (d) {
    case Domain::sphere:
        return "sphere";
    case Domain::ball:
        return "ball";
    default:
        return "simplex";
    }
}

// Product weight on one of the three domains; tau has d+1 entries.
//   sphere:  prod |y_j|^{2 tau_j}
//   ball:    prod_{j<=d} |x_j|^{2 tau_j} (1 - |x|^2)^{tau_{d+1} - 1/2}
//   simplex: prod_{j<=d} u_j^{tau_j - 1/2} (1 - |u|)^{tau_{d+1} - 1/2}
struct WeightSpec {
    Domain domain = Domain::sphere;
    std::vector<double> tau;

    int dim() const { return static_cast<int>(tau.size()) - 1; }
};

inline WeightSpec make_weight_spec(Domain domain, std::vector<double> tau)
{
    if (tau.size() < 2 || tau.size() > 3) {
        throw std::invalid_argument("weight exponents: d+1 entries with d in {1,2} required");
    }
    for (double t : tau) {
        if (!(t > -0.5) || !std::isfinite(t)) {
            throw std::domain_error("weight exponents must be finite and > -1/2");
        }
    }
    return {domain, std::move(tau)};
}

namespace detail {

// b^e for b >= 0 with +inf at b = 0 when e < 0.
inline double weight_power(double b, double e)
{
    if (e == 0) return 1;
    if (b == 0) return e > 0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::pow(b, e);
}

} // namespace detail

// Density of the canonical measure at x. Returns +inf on a zero set carrying a
// negative exponent; weight_is_singular reports that case.
inline double weight_eval(const WeightSpec& spec, const Vec3& x)
{
    const int d = spec.dim();
    double w = 1;
    switch (spec.domain) {
    case Domain::sphere:
        for (int j = 0; j <= d; ++j) w *= detail::weight_power(std::abs(x[j]), 2 * spec.tau[j]);
        return w;
    case Domain::ball: {
        check_ball(d, x);
        for (int j = 0; j < d; ++j) w *= detail::weight_power(std::abs(x[j]), 2 * spec.tau[j]);
        return w * detail::weight_power(std::max(0.0, 1 - ball_norm2(d, x)), spec.tau[d] - 0.5);
    }
    default: {
        check_simplex(d, x);
        double s = 0;
        for (int j = 0; j < d; ++j) {
            w *= detail::weight_power(x[j], spec.tau[j] - 0.5);
            s += x[j];
        }
        return w * detail::weight_power(std::max(0.0, 1 - s), spec.tau[d] - 0.5);
    }
    }
}

inline bool weight_is_singular(const WeightSpec& spec, const Vec3& x) { return std::isinf(weight_eval(spec, x)); }

// a_kappa = 1 / int_{S^d} h_kappa^2 dw, from the symmetric weighted grid; the
// grid integrates h_kappa^2 exactly, and a refinement is compared to 1e-10.
inline double a_kappa(const MultiplicityVector& kappa)
{
    const int d = kappa.dim();
    double a = weighted_sphere_grid(d, kappa.kappa, 4).total();
    double b = weighted_sphere_grid(d, kappa.kappa, 8).total();
    if (std::abs(a - b) > 1e-10 * b) {
        throw std::runtime_error("a_kappa: grid refinement disagrees");
    }
    return 1 / b;
}

// Cap rule used for weighted cap measures.
inline CapRule measure_rule(int m = 16)
{
    CapRule r;
    r.m = m;
    return r;
}

// Weighted measure of {y : dist(center, y) <= theta} in the metric of the
// domain. Ball caps are half sphere caps around the lifted center; simplex
// caps are 2^d times the positive-orthant part of the sphere cap around the
// lift of sqrt(u).
inline double cap_measure(const WeightSpec& spec, const Vec3& center, double theta, int m = 16)
{
    if (!(theta > 0 && theta <= std::numbers::pi)) {
        throw std::domain_error("cap_measure: theta in (0, pi] is required");
    }
    const int d = spec.dim();
    CapRule rule = measure_rule(m);
    auto one = [](const Vec3&) { return 1.0; };
    switch (spec.domain) {
    case Domain::sphere:
        return integrate_cap(d, spec.tau, center, theta, one, {}, rule);
    case Domain::ball:
        check_ball(d, center);
        rule.sign[d] = 1;
        return integrate_cap(d, spec.tau, lift_to_sphere(d, center), theta, one, {}, rule);
    default: {
        Vec3 X = lift_to_sphere(d, simplex_to_ball(d, center));
        for (int i = 0; i <= d; ++i) rule.sign[i] = 1;
        return std::pow(2.0, d) * integrate_cap(d, spec.tau, X, theta, one, {}, rule);
    }
    }
}

// Exponent convention of the cap-measure comparand: density_power compares
// int prod |y_j|^{tau_j} with theta^d prod (|x_j| + theta)^{tau_j}, as the
// lemma is printed; measure compares the canonical density prod |y_j|^{2 tau_j}
// with theta^d prod (|x_j| + theta)^{2 tau_j}.
enum class Convention { density_power, measure };

// theta^d prod_{j<=d+1} (|x_j| + theta)^{e tau_j}, e = 1 or 2. On the ball and
// simplex x is first mapped to the sphere point of which it is the lift
// (simplex: through sqrt(u)), and the exponent is always 2 tau_j.
inline double lemma3_comparand(const WeightSpec& spec, const Vec3& center, double theta,
                               Convention conv = Convention::measure)
{
    const int d = spec.dim();
    Vec3 X;
    double e = 2;
    switch (spec.domain) {
    case Domain::sphere:
        X = center;
        e = conv == Convention::measure ? 2.0 : 1.0;
        break;
    case Domain::ball:
        X = lift_to_sphere(d, center);
        break;
    default:
        X = lift_to_sphere(d, simplex_to_ball(d, center));
        break;
    }
    double p = std::pow(theta, d);
    for (int j = 0; j <= d; ++j) p *= std::pow(std::abs(X[j]) + theta, e * spec.tau[j]);
    return p;
}

// Measure of the cap for the printed density prod |y_j|^{tau_j}, tau_j > -1.
inline double cap_measure_density_power(int d, const std::vector<double>& tau, const Vec3& center, double theta,
                                        int m = 16)
{
    std::vector<double> half(tau.size());
    for (std::size_t i = 0; i < tau.size(); ++i) {
        if (!(tau[i] > -1)) throw std::domain_error("density exponents must exceed -1");
        half[i] = 0.5 * tau[i];
    }
    CapRule rule = measure_rule(m);
    return integrate_cap(d, half, center, theta, [](const Vec3&) { return 1.0; }, {}, rule);
}

// Both sides of int_{S^d} G dw = int_{B^d} [G(x, r) + G(x, -r)] (1-|x|^2)^{-1/2} dx,
// r = sqrt(1 - |x|^2), with n-point rules per direction.
template <class G>
std::pair<double, double> sphere_ball_sides(int d, G&& g, int n)
{
    QuadratureGrid s = sphere_grid(d, 2 * n - 1);
    double lhs = 0;
    for (std::size_t k = 0; k < s.size(); ++k) lhs += s.weights[k] * g(s.points[k]);
    QuadratureGrid b = ball_grid(d, -0.5, n);
    double rhs = 0;
    for (std::size_t k = 0; k < b.size(); ++k) {
        Vec3 up = lift_to_sphere(d, b.points[k]);
        Vec3 dn = up;
        dn[d] = -dn[d];
        rhs += b.weights[k] * (g(up) + g(dn));
    }
    return {lhs, rhs};
}

// Both sides of int_{B^d} g(x_1^2, ..., x_d^2) dx = int_{T^d} g(u) prod u_i^{-1/2} du.
template <class G>
std::pair<double, double> ball_simplex_sides(int d, G&& g, int n)
{
    QuadratureGrid b = ball_grid(d, 0.0, n);
    double lhs = 0;
    for (std::size_t k = 0; k < b.size(); ++k) {
        Vec3 u{};
        for (int i = 0; i < d; ++i) u[i] = b.points[k][i] * b.points[k][i];
        lhs += b.weights[k] * g(u);
    }
    std::vector<double> a(d + 1, -0.5);
    a[d] = 0;
    QuadratureGrid t = dirichlet_rule(d, a, n);
    double rhs = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        Vec3 u = t.points[k];
        u[d] = 0;
        rhs += t.weights[k] * g(u);
    }
    return {lhs, rhs};
}

} // namespace dunkl

#endif
