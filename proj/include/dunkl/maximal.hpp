#ifndef DUNKL_MAXIMAL_HPP
#define DUNKL_MAXIMAL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "detail/capint.hpp"
#include "expansion.hpp"
#include "geometry.hpp"
#include "intertwine.hpp"
#include "weights.hpp"

namespace dunkl {

// Part of the sphere on which an integrand may be nonzero: a cap intersected
// with coordinate sign constraints (0 = any sign).
struct SupportPiece {
    Vec3 center{};
    double angle = std::numbers::pi;
    std::array<int, 3> sign{0, 0, 0};
};

// Nonnegative function on S^d for the maximal operators. An empty support
// means the whole sphere; breaks list circles where value is not smooth.
struct SphereIntegrand {
    std::function<double(const Vec3&)> value;
    std::vector<SupportPiece> support;
    std::vector<BreakCircle> breaks;
};

inline SphereIntegrand constant_integrand(double c)
{
    return {[c](const Vec3&) { return std::abs(c); }, {}, {}};
}

// |f| for an expansion on the sphere.
inline SphereIntegrand abs_integrand(const DegreeDecomposition& f)
{
    auto dec = std::make_shared<DegreeDecomposition>(f);
    return {[dec](const Vec3& y) { return std::abs(dec->eval(y)); }, {}, {}};
}

// Lift of a function on B^d to the even function F(x, x_{d+1}) = f(x).
inline SphereIntegrand lift_ball_function(int d, std::function<double(const Vec3&)> f)
{
    return {[d, f](const Vec3& z) {
                Vec3 x{};
                for (int i = 0; i < d; ++i) x[i] = z[i];
                return std::abs(f(x));
            },
            {},
            {}};
}

// Lift of a function on T^d to F(z) = f(z_1^2, ..., z_d^2).
inline SphereIntegrand lift_simplex_function(int d, std::function<double(const Vec3&)> f)
{
    return {[d, f](const Vec3& z) {
                Vec3 u{};
                for (int i = 0; i < d; ++i) u[i] = z[i] * z[i];
                return std::abs(f(u));
            },
            {},
            {}};
}

// Sphere point representing a point of the domain.
inline Vec3 domain_lift(Domain dom, int d, const Vec3& x)
{
    switch (dom) {
    case Domain::sphere:
        return x;
    case Domain::ball:
        return lift_to_sphere(d, x);
    default:
        return lift_to_sphere(d, simplex_to_ball(d, x));
    }
}

// Sign constraints of the lifted region of a domain: the upper hemisphere for
// the ball, the positive orthant for the simplex.
inline std::array<int, 3> domain_signs(Domain dom, int d)
{
    std::array<int, 3> s{0, 0, 0};
    if (dom == Domain::ball) s[d] = 1;
    if (dom == Domain::simplex) {
        for (int i = 0; i <= d; ++i) s[i] = 1;
    }
    return s;
}

// Indicator of the metric ball of radius eps around x0 in the domain, divided by
// norm, as a lifted integrand with explicit support pieces.
inline SphereIntegrand spike_integrand(Domain dom, int d, const Vec3& x0, double eps, double norm)
{
    SphereIntegrand F;
    const double c = std::cos(eps);
    Vec3 X0 = domain_lift(dom, d, x0);
    auto sign_of = [&](int e, int i) { return (e >> i) & 1 ? -1 : 1; };
    switch (dom) {
    case Domain::sphere:
        F.support.push_back({X0, eps, {0, 0, 0}});
        F.value = [X0, c, norm](const Vec3& y) { return dot(X0, y) >= c ? 1 / norm : 0.0; };
        F.breaks.push_back({X0, c, 0, -1, 0});
        break;
    case Domain::ball: {
        // F(z) = f(z') depends on |z_{d+1}|: mirror caps on each hemisphere.
        for (int s = 0; s < 2; ++s) {
            SupportPiece p;
            p.center = X0;
            p.center[d] = s ? -X0[d] : X0[d];
            p.angle = eps;
            p.sign[d] = s ? -1 : 1;
            F.support.push_back(p);
            F.breaks.push_back({p.center, c, 0, -1, 0});
        }
        F.value = [X0, c, norm, d](const Vec3& z) {
            Vec3 w = z;
            w[d] = std::abs(w[d]);
            return dot(X0, w) >= c ? 1 / norm : 0.0;
        };
        break;
    }
    default: {
        for (int e = 0; e < (1 << (d + 1)); ++e) {
            SupportPiece p;
            p.angle = eps;
            for (int i = 0; i <= d; ++i) {
                p.center[i] = sign_of(e, i) * X0[i];
                p.sign[i] = sign_of(e, i);
            }
            F.support.push_back(p);
            F.breaks.push_back({p.center, c, 0, -1, 0});
        }
        F.value = [X0, c, norm](const Vec3& z) { return dot(X0, abs_coords(z)) >= c ? 1 / norm : 0.0; };
        break;
    }
    }
    return F;
}

// Log-spaced angles from theta_min to pi.
inline std::vector<double> theta_grid(double theta_min, int count)
{
    if (count < 1 || !(theta_min > 0 && theta_min <= std::numbers::pi)) {
        throw std::invalid_argument("theta grid: count >= 1 and theta_min in (0, pi] required");
    }
    std::vector<double> t(count);
    if (count == 1) {
        t[0] = std::numbers::pi;
        return t;
    }
    const double r = std::log(std::numbers::pi / theta_min);
    for (int i = 0; i < count; ++i) t[i] = theta_min * std::exp(r * i / (count - 1));
    t[count - 1] = std::numbers::pi;
    return t;
}

struct MaximalOptions {
    std::vector<double> thetas = theta_grid(std::numbers::pi / 64, 24);
    int rule_m = 8;
    double ts_h = 0.25;
    // dunkl_maximal compares quadrature and closed-form denominators when the
    // integrand has no support restriction.
    bool check_denominator = true;
    double denominator_tol = 1e-5;
};

namespace detail {

inline CapRule maximal_rule(const MaximalOptions& o, const std::array<int, 3>& sign)
{
    CapRule r;
    r.m = o.rule_m;
    r.ts_h = o.ts_h;
    r.sign = sign;
    return r;
}

// Merge two sign constraints; returns false if they are incompatible.
inline bool merge_signs(const std::array<int, 3>& a, const std::array<int, 3>& b, std::array<int, 3>& out)
{
    for (int i = 0; i < 3; ++i) {
        if (a[i] != 0 && b[i] != 0 && a[i] != b[i]) return false;
        out[i] = a[i] != 0 ? a[i] : b[i];
    }
    return true;
}

inline bool signs_allow(const std::array<int, 3>& s, const Vec3& y)
{
    for (int i = 0; i < 3; ++i) {
        if (s[i] > 0 && y[i] < 0) return false;
        if (s[i] < 0 && y[i] > 0) return false;
    }
    return true;
}

// Circles along which V[chi_{B(x,theta)}] is not smooth: <x e, y> = cos theta.
inline std::vector<BreakCircle> intertwine_circles(const IntertwineContext& ctx, const Vec3& x, double theta)
{
    const int n = ctx.dim() + 1;
    std::vector<BreakCircle> out;
    for (int e = 0; e < (1 << n); ++e) {
        BreakCircle b;
        for (int i = 0; i < n; ++i) b.w[i] = (e >> i) & 1 ? -x[i] : x[i];
        b.c = std::cos(theta);
        b.order = ctx.kappa.gamma_kappa;
        out.push_back(b);
    }
    return out;
}

inline bool pieces_apart(const Vec3& a, double ra, const Vec3& b, double rb)
{
    return geodesic(normalized(a), normalized(b)) > ra + rb + 1e-12;
}

} // namespace detail

// Weighted average of F over the region {y : <X,y> >= cos theta} intersected
// with the sign constraints, for the weight h_tau^2 on the sphere. Returns the
// numerator and the measure.
struct CapAverage {
    double numerator = 0;
    double measure = 0;
};

inline CapAverage hl_cap_average(int d, const std::vector<double>& tau, const Vec3& X, double theta,
                                 const std::array<int, 3>& sign, const SphereIntegrand& F, const MaximalOptions& o)
{
    CapAverage r;
    const double c = std::cos(theta);
    // Measure of the region.
    r.measure = integrate_cap(d, tau, X, theta, [](const Vec3&) { return 1.0; }, {}, detail::maximal_rule(o, sign));
    if (F.support.empty()) {
        std::vector<BreakCircle> br = F.breaks;
        r.numerator = integrate_cap(d, tau, X, theta, F.value, br, detail::maximal_rule(o, sign));
        return r;
    }
    for (const SupportPiece& p : F.support) {
        std::array<int, 3> s;
        if (!detail::merge_signs(sign, p.sign, s)) continue;
        if (detail::pieces_apart(X, theta, p.center, p.angle)) continue;
        std::vector<BreakCircle> br = F.breaks;
        br.push_back({X, c, 0, -1, 0});
        r.numerator += integrate_cap(
            d, tau, p.center, p.angle, [&](const Vec3& y) { return dot(X, y) >= c ? F.value(y) : 0.0; }, br,
            detail::maximal_rule(o, s));
    }
    return r;
}

// Weighted Hardy-Littlewood maximal function of the lifted integrand F at a
// point of the domain of spec, as the max over the theta grid.
inline double hl_maximal(const WeightSpec& spec, const SphereIntegrand& F, const Vec3& x, const MaximalOptions& o = {})
{
    const int d = spec.dim();
    Vec3 X = domain_lift(spec.domain, d, x);
    auto sign = domain_signs(spec.domain, d);
    double best = 0;
    for (double th : o.thetas) {
        CapAverage a = hl_cap_average(d, spec.tau, X, th, sign, F, o);
        if (a.measure > 0) best = std::max(best, a.numerator / a.measure);
    }
    return best;
}

// Closed form of int V[chi_{B(x,theta)}] h_kappa^2 dw: c_lambda int_0^theta
// (sin phi)^{2 lambda} d phi / a_kappa.
inline double dunkl_denominator_closed(const MultiplicityVector& kappa, double theta, double a_kap)
{
    const double lam = kappa.lambda_kappa;
    double acc = 0;
    detail::graded_segment(0, theta, 2 * lam, 0, detail::kInf, std::numbers::pi - theta, 24,
                           [&](double p, double, double, double w) {
                               acc += w * (p > 0 ? std::pow(std::sin(p) / p, 2 * lam) : 1.0);
                           });
    return c_lambda(lam, true) * acc / a_kap;
}

struct DunklAverage {
    double numerator = 0;
    double denominator_quadrature = 0;  // 0 when not computed
    double denominator_closed = 0;
};

// Numerator int F V[chi_{B(x,theta)}] h_kappa^2 dw, restricted to the sign
// constraints, and the denominators.
inline DunklAverage dunkl_cap_average(const IntertwineContext& ctx, double a_kap, const Vec3& x, double theta,
                                      const std::array<int, 3>& sign, const SphereIntegrand& F,
                                      const MaximalOptions& o)
{
    const int d = ctx.dim();
    DunklAverage r;
    r.denominator_closed = dunkl_denominator_closed(ctx.kappa, theta, a_kap);
    const Vec3 xb = abs_coords(x);
    auto circles = detail::intertwine_circles(ctx, x, theta);
    auto Vat = [&](const Vec3& y) { return intertwine_cap(ctx, x, theta, y); };
    if (F.support.empty()) {
        // Support of V: orthant by orthant, the cap around |x| e intersected with the orthant.
        for (int e = 0; e < (1 << (d + 1)); ++e) {
            std::array<int, 3> os{0, 0, 0};
            Vec3 c{};
            for (int i = 0; i <= d; ++i) {
                os[i] = (e >> i) & 1 ? -1 : 1;
                c[i] = os[i] * xb[i];
            }
            std::array<int, 3> s;
            if (!detail::merge_signs(sign, os, s)) continue;
            std::vector<BreakCircle> br = circles;
            for (const auto& b : F.breaks) br.push_back(b);
            double num = 0, den = 0;
            cap_nodes(d, ctx.kappa.kappa, c, theta, br, detail::maximal_rule(o, s), [&](const Vec3& y, double w) {
                double v = Vat(y);
                num += w * v * F.value(y);
                den += w * v;
            });
            r.numerator += num;
            r.denominator_quadrature += den;
        }
        return r;
    }
    for (const SupportPiece& p : F.support) {
        std::array<int, 3> s;
        if (!detail::merge_signs(sign, p.sign, s)) continue;
        // V vanishes unless <|x|, |y|> >= cos theta, and |y| stays within p.angle of |center|.
        if (geodesic(xb, abs_coords(p.center)) > theta + p.angle + 1e-12) continue;
        std::vector<BreakCircle> br = circles;
        for (const auto& b : F.breaks) br.push_back(b);
        r.numerator += integrate_cap(
            d, ctx.kappa.kappa, p.center, p.angle, [&](const Vec3& y) { return F.value(y) * Vat(y); }, br,
            detail::maximal_rule(o, s));
    }
    return r;
}

// Intertwining maximal function sup_theta of the V-weighted averages; the
// denominator is the closed form. Throws when the quadrature denominator,
// available for unrestricted integrands, disagrees by more than the tolerance.
inline double dunkl_maximal_lifted(const IntertwineContext& ctx, double a_kap, const SphereIntegrand& F, const Vec3& X,
                                   const std::array<int, 3>& sign, const MaximalOptions& o)
{
    double best = 0;
    for (double th : o.thetas) {
        DunklAverage a = dunkl_cap_average(ctx, a_kap, X, th, sign, F, o);
        if (o.check_denominator && F.support.empty() && sign == std::array<int, 3>{0, 0, 0}) {
            double rel = std::abs(a.denominator_quadrature / a.denominator_closed - 1);
            if (rel > o.denominator_tol) {
                throw std::runtime_error("dunkl_maximal: denominator quadrature disagrees with the closed form");
            }
        }
        best = std::max(best, a.numerator / a.denominator_closed);
    }
    return best;
}

inline double dunkl_maximal(const IntertwineContext& ctx, const SphereIntegrand& F, const Vec3& x,
                            const MaximalOptions& o = {})
{
    return dunkl_maximal_lifted(ctx, a_kappa(ctx.kappa), F, x, {0, 0, 0}, o);
}

// M^B f(x) = M F(X) for the even lift F of f.
inline double dunkl_maximal_ball(const IntertwineContext& ctx, const SphereIntegrand& F, const Vec3& x,
                                 const MaximalOptions& o = {})
{
    const int d = ctx.dim();
    return dunkl_maximal_lifted(ctx, a_kappa(ctx.kappa), F, lift_to_sphere(d, x), {0, 0, 0}, o);
}

// M^T f(u) = M^B (f o sq)(sqrt u).
inline double dunkl_maximal_simplex(const IntertwineContext& ctx, const SphereIntegrand& F, const Vec3& u,
                                    const MaximalOptions& o = {})
{
    const int d = ctx.dim();
    return dunkl_maximal_ball(ctx, F, simplex_to_ball(d, u), o);
}

// Domination ratio at x: sphere M_kappa f(x) / sum_eps M_kappa f(x eps), ball
// with eps in Z_2^d, simplex M^T f(u) / M^T f(u).
inline double domination_ratio(const IntertwineContext& ctx, Domain dom, const SphereIntegrand& F, const Vec3& x,
                               const MaximalOptions& o = {})
{
    const int d = ctx.dim();
    WeightSpec spec{dom, ctx.kappa.kappa};
    double lhs;
    double rhs = 0;
    switch (dom) {
    case Domain::sphere:
        lhs = dunkl_maximal(ctx, F, x, o);
        for (int e = 0; e < (1 << (d + 1)); ++e) {
            Vec3 xe = x;
            for (int i = 0; i <= d; ++i) {
                if ((e >> i) & 1) xe[i] = -xe[i];
            }
            rhs += hl_maximal(spec, F, xe, o);
        }
        break;
    case Domain::ball:
        lhs = dunkl_maximal_ball(ctx, F, x, o);
        for (int e = 0; e < (1 << d); ++e) {
            Vec3 xe = x;
            for (int i = 0; i < d; ++i) {
                if ((e >> i) & 1) xe[i] = -xe[i];
            }
            rhs += hl_maximal(spec, F, xe, o);
        }
        break;
    default:
        lhs = dunkl_maximal_simplex(ctx, F, x, o);
        rhs = hl_maximal(spec, F, x, o);
        break;
    }
    return lhs / rhs;
}

struct DominationReport {
    double c_obs = 0;
    std::vector<double> ratios;
};

inline DominationReport domination_check(const IntertwineContext& ctx, Domain dom, const SphereIntegrand& F,
                                         const std::vector<Vec3>& points, const MaximalOptions& o = {})
{
    DominationReport r;
    for (const Vec3& x : points) {
        double q = domination_ratio(ctx, dom, F, x, o);
        r.ratios.push_back(q);
        r.c_obs = std::max(r.c_obs, q);
    }
    return r;
}

// ---- evaluation grids for level sets and norms ----

// Points of a domain (d = 1) with weights of the lifted measure h_tau^2 dphi on
// the lifted arc, graded toward the given sphere points. On the ball and the
// simplex the weights are those of the lifted region, which carries the
// domain measure up to the factor 2^d for the simplex.
struct EvaluationGrid {
    Domain domain = Domain::sphere;
    int d = 1;
    std::vector<Vec3> points;   // domain points
    std::vector<Vec3> lifted;   // sphere points
    std::vector<double> weights;

    double total() const
    {
        double s = 0;
        for (double w : weights) s += w;
        return s;
    }
};

inline EvaluationGrid evaluation_grid_d1(Domain dom, const std::vector<double>& tau, int base, double h_min,
                                         const std::vector<Vec3>& focus = {})
{
    if (tau.size() != 2) throw std::invalid_argument("evaluation grid: d = 1 only");
    double lo = 0, hi = 2 * std::numbers::pi;
    if (dom == Domain::ball) hi = std::numbers::pi;
    if (dom == Domain::simplex) hi = 0.5 * std::numbers::pi;
    const double h0 = (hi - lo) / base;
    std::vector<double> fa;
    for (const Vec3& f : focus) fa.push_back(std::atan2(f[1], f[0]));
    auto spacing = [&](double phi) {
        double h = h0;
        for (double a : fa) {
            double dist = std::abs(std::remainder(phi - a, 2 * std::numbers::pi));
            h = std::min(h, std::max(h_min, 0.25 * dist));
        }
        return h;
    };
    EvaluationGrid g;
    g.domain = dom;
    g.d = 1;
    // Midpoint rule on cells of locally adapted width.
    std::vector<double> edges{lo};
    while (edges.back() < hi) {
        double h = spacing(edges.back());
        double h2 = spacing(edges.back() + h);
        edges.push_back(std::min(hi, edges.back() + std::min(h, h2)));
    }
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        double phi = 0.5 * (edges[i] + edges[i + 1]);
        Vec3 y{std::cos(phi), std::sin(phi), 0.0};
        double w = (edges[i + 1] - edges[i]) * std::pow(std::abs(y[0]), 2 * tau[0]) * std::pow(std::abs(y[1]), 2 * tau[1]);
        Vec3 x = y;
        if (dom == Domain::ball) {
            x = {y[0], 0.0, 0.0};
        } else if (dom == Domain::simplex) {
            x = {y[0] * y[0], 0.0, 0.0};
        }
        g.points.push_back(x);
        g.lifted.push_back(y);
        g.weights.push_back(w);
    }
    return g;
}

// sup over alpha of alpha * meas{v >= alpha}, with alpha ranging over the values.
inline double weak_type_statistic(const std::vector<double>& values, const std::vector<double>& weights)
{
    std::vector<std::size_t> idx(values.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    double cum = 0, best = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        cum += weights[idx[k]];
        bool last_of_value = k + 1 == idx.size() || values[idx[k + 1]] < values[idx[k]];
        if (last_of_value) best = std::max(best, values[idx[k]] * cum);
    }
    return best;
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double a = std::log(x[i]) - mx;
        sxy += a * (std::log(y[i]) - my);
        sxx += a * a;
    }
    return sxx > 0 ? sxy / sxx : 0.0;
}

struct WeakTypeRow {
    double radius = 0;
    int center = 0;
    double ratio = 0;
};

struct WeakTypeReport {
    std::vector<WeakTypeRow> rows;
    std::vector<double> worst_by_radius;
    double slope = 0;  // d log(worst ratio) / d log(1/radius)
    double worst = 0;
};

// Spike family on a d = 1 domain: normalized metric-ball indicators at the
// given centers with radii r0, r0/2, ...; for each spike the statistic
// alpha * meas_tau{M f >= alpha} / ||f||_{tau,1} is the sup over attained
// values of the intertwining maximal function on a grid graded toward the
// spike orbit.
inline WeakTypeReport weak_type_experiment(const IntertwineContext& ctx, Domain dom, const std::vector<double>& tau,
                                           const std::vector<Vec3>& centers, double r0, int halvings,
                                           const MaximalOptions& o, int base = 96)
{
    const int d = ctx.dim();
    if (d != 1) throw std::invalid_argument("weak_type_experiment: d = 1 only");
    const double a_kap = a_kappa(ctx.kappa);
    WeakTypeReport rep;
    std::vector<double> radii;
    for (int h = 0; h < halvings; ++h) {
        double r = r0 / std::pow(2.0, h);
        radii.push_back(r);
        double worst = 0;
        for (std::size_t ci = 0; ci < centers.size(); ++ci) {
            const Vec3& x0 = centers[ci];
            Vec3 X0 = domain_lift(dom, d, x0);
            // Norm in kappa so that the averages are O(1); ||f||_{tau,1} follows.
            SphereIntegrand unit = spike_integrand(dom, d, x0, r, 1.0);
            const auto lift_sign = domain_signs(dom, d);
            double mk = 0, mt = 0;
            for (const SupportPiece& p : unit.support) {
                std::array<int, 3> s;
                if (!detail::merge_signs(lift_sign, p.sign, s)) continue;
                CapRule rule = detail::maximal_rule(o, s);
                rule.m = 16;
                mk += integrate_cap(d, ctx.kappa.kappa, p.center, p.angle, unit.value, unit.breaks, rule);
                mt += integrate_cap(d, tau, p.center, p.angle, unit.value, unit.breaks, rule);
            }
            SphereIntegrand F = spike_integrand(dom, d, x0, r, mk);
            const double f1 = mt / mk;
            // Orbit of the spike center, where the level sets concentrate.
            std::vector<Vec3> focus;
            for (int e = 0; e < 4; ++e) focus.push_back({(e & 1 ? -1 : 1) * X0[0], (e & 2 ? -1 : 1) * X0[1], 0.0});
            EvaluationGrid g = evaluation_grid_d1(dom, tau, base, r / 16, focus);
            std::vector<double> vals(g.points.size());
            for (std::size_t k = 0; k < g.points.size(); ++k) {
                vals[k] = dunkl_maximal_lifted(ctx, a_kap, F, g.lifted[k], {0, 0, 0}, o);
            }
            double ratio = weak_type_statistic(vals, g.weights) / f1;
            rep.rows.push_back({r, static_cast<int>(ci), ratio});
            worst = std::max(worst, ratio);
        }
        rep.worst_by_radius.push_back(worst);
        rep.worst = std::max(rep.worst, worst);
    }
    std::vector<double> inv(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) inv[i] = 1 / radii[i];
    rep.slope = loglog_slope(inv, rep.worst_by_radius);
    return rep;
}

// ---- denominator identity ----

// Cap rule for the quadrature side of the denominator identity.
inline CapRule denominator_rule(const MultiplicityVector& kappa)
{
    CapRule r;
    r.m = kappa.dim() == 1 ? 8 : 7;
    r.edge_order = kappa.gamma_kappa;
    r.smooth_order = std::max(3.0, kappa.gamma_kappa + 0.5);
    for (int i = 0; i <= kappa.dim(); ++i) r.sign[i] = 1;
    return r;
}

// a_kappa int V[chi_{B(x,theta)}] h_kappa^2 dw by quadrature. The orbit mean of
// the cap transform is integrated over the positive orthant part of the cap
// around |x|, split along the vertex circles <|x| e, y> = cos theta.
inline double dunkl_denominator_quadrature(const IntertwineContext& ctx, const Vec3& x, double theta, double a_kap,
                                           const CapRule& rule)
{
    const int n = ctx.dim() + 1;
    const Vec3 xb = abs_coords(x);
    std::vector<BreakCircle> br;
    for (int e = 1; e < (1 << n); ++e) {
        BreakCircle b;
        for (int i = 0; i < n; ++i) b.w[i] = (e >> i) & 1 ? -xb[i] : xb[i];
        b.c = std::cos(theta);
        b.order = ctx.kappa.gamma_kappa;
        br.push_back(b);
    }
    double acc = 0;
    cap_nodes(ctx.dim(), ctx.kappa.kappa, xb, theta, br, rule,
              [&](const Vec3& y, double w) { acc += w * intertwine_cap_orbit_mean(ctx, xb, theta, y); });
    return a_kap * std::pow(2.0, n) * acc;
}

struct IdentityCheck {
    double lhs = 0;
    double rhs = 0;
    double rel = 0;
};

// Both sides of a_kappa int V[chi_{B(x,theta)}] h^2 = c_lambda int_0^theta sin^{2 lambda}.
inline IdentityCheck denominator_identity(const IntertwineContext& ctx, const Vec3& x, double theta, double a_kap,
                                          const CapRule& rule)
{
    IdentityCheck c;
    c.lhs = dunkl_denominator_quadrature(ctx, x, theta, a_kap, rule);
    c.rhs = a_kap * dunkl_denominator_closed(ctx.kappa, theta, a_kap);
    c.rel = std::abs(c.lhs / c.rhs - 1);
    return c;
}

// ---- stencils for families of smooth functions ----

// Nodes and weights of one cap average: sum_k w_k g(y_k) is the average of g.
struct AverageStencil {
    double theta = 0;
    std::vector<Vec3> nodes;
    std::vector<double> weights;
};

// Intertwining averages at X for every angle, for integrands on the whole sphere.
inline std::vector<AverageStencil> dunkl_stencils(const IntertwineContext& ctx, double a_kap, const Vec3& X,
                                                  const MaximalOptions& o)
{
    const int d = ctx.dim();
    const Vec3 xb = abs_coords(X);
    std::vector<AverageStencil> out;
    for (double th : o.thetas) {
        AverageStencil st;
        st.theta = th;
        const double den = dunkl_denominator_closed(ctx.kappa, th, a_kap);
        auto circles = detail::intertwine_circles(ctx, X, th);
        for (int e = 0; e < (1 << (d + 1)); ++e) {
            std::array<int, 3> os{0, 0, 0};
            Vec3 c{};
            for (int i = 0; i <= d; ++i) {
                os[i] = (e >> i) & 1 ? -1 : 1;
                c[i] = os[i] * xb[i];
            }
            cap_nodes(d, ctx.kappa.kappa, c, th, circles, detail::maximal_rule(o, os), [&](const Vec3& y, double w) {
                double v = intertwine_cap(ctx, X, th, y);
                if (v > 0) {
                    st.nodes.push_back(y);
                    st.weights.push_back(w * v / den);
                }
            });
        }
        out.push_back(std::move(st));
    }
    return out;
}

// Hardy-Littlewood averages for the weight h_tau^2 at X.
inline std::vector<AverageStencil> hl_stencils(int d, const std::vector<double>& tau, const Vec3& X,
                                               const MaximalOptions& o)
{
    std::vector<AverageStencil> out;
    for (double th : o.thetas) {
        AverageStencil st;
        st.theta = th;
        double mass = 0;
        cap_nodes(d, tau, X, th, {}, detail::maximal_rule(o, {0, 0, 0}), [&](const Vec3& y, double w) {
            st.nodes.push_back(y);
            st.weights.push_back(w);
            mass += w;
        });
        for (double& w : st.weights) w /= mass;
        out.push_back(std::move(st));
    }
    return out;
}

// sup over the stencils of the averages of |g|.
template <class G>
double stencil_sup(const std::vector<AverageStencil>& sts, G&& g)
{
    double best = 0;
    for (const auto& st : sts) {
        double a = 0;
        for (std::size_t k = 0; k < st.nodes.size(); ++k) a += st.weights[k] * std::abs(g(st.nodes[k]));
        best = std::max(best, a);
    }
    return best;
}

using PointFunction = std::function<double(const Vec3&)>;

// Intertwining maximal functions of a family at the grid points: out[j][k].
inline std::vector<std::vector<double>> dunkl_maximal_family(const IntertwineContext& ctx, const EvaluationGrid& g,
                                                              const std::vector<PointFunction>& fs,
                                                              const MaximalOptions& o)
{
    const double a_kap = a_kappa(ctx.kappa);
    std::vector<std::vector<double>> out(fs.size(), std::vector<double>(g.lifted.size()));
    for (std::size_t k = 0; k < g.lifted.size(); ++k) {
        auto sts = dunkl_stencils(ctx, a_kap, g.lifted[k], o);
        for (std::size_t j = 0; j < fs.size(); ++j) out[j][k] = stencil_sup(sts, fs[j]);
    }
    return out;
}

namespace detail {

inline double weighted_norm(const std::vector<double>& w, const std::vector<double>& v, double p)
{
    double s = 0, m = 0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        s += w[k] * std::pow(std::abs(v[k]), p);
        m += w[k];
    }
    return std::pow(s / m, 1 / p);
}

inline std::vector<double> sample(const PointFunction& f, const std::vector<Vec3>& pts)
{
    std::vector<double> v(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) v[k] = f(pts[k]);
    return v;
}

inline std::vector<double> l2_sum(const std::vector<std::vector<double>>& rows)
{
    std::vector<double> v(rows.empty() ? 0 : rows[0].size(), 0.0);
    for (const auto& r : rows) {
        for (std::size_t k = 0; k < v.size(); ++k) v[k] += r[k] * r[k];
    }
    for (double& x : v) x = std::sqrt(x);
    return v;
}

} // namespace detail

// Componentwise -1/2 < tau < p kappa + (p-1)/2.
inline bool lp_range_ok(const MultiplicityVector& kappa, const std::vector<double>& tau, double p)
{
    for (std::size_t i = 0; i < tau.size(); ++i) {
        if (!(tau[i] > -0.5 && tau[i] < p * kappa[i] + 0.5 * (p - 1))) return false;
    }
    return true;
}

// Sampled family and its intertwining maximal functions on a d = 1 midpoint
// grid with base cells, weighted by h_tau^2.
struct FamilyMaxima {
    EvaluationGrid grid;
    std::vector<std::vector<double>> values;
    std::vector<std::vector<double>> maxima;

    double ratio(std::size_t j, double p) const
    {
        return detail::weighted_norm(grid.weights, maxima[j], p) / detail::weighted_norm(grid.weights, values[j], p);
    }
    // ||(sum (M f_j)^2)^{1/2}||_p / ||(sum f_j^2)^{1/2}||_p
    double vector_ratio(double p) const
    {
        return detail::weighted_norm(grid.weights, detail::l2_sum(maxima), p) /
               detail::weighted_norm(grid.weights, detail::l2_sum(values), p);
    }
};

inline FamilyMaxima family_maxima(const IntertwineContext& ctx, const std::vector<double>& tau,
                                  const std::vector<PointFunction>& fs, int base, const MaximalOptions& o)
{
    make_weight_spec(Domain::sphere, tau);
    FamilyMaxima fm;
    fm.grid = evaluation_grid_d1(Domain::sphere, tau, base, 1.0);
    fm.maxima = dunkl_maximal_family(ctx, fm.grid, fs, o);
    for (const auto& f : fs) fm.values.push_back(detail::sample(f, fm.grid.lifted));
    return fm;
}

struct LpReport {
    std::vector<double> ratios;  // per function
    double worst = 0;
    double vector_ratio = 0;     // l^2-valued ratio of the whole family
    bool in_range = false;
};

// ||M_kappa f||_{tau,p} / ||f||_{tau,p} for each member and the vector ratio.
inline LpReport lp_bound_experiment(const IntertwineContext& ctx, const std::vector<double>& tau, double p,
                                    const std::vector<PointFunction>& fs, int base, const MaximalOptions& o)
{
    if (!(p > 1)) throw std::domain_error("lp bound: p > 1 is required");
    FamilyMaxima fm = family_maxima(ctx, tau, fs, base, o);
    LpReport r;
    r.in_range = lp_range_ok(ctx.kappa, tau, p);
    for (std::size_t j = 0; j < fs.size(); ++j) {
        r.ratios.push_back(fm.ratio(j, p));
        r.worst = std::max(r.worst, r.ratios.back());
    }
    r.vector_ratio = fm.vector_ratio(p);
    return r;
}

// max over the grid points of M_kappa f / (M_tau |f|^q)^{1/q}, both
// Hardy-Littlewood maximal functions.
inline double hl_power_domination(int d, const std::vector<double>& kappa, const std::vector<double>& tau, double q,
                                  const PointFunction& f, const std::vector<Vec3>& points, const MaximalOptions& o)
{
    if (!(q > 1)) throw std::domain_error("power domination: q > 1 is required");
    double worst = 0;
    for (const Vec3& x : points) {
        double lhs = stencil_sup(hl_stencils(d, kappa, x, o), f);
        double rhs = std::pow(stencil_sup(hl_stencils(d, tau, x, o), [&](const Vec3& y) {
                                  return std::pow(std::abs(f(y)), q);
                              }), 1 / q);
        worst = std::max(worst, lhs / rhs);
    }
    return worst;
}

// int |M f|^p W h^2 / int |f|^p (M W) h^2 with the Hardy-Littlewood maximal
// function for h_kappa^2 on a d = 1 grid.
inline double stein_weight_ratio(const std::vector<double>& kappa, double p, const PointFunction& f,
                                 const SphereIntegrand& W, int base, const MaximalOptions& o)
{
    WeightSpec spec = make_weight_spec(Domain::sphere, kappa);
    EvaluationGrid g = evaluation_grid_d1(Domain::sphere, kappa, base, 1.0);
    double lhs = 0, rhs = 0;
    for (std::size_t k = 0; k < g.lifted.size(); ++k) {
        const Vec3& x = g.lifted[k];
        double mf = stencil_sup(hl_stencils(1, kappa, x, o), f);
        lhs += g.weights[k] * std::pow(mf, p) * W.value(x);
        rhs += g.weights[k] * std::pow(std::abs(f(x)), p) * hl_maximal(spec, W, x, o);
    }
    return lhs / rhs;
}

struct CesaroReport {
    std::vector<double> vector_ratios;  // one per p
    double pointwise = 0;  // max over points and members of sup_n |S_n f| / M f
};

// ||(sum |S_{n_j} f_j|^2)^{1/2}||_{kappa,p} / ||(sum |f_j|^2)^{1/2}||_{kappa,p}
// for each p, and the pointwise ratio sup_n |S_n^delta f| / M_kappa f, on a
// d = 1 grid.
inline CesaroReport cesaro_maximal_experiment(const IntertwineContext& ctx, double delta, const std::vector<double>& ps,
                                              const std::vector<int>& ns, const std::vector<DegreeDecomposition>& fs,
                                              int base, const MaximalOptions& o, bool allow_small_delta = false)
{
    const double lam = ctx.kappa.lambda_kappa;
    if (!(delta > lam) && !allow_small_delta) throw std::domain_error("cesaro: delta > lambda_kappa is required");
    if (ns.size() != fs.size() || fs.empty()) throw std::invalid_argument("cesaro: one degree per function required");
    EvaluationGrid g = evaluation_grid_d1(Domain::sphere, ctx.kappa.kappa, base, 1.0);
    std::vector<PointFunction> pf;
    for (const auto& f : fs) {
        auto dec = std::make_shared<DegreeDecomposition>(f);
        pf.push_back([dec](const Vec3& y) { return dec->eval(y); });
    }
    auto M = dunkl_maximal_family(ctx, g, pf, o);
    std::vector<std::vector<double>> S, F;
    CesaroReport r;
    for (std::size_t j = 0; j < fs.size(); ++j) {
        DegreeDecomposition s = cesaro_mean(fs[j], ns[j], delta);
        S.push_back(std::vector<double>(g.lifted.size()));
        F.push_back(detail::sample(pf[j], g.lifted));
        std::vector<DegreeDecomposition> all;
        for (int n = 0; n <= fs[j].max_degree(); ++n) all.push_back(cesaro_mean(fs[j], n, delta));
        for (std::size_t k = 0; k < g.lifted.size(); ++k) {
            S[j][k] = s.eval(g.lifted[k]);
            double sup = 0;
            for (const auto& a : all) sup = std::max(sup, std::abs(a.eval(g.lifted[k])));
            r.pointwise = std::max(r.pointwise, sup / M[j][k]);
        }
    }
    for (double p : ps) {
        if (!(p > 1)) throw std::domain_error("cesaro: p > 1 is required");
        r.vector_ratios.push_back(detail::weighted_norm(g.weights, detail::l2_sum(S), p) /
                                  detail::weighted_norm(g.weights, detail::l2_sum(F), p));
    }
    return r;
}

} // namespace dunkl

#endif
