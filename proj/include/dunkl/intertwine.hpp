#ifndef DUNKL_INTERTWINE_HPP
#define DUNKL_INTERTWINE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "detail/quadrature.hpp"
#include "geometry.hpp"
#include "specfun.hpp"

namespace dunkl {

namespace detail {


// Chebyshev series on [lo, hi].
struct ChebSeries {
    double lo = 0, hi = 1;
    std::vector<double> c;

    template <class F>
    static ChebSeries fit(double lo, double hi, int n, F&& f)
    {
        ChebSeries s;
        s.lo = lo;
        s.hi = hi;
        std::vector<double> v(n);
        for (int k = 0; k < n; ++k) {
            double t = std::cos(std::numbers::pi * (k + 0.5) / n);
            v[k] = f(0.5 * (lo + hi) + 0.5 * (hi - lo) * t);
        }
        s.c.assign(n, 0.0);
        for (int j = 0; j < n; ++j) {
            double a = 0;
            for (int k = 0; k < n; ++k) a += v[k] * std::cos(std::numbers::pi * j * (k + 0.5) / n);
            s.c[j] = a * 2.0 / n;
        }
        s.c[0] *= 0.5;
        return s;
    }

    double operator()(double z) const
    {
        double t = (2 * z - lo - hi) / (hi - lo);
        double b1 = 0, b2 = 0;
        for (std::size_t j = c.size(); j-- > 1;) {
            double b0 = 2 * t * b1 - b2 + c[j];
            b2 = b1;
            b1 = b0;
        }
        return t * b1 - b2 + c[0];
    }
};

// Probability density rho(s) = norm R(s) (1-s)^alpha (1+s)^beta on [-1,1]
// and its upper tail Q(z) = P(s >= z), stored as
//   Q(z)     = (1-z)^{alpha+1} A(z)   on [0,1],
//   1 - Q(z) = (1+z)^{beta+1}  B(z)   on [-1,0],
// with A, B analytic. R = 1 for Jacobi densities; the half density (the
// symmetric Jacobi density folded onto [0,1] and mapped to [-1,1]) has
// R(s) = ((3+s)/2)^alpha and beta = 0.
struct Tail {
    double alpha = 0, beta = 0;
    double norm = 1;
    bool half = false;
    ChebSeries A, B;
    Power pa, pb, pa1, pb1;

    void set_exponents(double a, double b)
    {
        alpha = a;
        beta = b;
        pa = Power(a);
        pb = Power(b);
        pa1 = Power(a + 1);
        pb1 = Power(b + 1);
    }

    double rest(double s) const { return half ? norm * pa(0.5 * (3 + s)) : norm; }

    double upper(double z, double omz, double opz) const
    {
        if (z >= 0) return pa1(omz) * A(std::min(z, 1.0));
        return 1 - pb1(opz) * B(std::max(z, -1.0));
    }
    double lower(double z, double omz, double opz) const
    {
        if (z <= 0) return pb1(opz) * B(std::max(z, -1.0));
        return 1 - pa1(omz) * A(std::min(z, 1.0));
    }
    // Q(z) / (1-z)^{alpha+1}.
    double upper_scaled(double z, double omz, double opz) const
    {
        if (z >= 0) return A(std::min(z, 1.0));
        return (1 - pb1(opz) * B(std::max(z, -1.0))) / pa1(omz);
    }
    // (1 - Q(z)) / (1+z)^{beta+1}.
    double lower_scaled(double z, double omz, double opz) const
    {
        if (z <= 0) return B(std::max(z, -1.0));
        return (1 - pa1(omz) * A(std::min(z, 1.0))) / pb1(opz);
    }
};

inline Tail make_jacobi_tail(double alpha, double beta, int n = 22)
{
    Tail t;
    t.set_exponents(alpha, beta);
    t.norm = 1.0 / (std::pow(2.0, alpha + beta + 1) * boost::math::beta(alpha + 1, beta + 1));
    const double a1 = alpha + 1, b1 = beta + 1;
    t.A = ChebSeries::fit(0.0, 1.0, n, [&](double z) {
        return boost::math::ibeta(a1, b1, 0.5 * (1 - z)) / std::pow(1 - z, a1);
    });
    t.B = ChebSeries::fit(-1.0, 0.0, n, [&](double z) {
        return boost::math::ibeta(b1, a1, 0.5 * (1 + z)) / std::pow(1 + z, b1);
    });
    return t;
}

// u in [0,1] with density proportional to (1-u^2)^{k-1}, written as s = 2u-1.
inline Tail make_half_tail(double k, int n = 22)
{
    Tail t;
    t.set_exponents(k - 1, 0);
    t.half = true;
    const double c = 1.0 / (std::pow(2.0, 2 * k - 1) * boost::math::beta(k, k));
    t.norm = c * std::pow(2.0, 1 - k);
    t.A = ChebSeries::fit(0.0, 1.0, n, [&](double z) {
        return 2 * boost::math::ibeta(k, k, 0.25 * (1 - z)) / std::pow(1 - z, k);
    });
    t.B = ChebSeries::fit(-1.0, 0.0, n, [&](double z) {
        return 2 * (0.5 - boost::math::ibeta(k, k, 0.25 * (1 - z))) / (1 + z);
    });
    return t;
}

struct TailPair {
    double p;  // P(sum >= c)
    double q;  // 1 - p
};

// P(b1 s1 + b2 s2 >= c) for independent s1 ~ T1, s2 ~ T2 and 0 < b1 <= b2.
// gt = b1 + b2 - c and gb = c + b1 + b2 are passed in with full precision.
inline TailPair level2(const Tail& T1, double b1, const Tail& T2, double b2, double c, double gt, double gb, int m)
{
    if (gt <= 0) return {0, 1};
    if (gb <= 0) return {1, 0};
    const double r = b1 / b2;
    const double lo_gap = (c + b1 - b2) / b1;  // k_lo + 1
    const double hi_gap = (b1 - b2 - c) / b1;  // 1 - k_hi
    double acc = 0;
    if (lo_gap > 0) {
        // Inner tail vanishes for s1 < k_lo.
        const double len = gt / b1;
        const double L = len < lo_gap ? 1 - len : -1 + lo_gap;
        const double ra = std::pow(r, T2.alpha + 1);
        graded_segment(L, len, T2.alpha + 1, T1.alpha, lo_gap, -hi_gap, m,
                       [&](double s, double dl, double du, double w) {
                           double omz = r * dl;
                           double opz = 2 - omz;
                           double v = T1.rest(s) * T1.pb(2 - du) * ra *
                                      T2.upper_scaled(1 - omz, omz, opz);
                           acc += w * v;
                       });
        return {acc, 1 - acc};
    }
    if (hi_gap > 0) {
        // Inner tail is 1 for s1 > k_hi; integrate the complement.
        const double len = gb / b1;
        const double rb = std::pow(r, T2.beta + 1);
        graded_segment(-1.0, len, T1.beta, T2.beta + 1, -lo_gap, hi_gap, m,
                       [&](double s, double dl, double du, double w) {
                           double opz = r * du;
                           double omz = 2 - opz;
                           double v = T1.rest(s) * T1.pa(2 - dl) * rb *
                                      T2.lower_scaled(-1 + opz, omz, opz);
                           acc += w * v;
                       });
        return {1 - acc, acc};
    }
    graded_segment(-1.0, 2.0, T1.beta, T1.alpha, -lo_gap, -hi_gap, m,
                   [&](double s, double dl, double du, double w) {
                       double omz = r * (dl - lo_gap);
                       double opz = r * (du - hi_gap);
                       double z = omz < opz ? 1 - omz : -1 + opz;
                       acc += w * T1.rest(s) * T2.upper(z, omz, opz);
                   });
    return {acc, 1 - acc};
}

inline TailPair level1(const Tail& T, double b, double, double gt, double gb)
{
    if (gt <= 0) return {0, 1};
    if (gb <= 0) return {1, 0};
    double omz = gt / b, opz = gb / b;
    double z = omz < opz ? 1 - omz : -1 + opz;
    if (z >= 0) {
        double p = T.upper(z, omz, opz);
        return {p, 1 - p};
    }
    double q = T.lower(z, omz, opz);
    return {1 - q, q};
}

// P(b1 s1 + b2 s2 + b3 s3 >= c) with 0 < b1 <= b2 <= b3; s1 is integrated
// numerically, the pair (s2, s3) by level2.
inline TailPair level3(const Tail& T1, double b1, const Tail& T2, double b2, const Tail& T3, double b3, double c,
                       double gt, double gb, int m3, int m2)
{
    if (gt <= 0) return {0, 1};
    if (gb <= 0) return {1, 0};
    // Special points of the s1 integrand with offsets to k_top and to k_bot.
    struct Pt {
        double pos, off_top, off_bot;
        int kind;  // 0: -1, 1: +1, 2: k_top, 3: interior kink, 4: k_bot
    };
    const double s23 = (b2 + b3) / b1;
    std::array<Pt, 6> pts{{
        {-1.0, (gt - 2 * b1) / b1, gb / b1, 0},
        {1.0, gt / b1, (gb - 2 * b1) / b1, 1},
        {0, 0.0, 2 * s23, 2},
        {0, 2 * b2 / b1, 2 * b3 / b1, 3},
        {0, 2 * b3 / b1, 2 * b2 / b1, 3},
        {0, 2 * s23, 0.0, 4},
    }};
    const double k_top = gt / b1 < 1 ? 1 - gt / b1 : (c - b2 - b3) / b1;
    for (int i = 2; i < 6; ++i) pts[i].pos = k_top + pts[i].off_top;
    pts[5].pos = gb / b1 < 1 ? -1 + gb / b1 : (c + b2 + b3) / b1;
    std::array<Pt, 6> sorted = pts;
    std::sort(sorted.begin(), sorted.end(), [](const Pt& a, const Pt& b) { return a.off_top < b.off_top; });

    double total = 0;
    // Mass above k_bot where the inner probability is 1.
    if (pts[5].off_top < pts[1].off_top) {
        double omz = pts[1].off_top - pts[5].off_top;
        total += T1.upper(pts[5].pos, omz, gb / b1);
    }
    const double lo = std::max(pts[0].off_top, 0.0);
    const double hi = std::min(pts[1].off_top, pts[5].off_top);
    for (int i = 0; i + 1 < 6; ++i) {
        const Pt& a = sorted[i];
        const Pt& b = sorted[i + 1];
        if (a.off_top < lo || b.off_top > hi) continue;
        const double len = b.off_top - a.off_top;
        if (!(len > 0)) continue;
        const double eL = a.kind == 0 ? T1.beta : (a.kind == 2 ? T2.alpha + T3.alpha + 2 : 0.0);
        const double eU = b.kind == 1 ? T1.alpha : (b.kind == 4 ? T2.beta + T3.beta + 2 : 0.0);
        const bool comp = b.kind == 4;
        double sL = kInf, sU = kInf;
        if (i > 0) sL = a.off_top - sorted[i - 1].off_top;
        if (i + 2 < 6) sU = sorted[i + 2].off_top - b.off_top;
        const double ops_a = a.kind == 0 ? 0.0 : a.off_top - pts[0].off_top;
        const double oms_b = b.kind == 1 ? 0.0 : pts[1].off_top - b.off_top;
        const Power pL(eL), pU(eU);
        double acc = 0;
        graded_segment(a.pos, len, eL, eU, sL, sU, m3, [&](double s, double dl, double du, double w) {
            double dens = T1.rest(s);
            if (a.kind != 0) dens *= T1.pb(ops_a + dl);
            if (b.kind != 1) dens *= T1.pa(oms_b + du);
            double gt2 = b1 * (a.off_top + dl);
            double gb2 = b1 * (b.off_bot + du);
            TailPair in = level2(T2, b2, T3, b3, c - b1 * s, gt2, gb2, m2);
            double v;
            if (comp) {
                v = in.q / pU(du);
            } else if (a.kind == 2) {
                v = in.p / pL(dl);
            } else {
                v = in.p;
            }
            acc += w * dens * v;
        });
        if (comp) {
            // mass of the piece minus the complement integral
            double za = a.pos;
            double qa = a.kind == 0 ? 1.0 : T1.upper(za, oms_b + len, ops_a);
            double zb = b.pos;
            double qb = T1.upper(zb, oms_b, ops_a + len);
            total += (qa - qb) - acc;
        } else {
            total += acc;
        }
    }
    return {total, 1 - total};
}

} // namespace detail

// Per-coordinate data of the Z_2^{d+1} intertwining operator
//   V f(x) = c_kappa int f(x_1 t_1, ..., x_{d+1} t_{d+1}) prod (1+t_i)(1-t_i^2)^{kappa_i - 1} dt.
// The factor (1+t_i) is folded into a Jacobi weight with alpha = kappa_i - 1,
// beta = kappa_i. A zero multiplicity is a point mass at t_i = 1.
struct IntertwineContext {
    MultiplicityVector kappa;
    int m = 40;
    int cap_m = 16;
    std::vector<JacobiRule> rules;  // weights normalized to total mass 1
    std::vector<bool> point_mass;
    double c_kappa = 1;
    std::vector<detail::Tail> tail_pos, tail_neg, tail_sym, tail_half;

    int dim() const { return kappa.dim(); }
};

inline IntertwineContext make_intertwine_context(const MultiplicityVector& kappa, int m = 40, int cap_m = 16)
{
    if (m < 1 || cap_m < 2) {
        throw std::invalid_argument("intertwine context: node counts too small");
    }
    IntertwineContext ctx;
    ctx.kappa = kappa;
    ctx.m = m;
    ctx.cap_m = cap_m;
    const std::size_t n = kappa.size();
    ctx.rules.resize(n);
    ctx.point_mass.resize(n);
    ctx.tail_pos.resize(n);
    ctx.tail_neg.resize(n);
    ctx.tail_sym.resize(n);
    ctx.tail_half.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double k = kappa[i];
        if (k == 0) {
            ctx.point_mass[i] = true;
            ctx.rules[i].alpha = -1;
            ctx.rules[i].beta = 0;
            ctx.rules[i].nodes = {1.0};
            ctx.rules[i].weights = {1.0};
            continue;
        }
        ctx.point_mass[i] = false;
        JacobiRule r = gauss_jacobi_rule(m, k - 1, k);
        double mass = std::pow(2.0, 2 * k) * boost::math::beta(k, k + 1);
        ctx.c_kappa /= mass;
        for (double& w : r.weights) w /= mass;
        ctx.rules[i] = std::move(r);
        ctx.tail_pos[i] = detail::make_jacobi_tail(k - 1, k);
        ctx.tail_neg[i] = detail::make_jacobi_tail(k, k - 1);
        ctx.tail_sym[i] = detail::make_jacobi_tail(k - 1, k - 1);
        ctx.tail_half[i] = detail::make_half_tail(k);
    }
    return ctx;
}

// c_kappa int g(sum_i t_i x_i y_i) prod (1+t_i)(1-t_i^2)^{kappa_i-1} dt by the
// tensor Gauss-Jacobi rule.
template <class G>
double intertwine_profile(const IntertwineContext& ctx, G&& g, const Vec3& x, const Vec3& y)
{
    const int n = static_cast<int>(ctx.kappa.size());
    Vec3 a = hadamard(x, y);
    const JacobiRule& r0 = ctx.rules[0];
    const JacobiRule& r1 = ctx.rules[1];
    double acc = 0;
    if (n == 2) {
        for (std::size_t i = 0; i < r0.size(); ++i) {
            double s0 = r0.nodes[i] * a[0];
            double inner = 0;
            for (std::size_t j = 0; j < r1.size(); ++j) inner += r1.weights[j] * g(s0 + r1.nodes[j] * a[1]);
            acc += r0.weights[i] * inner;
        }
        return acc;
    }
    const JacobiRule& r2 = ctx.rules[2];
    for (std::size_t i = 0; i < r0.size(); ++i) {
        double s0 = r0.nodes[i] * a[0];
        double mid = 0;
        for (std::size_t j = 0; j < r1.size(); ++j) {
            double s1 = s0 + r1.nodes[j] * a[1];
            double inner = 0;
            for (std::size_t k = 0; k < r2.size(); ++k) inner += r2.weights[k] * g(s1 + r2.nodes[k] * a[2]);
            mid += r1.weights[j] * inner;
        }
        acc += r0.weights[i] * mid;
    }
    return acc;
}

// As intertwine_profile, also evaluated with doubled rules; throws when the two
// differ by more than tol.
template <class G>
double intertwine_profile_checked(const IntertwineContext& ctx, G&& g, const Vec3& x, const Vec3& y, double tol = 1e-8)
{
    double v = intertwine_profile(ctx, g, x, y);
    IntertwineContext fine = make_intertwine_context(ctx.kappa, 2 * ctx.m, ctx.cap_m);
    double w = intertwine_profile(fine, g, x, y);
    if (std::abs(v - w) > tol * std::max(1.0, std::abs(w))) {
        throw std::runtime_error("intertwine_profile: rule refinement disagrees");
    }
    return v;
}

enum class TailMode { oriented, symmetric };

namespace detail {

struct ActiveCoord {
    const Tail* tail;
    double b;
};

inline double cap_probability(const IntertwineContext& ctx, std::array<ActiveCoord, 3> act, int na, double c)
{
    double sb = 0;
    for (int i = 0; i < na; ++i) sb += act[i].b;
    const double gt = sb - c;
    const double gb = c + sb;
    std::sort(act.begin(), act.begin() + na, [](const ActiveCoord& u, const ActiveCoord& v) { return u.b < v.b; });
    const int m = ctx.cap_m;
    switch (na) {
    case 0:
        return c <= 0 ? 1.0 : 0.0;
    case 1:
        return level1(*act[0].tail, act[0].b, c, gt, gb).p;
    case 2:
        return level2(*act[0].tail, act[0].b, *act[1].tail, act[1].b, c, gt, gb, m).p;
    default:
        return level3(*act[0].tail, act[0].b, *act[1].tail, act[1].b, *act[2].tail, act[2].b, c, gt, gb, m, m).p;
    }
}

// Recursion over zero multiplicities: a point mass at +1 (oriented) or the
// average of +1 and -1 (symmetric, the sign-orbit average).
inline double cap_transform_rec(const IntertwineContext& ctx, const Vec3& a, int n, int i, double c, TailMode mode,
                                std::array<ActiveCoord, 3>& act, int na)
{
    if (i == n) {
        return cap_probability(ctx, act, na, c);
    }
    if (ctx.point_mass[i]) {
        if (mode == TailMode::oriented) {
            return cap_transform_rec(ctx, a, n, i + 1, c - a[i], mode, act, na);
        }
        return 0.5 * (cap_transform_rec(ctx, a, n, i + 1, c - a[i], mode, act, na) +
                      cap_transform_rec(ctx, a, n, i + 1, c + a[i], mode, act, na));
    }
    if (a[i] == 0) {
        return cap_transform_rec(ctx, a, n, i + 1, c, mode, act, na);
    }
    const Tail* t;
    if (mode == TailMode::symmetric) {
        t = &ctx.tail_sym[i];
    } else {
        t = a[i] > 0 ? &ctx.tail_pos[i] : &ctx.tail_neg[i];
    }
    act[na] = {t, std::abs(a[i])};
    return cap_transform_rec(ctx, a, n, i + 1, c, mode, act, na + 1);
}

} // namespace detail

// V_kappa[chi_{B(x,theta)}](y) = P(sum_i t_i x_i y_i >= cos theta) under the
// product measure of the intertwiner.
inline double intertwine_cap(const IntertwineContext& ctx, const Vec3& x, double theta, const Vec3& y)
{
    if (!(theta > 0 && theta <= std::numbers::pi)) {
        throw std::domain_error("intertwine_cap: theta in (0, pi] is required");
    }
    const int n = static_cast<int>(ctx.kappa.size());
    std::array<detail::ActiveCoord, 3> act{};
    return detail::cap_transform_rec(ctx, hadamard(x, y), n, 0, std::cos(theta), TailMode::oriented, act, 0);
}

// 2^{-(d+1)} sum over sign vectors e of V_kappa[chi_{B(x,theta)}](e y). The sign
// sum replaces each density by its symmetrization c (1-t^2)^{kappa-1}.
inline double intertwine_cap_orbit_mean(const IntertwineContext& ctx, const Vec3& x, double theta, const Vec3& y)
{
    if (!(theta > 0 && theta <= std::numbers::pi)) {
        throw std::domain_error("intertwine_cap: theta in (0, pi] is required");
    }
    const int n = static_cast<int>(ctx.kappa.size());
    std::array<detail::ActiveCoord, 3> act{};
    return detail::cap_transform_rec(ctx, hadamard(x, y), n, 0, std::cos(theta), TailMode::symmetric, act, 0);
}

// prod theta^{2 kappa_j} / (|x_j| + theta)^{2 kappa_j} on the set <|x|,|y|> >= cos theta.
inline double lemma2_bound(const IntertwineContext& ctx, const Vec3& x, double theta, const Vec3& y)
{
    if (dot(abs_coords(x), abs_coords(y)) < std::cos(theta)) {
        return 0;
    }
    double p = 1;
    for (std::size_t j = 0; j < ctx.kappa.size(); ++j) {
        double k = ctx.kappa[j];
        if (k != 0) p *= std::pow(theta / (std::abs(x[j]) + theta), 2 * k);
    }
    return p;
}

// Ball cap transform at Y = lift(y): the symmetrized transform of the
// half-cap e(x,theta), normalized so that the value at theta = pi is 1. In
// the last coordinate the symmetric density is restricted to [0,1].
inline double intertwine_cap_ball(const IntertwineContext& ctx, const Vec3& x, double theta, const Vec3& y)
{
    const int d = ctx.dim();
    check_ball(d, x);
    check_ball(d, y);
    if (!(theta > 0 && theta <= std::numbers::pi)) {
        throw std::domain_error("intertwine_cap_ball: theta in (0, pi] is required");
    }
    Vec3 X = lift_to_sphere(d, x);
    Vec3 Y = lift_to_sphere(d, y);
    Vec3 a = hadamard(X, Y);
    double c = std::cos(theta);
    std::array<detail::ActiveCoord, 3> act{};
    int na = 0;
    for (int i = 0; i < d; ++i) {
        if (ctx.point_mass[i]) {
            c -= a[i];
        } else if (a[i] != 0) {
            act[na++] = {a[i] > 0 ? &ctx.tail_pos[i] : &ctx.tail_neg[i], std::abs(a[i])};
        }
    }
    if (ctx.point_mass[d]) {
        c -= a[d];
    } else if (a[d] != 0) {
        // u in [0,1], a u = a/2 + (a/2) s
        c -= 0.5 * a[d];
        act[na++] = {&ctx.tail_half[d], 0.5 * a[d]};
    }
    return detail::cap_probability(ctx, act, na, c);
}

// prod_{j<=d+1} theta^{2 kappa_j}/(|x_j|+theta)^{2 kappa_j} on d_B(|x|,|y|) <= theta,
// with x_{d+1} = sqrt(1 - |x|^2).
inline double ball_cap_bound(const IntertwineContext& ctx, const Vec3& x, double theta, const Vec3& y)
{
    const int d = ctx.dim();
    if (ball_distance(d, abs_coords(x), abs_coords(y)) > theta) {
        return 0;
    }
    Vec3 X = lift_to_sphere(d, x);
    double p = 1;
    for (int j = 0; j <= d; ++j) {
        double k = ctx.kappa[j];
        if (k != 0) p *= std::pow(theta / (std::abs(X[j]) + theta), 2 * k);
    }
    return p;
}

} // namespace dunkl

#endif
