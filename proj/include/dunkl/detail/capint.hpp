#ifndef DUNKL_DETAIL_CAPINT_HPP
#define DUNKL_DETAIL_CAPINT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "../geometry.hpp"
#include "quadrature.hpp"

namespace dunkl {

// A circle {y : <w,y> = c} on the sphere along which the integrand is not
// smooth. Coordinate hyperplanes carry the weight exponent 2 tau_i and their
// coordinate index; other circles (cap boundaries, kink loci) have exponent 0.
// order is the power s of the one-sided behaviour |<w,y> - c|^s of the
// integrand across the circle (0 for a jump).
struct BreakCircle {
    Vec3 w{};
    double c = 0;
    double exponent = 0;
    int coord = -1;
    double order = 0;
};

struct CapRule {
    int m = 16;               // Gauss-Jacobi nodes per piece
    double ts_h = 0.25;       // tanh-sinh step in the radial direction (d = 2)
    std::array<int, 3> sign{0, 0, 0};  // required coordinate signs, 0 = any
    // Radial cuts are placed at tangencies and crossings of circles whose
    // combined order is below this.
    double smooth_order = 3;
    // Hoelder order of the integrand at the cap edge (d = 1 grades towards it).
    double edge_order = 0;
};

namespace detail {

constexpr double kTwoPi = 2 * std::numbers::pi;

inline double wrap_2pi(double a)
{
    a = std::fmod(a, kTwoPi);
    return a < 0 ? a + kTwoPi : a;
}

inline std::vector<BreakCircle> weight_circles(int d, const std::vector<double>& tau, const CapRule& rule,
                                               const std::vector<BreakCircle>& extra)
{
    std::vector<BreakCircle> out;
    for (int i = 0; i <= d; ++i) {
        if (tau[i] != 0 || rule.sign[i] != 0) {
            BreakCircle b;
            b.w = {0, 0, 0};
            b.w[i] = 1;
            b.c = 0;
            b.exponent = 2 * tau[i];
            b.coord = i;
            b.order = rule.sign[i] != 0 ? 0.0 : 2 * tau[i];
            out.push_back(b);
        }
    }
    for (const auto& e : extra) out.push_back(e);
    return out;
}

// |a|^e, with a node rounded onto a singular plane carrying no mass.
inline double plane_power(double a, double e)
{
    a = std::abs(a);
    return a == 0 && e < 0 ? 0.0 : std::pow(a, e);
}

inline bool sign_ok(const Vec3& y, const CapRule& rule, int d)
{
    for (int i = 0; i <= d; ++i) {
        if (rule.sign[i] > 0 && !(y[i] > 0)) return false;
        if (rule.sign[i] < 0 && !(y[i] < 0)) return false;
    }
    return true;
}

// Relative scale down to which pieces are graded toward an end lying on a
// circle of non-integer order s that is not absorbed into the Jacobi weight;
// the ungraded first piece then contributes about scale^{s+1}.
inline double end_grading(double exponent, double order)
{
    if (exponent != 0 || !(order > 0) || order == std::floor(order)) return kInf;
    return std::pow(1e-11, 1 / (order + 1));
}

struct ArcBreak {
    double pos;   // angle
    int circle;   // index into the circle list
    double u;     // angle relative to the circle's phase (crossings)
    double delta; // imaginary distance of a near miss, or +inf
    bool crossing;
};

// d = 1: nodes on the arc [phi0 - theta, phi0 + theta].
template <class Emit>
void cap_nodes_d1(const std::vector<double>& tau, const Vec3& x, double theta, const std::vector<BreakCircle>& circles,
                  const CapRule& rule, Emit&& emit)
{
    const double phi0 = std::atan2(x[1], x[0]);
    const double A = phi0 - theta;
    const double span = 2 * theta;
    const bool full = theta >= std::numbers::pi;
    struct P {
        double xi;  // offset from A in [0, 2 pi)
        double exponent;
        int coord;
        double order = 0;
    };
    std::vector<P> all;
    for (const auto& bc : circles) {
        double pw = std::atan2(bc.w[1], bc.w[0]);
        double r = std::hypot(bc.w[0], bc.w[1]);
        if (r == 0 || std::abs(bc.c / r) > 1) continue;
        double ac = std::acos(bc.c / r);
        for (double s : {pw + ac, pw - ac}) {
            all.push_back({wrap_2pi(s - A), bc.exponent, bc.coord, bc.order});
        }
        if (ac == 0 || ac == std::numbers::pi) all.pop_back();
    }
    const double tol = 1e-14;
    std::vector<P> inner;
    P start{0.0, 0.0, -1, rule.edge_order}, end{span, 0.0, -1, rule.edge_order};
    for (const auto& p : all) {
        double xi = p.xi;
        if (xi < tol || kTwoPi - xi < tol) {
            start = {0.0, p.exponent, p.coord, p.order};
            if (full) end = {span, p.exponent, p.coord, p.order};
            continue;
        }
        if (std::abs(xi - span) < tol) {
            end = {span, p.exponent, p.coord, p.order};
            continue;
        }
        if (xi < span) inner.push_back(p);
    }
    std::sort(inner.begin(), inner.end(), [](const P& a, const P& b) { return a.xi < b.xi; });
    // Distance from an offset back (forward) to the nearest break strictly before (after) it.
    auto back = [&](double xi) {
        double best = kInf;
        for (const auto& p : all) {
            double dd = wrap_2pi(xi - p.xi);
            if (dd > tol && dd < best) best = dd;
        }
        return best;
    };
    auto fwd = [&](double xi) {
        double best = kInf;
        for (const auto& p : all) {
            double dd = wrap_2pi(p.xi - xi);
            if (dd > tol && dd < best) best = dd;
        }
        return best;
    };
    std::vector<P> ends;
    ends.push_back(start);
    for (const auto& p : inner) ends.push_back(p);
    ends.push_back(end);
    for (std::size_t k = 0; k + 1 < ends.size(); ++k) {
        const P& a = ends[k];
        const P& b = ends[k + 1];
        double len = b.xi - a.xi;
        if (!(len > 0)) continue;
        double mid = A + a.xi + 0.5 * len;
        Vec3 ym{std::cos(mid), std::sin(mid), 0.0};
        if (!sign_ok(ym, rule, 1)) continue;
        double sL = std::min(back(a.xi), end_grading(a.exponent, a.order) * len);
        double sU = std::min(fwd(b.xi), end_grading(b.exponent, b.order) * len);
        graded_segment(A + a.xi, len, a.exponent, b.exponent, sL, sU, rule.m,
                       [&](double phi, double dl, double du, double w) {
                           Vec3 y{std::cos(phi), std::sin(phi), 0.0};
                           double f = 1;
                           for (int i = 0; i < 2; ++i) {
                               if (tau[i] == 0) continue;
                               double e = 2 * tau[i];
                               if (a.coord == i && b.coord == i) {
                                   // zeros at both ends, dl + du = pi
                                   f *= std::pow(std::sin(std::min(dl, du)) / (dl * du), e);
                               } else if (a.coord == i) {
                                   f *= std::pow(std::sin(dl) / dl, e);
                               } else if (b.coord == i) {
                                   f *= std::pow(std::sin(du) / du, e);
                               } else {
                                   f *= plane_power(y[i], e);
                               }
                           }
                           emit(y, w * f);
                       });
    }
}

inline void frame(const Vec3& x, Vec3& e1, Vec3& e2)
{
    int k = 0;
    for (int i = 1; i < 3; ++i) {
        if (std::abs(x[i]) < std::abs(x[k])) k = i;
    }
    Vec3 a{0, 0, 0};
    a[k] = 1;
    Vec3 c{x[1] * a[2] - x[2] * a[1], x[2] * a[0] - x[0] * a[2], x[0] * a[1] - x[1] * a[0]};
    e1 = normalized(c);
    e2 = {x[1] * e1[2] - x[2] * e1[1], x[2] * e1[0] - x[0] * e1[2], x[0] * e1[1] - x[1] * e1[0]};
}

// d = 2: polar coordinates (psi, phi) about x.
template <class Emit>
void cap_nodes_d2(const std::vector<double>& tau, const Vec3& x, double theta, const std::vector<BreakCircle>& circles,
                  const CapRule& rule, Emit&& emit)
{
    Vec3 e1, e2;
    frame(x, e1, e2);
    const std::size_t nc = circles.size();
    std::vector<double> p(nc), R(nc), ph(nc);
    std::vector<double> radii;
    for (std::size_t j = 0; j < nc; ++j) {
        const auto& bc = circles[j];
        p[j] = dot(bc.w, x);
        double q1 = dot(bc.w, e1), q2 = dot(bc.w, e2);
        R[j] = std::hypot(q1, q2);
        ph[j] = std::atan2(q2, q1);
        const double wn = norm(bc.w);
        double beta = std::acos(clamp_unit(p[j] / wn));
        double eps = std::acos(clamp_unit(bc.c / wn));
        double r1 = std::abs(beta - eps);
        double r2 = beta + eps;
        if (r2 > std::numbers::pi) r2 = kTwoPi - r2;
        if (bc.order >= rule.smooth_order) continue;
        for (double r : {r1, r2}) {
            if (r > 1e-14 && r < theta - 1e-14) radii.push_back(r);
        }
    }
    // Points where two circles meet also change the phi-structure.
    for (std::size_t j = 0; j < nc; ++j) {
        for (std::size_t k = j + 1; k < nc; ++k) {
            if (circles[j].order + circles[k].order >= rule.smooth_order) continue;
            const Vec3& w1 = circles[j].w;
            const Vec3& w2 = circles[k].w;
            double g11 = dot(w1, w1), g12 = dot(w1, w2), g22 = dot(w2, w2);
            double det = g11 * g22 - g12 * g12;
            if (!(det > 1e-14)) continue;
            double al = (circles[j].c * g22 - circles[k].c * g12) / det;
            double be = (circles[k].c * g11 - circles[j].c * g12) / det;
            Vec3 q{al * w1[0] + be * w2[0], al * w1[1] + be * w2[1], al * w1[2] + be * w2[2]};
            double rest = 1 - dot(q, q);
            if (rest < 0) continue;
            Vec3 nv{w1[1] * w2[2] - w1[2] * w2[1], w1[2] * w2[0] - w1[0] * w2[2], w1[0] * w2[1] - w1[1] * w2[0]};
            double t = std::sqrt(rest / dot(nv, nv));
            for (double s : {t, -t}) {
                Vec3 z{q[0] + s * nv[0], q[1] + s * nv[1], q[2] + s * nv[2]};
                double r = geodesic(x, normalized(z));
                if (r > 1e-14 && r < theta - 1e-14) radii.push_back(r);
            }
        }
    }
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    std::vector<double> psi_cuts;
    psi_cuts.push_back(0.0);
    for (double r : radii) psi_cuts.push_back(r);
    psi_cuts.push_back(theta);

    std::vector<ArcBreak> br;
    br.reserve(2 * nc);
    const int ntrap = 2 * rule.m;
    const double near_limit = 1.0;

    auto inner = [&](double psi, double wpsi) {
        const double cp = std::cos(psi), sp = std::sin(psi);
        br.clear();
        for (std::size_t j = 0; j < nc; ++j) {
            double amp = sp * R[j];
            if (amp < 1e-300) continue;
            double val = (circles[j].c - cp * p[j]) / amp;
            if (std::abs(val) < 1) {
                double ac = std::acos(val);
                br.push_back({wrap_2pi(ph[j] + ac), static_cast<int>(j), ac, kInf, true});
                br.push_back({wrap_2pi(ph[j] - ac), static_cast<int>(j), -ac, kInf, true});
            } else if (circles[j].exponent != 0) {
                double delta = std::acosh(std::abs(val));
                if (delta < near_limit) {
                    double pos = val > 0 ? ph[j] : ph[j] + std::numbers::pi;
                    br.push_back({wrap_2pi(pos), static_cast<int>(j), 0.0, delta, false});
                }
            }
        }
        auto point = [&](double phi) -> Vec3 {
            double c = std::cos(phi), s = std::sin(phi);
            return {cp * x[0] + sp * (c * e1[0] + s * e2[0]), cp * x[1] + sp * (c * e1[1] + s * e2[1]),
                    cp * x[2] + sp * (c * e1[2] + s * e2[2])};
        };
        const double wbase = wpsi * sp;
        if (br.empty()) {
            for (int k = 0; k < ntrap; ++k) {
                double phi = kTwoPi * k / ntrap;
                Vec3 y = point(phi);
                if (!sign_ok(y, rule, 2)) continue;
                double f = 1;
                for (int i = 0; i < 3; ++i) {
                    if (tau[i] != 0) f *= plane_power(y[i], 2 * tau[i]);
                }
                emit(y, wbase * f * kTwoPi / ntrap);
            }
            return;
        }
        std::sort(br.begin(), br.end(), [](const ArcBreak& a, const ArcBreak& b) { return a.pos < b.pos; });
        const std::size_t nb = br.size();
        for (std::size_t k = 0; k < nb; ++k) {
            const ArcBreak& a = br[k];
            const ArcBreak& b = br[(k + 1) % nb];
            double len = nb == 1 ? kTwoPi : wrap_2pi(b.pos - a.pos);
            if (nb > 1 && !(len > 0)) continue;
            Vec3 ym = point(a.pos + 0.5 * len);
            if (!sign_ok(ym, rule, 2)) continue;
            const BreakCircle& ca = circles[a.circle];
            const BreakCircle& cb = circles[b.circle];
            double eL = a.crossing ? ca.exponent : 0.0;
            double eU = b.crossing ? cb.exponent : 0.0;
            double prev = nb == 1 ? kTwoPi : wrap_2pi(a.pos - br[(k + nb - 1) % nb].pos);
            double next = nb == 1 ? kTwoPi : wrap_2pi(br[(k + 2) % nb].pos - b.pos);
            if (nb == 2) {
                prev = len < kTwoPi ? kTwoPi - len : kInf;
                next = prev;
            }
            double sL = a.crossing ? prev : std::min(prev, a.delta);
            double sU = b.crossing ? next : std::min(next, b.delta);
            if (prev == 0) sL = kInf;
            if (next == 0) sU = kInf;
            graded_segment(a.pos, len, eL, eU, sL, sU, rule.m, [&](double phi, double dl, double du, double w) {
                Vec3 y = point(phi);
                double f = 1;
                for (int i = 0; i < 3; ++i) {
                    if (tau[i] == 0) continue;
                    double e = 2 * tau[i];
                    const bool left = a.crossing && ca.coord == i;
                    const bool right = b.crossing && cb.coord == i;
                    if (!left && !right) {
                        f *= plane_power(y[i], e);
                        continue;
                    }
                    int j = left ? a.circle : b.circle;
                    double amp = 2 * sp * R[j];
                    double g;
                    if (left && right && a.circle == b.circle) {
                        g = amp * std::abs(std::sin(0.5 * dl)) * std::abs(std::sin(0.5 * du)) / (dl * du);
                    } else if (left) {
                        g = amp * std::abs(std::sin(a.u + 0.5 * dl)) * std::abs(std::sin(0.5 * dl)) / dl;
                    } else {
                        g = amp * std::abs(std::sin(b.u - 0.5 * du)) * std::abs(std::sin(0.5 * du)) / du;
                    }
                    f *= std::pow(g, e);
                }
                emit(y, wbase * w * f);
            });
        }
    };

    for (std::size_t k = 0; k + 1 < psi_cuts.size(); ++k) {
        double a = psi_cuts[k], b = psi_cuts[k + 1];
        if (!(b > a)) continue;
        tanh_sinh_segment(a, b, rule.ts_h, [&](double psi, double, double, double w) { inner(psi, w); });
    }
}

} // namespace detail

// Visit quadrature nodes y with weights w such that sum w F(y) approximates
// the integral of F(y) prod |y_i|^{2 tau_i} over the cap {<x,y> >= cos theta},
// restricted to the coordinate signs in rule.sign.
template <class Emit>
void cap_nodes(int d, const std::vector<double>& tau, const Vec3& x, double theta,
               const std::vector<BreakCircle>& extra, const CapRule& rule, Emit&& emit)
{
    check_dim(d);
    auto circles = detail::weight_circles(d, tau, rule, extra);
    if (d == 1) {
        detail::cap_nodes_d1(tau, x, theta, circles, rule, emit);
    } else {
        detail::cap_nodes_d2(tau, x, theta, circles, rule, emit);
    }
}

template <class F>
double integrate_cap(int d, const std::vector<double>& tau, const Vec3& x, double theta, F&& f,
                     const std::vector<BreakCircle>& extra = {}, const CapRule& rule = {})
{
    double acc = 0;
    cap_nodes(d, tau, x, theta, extra, rule, [&](const Vec3& y, double w) { acc += w * f(y); });
    return acc;
}

} // namespace dunkl

#endif
