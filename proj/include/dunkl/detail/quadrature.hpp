#ifndef DUNKL_DETAIL_QUADRATURE_HPP
#define DUNKL_DETAIL_QUADRATURE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>
#include <vector>

#include "../specfun.hpp"

namespace dunkl::detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

// x^e for a fixed exponent, with integer and half-integer exponents done by
// multiplication.
struct Power {
    double e = 0;
    int n = 0;
    bool half = false;
    bool general = false;

    explicit Power(double e_ = 0) : e(e_)
    {
        double t = 2 * e;
        if (t == std::round(t) && std::abs(e) <= 8) {
            long k = std::lround(t);
            half = (k % 2) != 0;
            n = static_cast<int>(half ? (k - 1) / 2 : k / 2);
        } else {
            general = true;
        }
    }

    double operator()(double x) const
    {
        if (general) return std::pow(x, e);
        double r = 1;
        int k = n < 0 ? -n : n;
        double b = x;
        while (k) {
            if (k & 1) r *= b;
            b *= b;
            k >>= 1;
        }
        if (n < 0) r = 1 / r;
        if (half) r *= std::sqrt(x);
        return r;
    }
};

// Process-wide cache of Gauss-Jacobi rules keyed by (m, alpha, beta). Entries
// are never erased, so returned references stay valid.
inline const JacobiRule& shared_rule(int m, double alpha, double beta)
{
    static std::mutex mu;
    static std::map<std::tuple<int, double, double>, std::unique_ptr<JacobiRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(m, alpha, beta);
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, std::make_unique<JacobiRule>(gauss_jacobi_rule(m, alpha, beta))).first;
    }
    return *it->second;
}

// Per-thread front of shared_rule without locking.
inline const JacobiRule& cached_rule(int m, double alpha, double beta)
{
    struct Entry {
        int m;
        double a, b;
        const JacobiRule* r;
    };
    thread_local std::vector<Entry> local;
    for (const Entry& e : local) {
        if (e.m == m && e.a == alpha && e.b == beta) return *e.r;
    }
    const JacobiRule& r = shared_rule(m, alpha, beta);
    local.push_back({m, alpha, beta, &r});
    return r;
}

// Fixed-step tanh-sinh rule on [-1,1]. dist holds 1 - |x| computed without
// cancellation.
struct TanhSinhRule {
    std::vector<double> x;
    std::vector<double> w;
    std::vector<double> dist;
};

inline TanhSinhRule make_tanh_sinh(double h, double kmax = 2.8)
{
    TanhSinhRule r;
    const double hp = 0.5 * std::numbers::pi;
    int K = static_cast<int>(std::floor(kmax / h));
    for (int k = -K; k <= K; ++k) {
        double t = k * h;
        double u = hp * std::sinh(t);
        double ch = std::cosh(u);
        double w = h * hp * std::cosh(t) / (ch * ch);
        double d = 2.0 / (std::exp(2 * std::abs(u)) + 1.0);
        r.x.push_back(std::tanh(u));
        r.w.push_back(w);
        r.dist.push_back(d);
    }
    return r;
}

inline const TanhSinhRule& cached_tanh_sinh(double h)
{
    static std::mutex mu;
    static std::map<double, std::unique_ptr<TanhSinhRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(h);
    if (it == cache.end()) {
        it = cache.emplace(h, std::make_unique<TanhSinhRule>(make_tanh_sinh(h))).first;
    }
    return *it->second;
}

// Visit tanh-sinh nodes on [a,b]: emit(s, s - a, b - s, weight).
template <class Emit>
void tanh_sinh_segment(double a, double b, double h, Emit&& emit)
{
    const TanhSinhRule& r = cached_tanh_sinh(h);
    const double half = 0.5 * (b - a);
    for (std::size_t k = 0; k < r.x.size(); ++k) {
        double dl, du;
        if (r.x[k] < 0) {
            dl = half * r.dist[k];
            du = (b - a) - dl;
        } else {
            du = half * r.dist[k];
            dl = (b - a) - du;
        }
        emit(a + dl, dl, du, half * r.w[k]);
    }
}

// Smallest graded piece, relative to the segment length.
constexpr double kGradeFloor = 1e-6;

// Visit the nodes of a composite Gauss-Jacobi rule for the weight
// (s-L)^eL (U-s)^eU on [L, L+len]. The length is passed separately so that
// short segments near +-1 keep full relative precision. sL and sU are the
// distances from the two ends to the nearest singularity of the remaining
// factor lying outside the segment; when one is short compared with the
// segment, sub-segments are graded geometrically toward that end; each piece
// is at most twice as long as its distance to the singularity.
// emit(s, s-L, U-s, weight) receives weights that already contain the end
// factors.
template <class Emit>
void graded_segment(double L, double len, double eL, double eU, double sL, double sU, int m, Emit&& emit)
{
    if (!(len > 0)) {
        return;
    }
    // A singular point sitting on the end itself cannot be graded toward.
    const double tiny = kGradeFloor * len;
    const bool gl = sL < 0.5 * len && sL > tiny;
    const bool gu = sU < 0.5 * len && sU > tiny;
    const double mid = (gl && gu) ? 0.5 * len : len;
    // Offsets from L of the sub-segment ends.
    std::array<double, 160> cuts;
    std::size_t nc = 0;
    cuts[nc++] = 0.0;
    if (gl) {
        double lim = gu ? mid : len;
        for (double q = sL; q < lim * 0.5; q = 2 * q + sL) cuts[nc++] = q;
    }
    if (gl && gu) cuts[nc++] = mid;
    if (gu) {
        double lim = gl ? len - mid : len;
        std::size_t first = nc;
        for (double q = sU; q < lim * 0.5; q = 2 * q + sU) cuts[nc++] = len - q;
        std::reverse(cuts.begin() + first, cuts.begin() + nc);
        // drop cuts that do not increase
        std::size_t w = first;
        for (std::size_t k = first; k < nc; ++k) {
            if (cuts[k] > cuts[w - 1]) cuts[w++] = cuts[k];
        }
        nc = w;
    }
    cuts[nc++] = len;
    for (std::size_t p = 0; p + 1 < nc; ++p) {
        double a = cuts[p];
        double b = cuts[p + 1];
        if (!(b > a)) continue;
        const bool atL = (p == 0);
        const bool atU = (p + 2 == nc);
        const double ea = atL ? eL : 0.0;
        const double eb = atU ? eU : 0.0;
        const JacobiRule& r = cached_rule(m, eb, ea);
        const double h = 0.5 * (b - a);
        const double scale = std::pow(h, 1 + ea + eb);
        const Power pL(eL), pU(eU);
        for (std::size_t k = 0; k < r.size(); ++k) {
            double t = r.nodes[k];
            double dl = a + h * (1 + t);
            double du = (len - b) + h * (1 - t);
            double w = r.weights[k] * scale;
            if (!atL && eL != 0) w *= pL(dl);
            if (!atU && eU != 0) w *= pU(du);
            emit(L + dl, dl, du, w);
        }
    }
}

} // namespace dunkl::detail

#endif
