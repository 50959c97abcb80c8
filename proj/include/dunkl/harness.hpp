#ifndef DUNKL_HARNESS_HPP
#define DUNKL_HARNESS_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <json.hpp>

#include "expansion.hpp"
#include "geometry.hpp"
#include "intertwine.hpp"
#include "maximal.hpp"
#include "specfun.hpp"
#include "weights.hpp"

namespace dunkl::harness {

using json = nlohmann::ordered_json;

// Invalid configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OutputSpec {
    std::string path;  // empty: no file
    std::string format = "json";
};

// Optional fields fall back to the defaults of the experiment.
struct ExperimentConfig {
    std::string experiment;
    std::optional<int> dimension;
    std::optional<std::vector<double>> kappa;
    std::optional<std::vector<double>> tau;
    std::optional<int> grid_exactness;
    std::optional<int> theta_count;
    std::optional<double> p;
    std::optional<double> delta;
    std::uint64_t seed = 1;
    OutputSpec output;
    bool allow_small_delta = false;  // command line only
};

// Configuration after defaults are filled in; this is what results echo.
struct Resolved {
    int d = 1;
    std::vector<double> kappa;
    std::vector<double> tau;
    int grid = 0;
    int thetas = 0;
    double p = 2;
    bool p_given = false;
    bool tau_given = false;
    double delta = 0;
    std::uint64_t seed = 1;
    bool allow_small_delta = false;
};

struct ExperimentResult {
    std::string name;
    std::string anchor;
    Resolved config;
    std::vector<std::pair<std::string, double>> observed;
    bool pass = false;
    std::vector<double> refinement_trace;  // primary statistic at two grid levels
    std::string trace_label;
    std::vector<std::string> warnings;
    std::string error;  // numerical failure message, empty when none
    double runtime_ms = 0;

    double& observe(const std::string& key, double v)
    {
        observed.emplace_back(key, v);
        return observed.back().second;
    }
    double value(const std::string& key) const
    {
        for (const auto& kv : observed) {
            if (kv.first == key) return kv.second;
        }
        throw std::out_of_range("no observed statistic " + key);
    }
};

// ---- small helpers ----

namespace detail {

inline Vec3 random_sphere_point(int d, std::mt19937_64& rng)
{
    std::normal_distribution<double> N(0.0, 1.0);
    for (;;) {
        Vec3 x{N(rng), N(rng), d == 2 ? N(rng) : 0.0};
        if (norm(x) > 1e-8) return normalized(x);
    }
}

// Random sphere point whose coordinate i has modulus about eps.
inline Vec3 near_plane_point(int d, int i, double eps, std::mt19937_64& rng)
{
    Vec3 x = random_sphere_point(d, rng);
    std::uniform_real_distribution<double> U(0.5, 1.5);
    x[i] = (x[i] < 0 ? -1 : 1) * eps * U(rng);
    double rest = 0;
    for (int j = 0; j <= d; ++j) {
        if (j != i) rest += x[j] * x[j];
    }
    double s = std::sqrt((1 - x[i] * x[i]) / rest);
    for (int j = 0; j <= d; ++j) {
        if (j != i) x[j] *= s;
    }
    return x;
}

inline double log_uniform(double lo, double hi, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> U(0.0, 1.0);
    return lo * std::exp(std::log(hi / lo) * U(rng));
}

// Random point of the cap of angle theta around the sphere point x.
inline Vec3 random_in_cap(int d, const Vec3& x, double theta, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> U(0.0, 1.0);
    if (d == 1) {
        double a = std::atan2(x[1], x[0]) + theta * (2 * U(rng) - 1);
        return {std::cos(a), std::sin(a), 0.0};
    }
    Vec3 e1, e2;
    dunkl::detail::frame(x, e1, e2);
    double psi = theta * std::sqrt(U(rng));
    double phi = 2 * std::numbers::pi * U(rng);
    Vec3 y;
    for (int i = 0; i < 3; ++i) {
        y[i] = std::cos(psi) * x[i] + std::sin(psi) * (std::cos(phi) * e1[i] + std::sin(phi) * e2[i]);
    }
    return normalized(y);
}

inline Vec3 random_signs(int n, const Vec3& x, std::mt19937_64& rng)
{
    Vec3 y = x;
    for (int i = 0; i < n; ++i) {
        if (rng() & 1) y[i] = -y[i];
    }
    return y;
}

inline double rel_change(double a, double b) { return std::abs(b / a - 1); }

inline bool finite_positive(double v) { return std::isfinite(v) && v > 0; }

// Orthonormal polynomials of a one-dimensional measure from its moments, by
// Cholesky factorization of the Hankel Gram matrix in long double.
class MomentGramSchmidt {
public:
    MomentGramSchmidt(int degree, std::function<long double(int)> moment) : D_(degree), moment_(std::move(moment))
    {
        const int n = D_ + 1;
        std::vector<long double> G(n * n), L(n * n, 0.0L);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) G[i * n + j] = moment_(i + j);
        }
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j <= i; ++j) {
                long double s = G[i * n + j];
                for (int k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
                if (i == j) {
                    if (!(s > 0)) throw std::runtime_error("gram-schmidt: moment matrix not positive");
                    L[i * n + i] = std::sqrt(s);
                } else {
                    L[i * n + j] = s / L[j * n + j];
                }
            }
        }
        // Rows of L^{-1} are the monomial coefficients of p_0..p_D.
        C_.assign(n * n, 0.0L);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j <= i; ++j) {
                long double s = i == j ? 1.0L : 0.0L;
                for (int k = j; k < i; ++k) s -= L[i * n + k] * C_[k * n + j];
                C_[i * n + j] = s / L[i * n + i];
            }
        }
    }

    // proj_n f(x) for f = sum_k c_k x^k.
    long double project(int n, const std::vector<double>& c, long double x) const
    {
        const int m = D_ + 1;
        long double inner = 0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            for (int l = 0; l <= n; ++l) inner += c[k] * C_[n * m + l] * moment_(static_cast<int>(k) + l);
        }
        long double p = 0, xl = 1;
        for (int l = 0; l <= n; ++l) {
            p += C_[n * m + l] * xl;
            xl *= x;
        }
        return inner * p;
    }

private:
    int D_;
    std::function<long double(int)> moment_;
    std::vector<long double> C_;
};

inline double poly_eval(const std::vector<double>& c, double x)
{
    double s = 0;
    for (std::size_t k = c.size(); k-- > 0;) s = s * x + c[k];
    return s;
}

inline std::vector<double> random_coefficients(int deg, std::mt19937_64& rng)
{
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<double> c(deg + 1);
    for (int k = 0; k <= deg; ++k) c[k] = N(rng) / (1 + k);
    return c;
}

inline std::vector<PointFunction> random_family(const std::shared_ptr<const HarmonicSpace>& sp, int count, int deg,
                                                std::mt19937_64& rng, bool mean_zero = false)
{
    std::vector<PointFunction> fs;
    for (int j = 0; j < count; ++j) {
        auto dec = std::make_shared<DegreeDecomposition>(random_polynomial(sp, deg, rng, mean_zero));
        fs.push_back([dec](const Vec3& y) { return dec->eval(y); });
    }
    return fs;
}

inline MaximalOptions maximal_options(const Resolved& c, int rule_m = 8)
{
    MaximalOptions o;
    o.thetas = theta_grid(std::numbers::pi / 64, c.thetas);
    o.rule_m = rule_m;
    return o;
}

} // namespace detail

// ---- experiments ----

using RunFn = std::function<void(const Resolved&, ExperimentResult&)>;

struct Experiment {
    std::string name;
    std::string anchor;
    std::vector<int> dims;                // admissible dimensions
    std::vector<double> kappa1, kappa2;   // default kappa for d = 1, 2
    std::vector<double> tau1, tau2;       // default tau; empty means tau = kappa
    int grid1 = 0, grid2 = 0;             // default grid exactness for d = 1, 2
    int thetas = 24;
    double p = 2;
    RunFn run;
    int thetas2 = 0;  // default theta count for d = 2; 0 means thetas
};

namespace experiments {

using detail::rel_change;

inline void denominator_identity_run(const Resolved& c, ExperimentResult& r)
{
    auto mk = make_multiplicity(c.kappa);
    auto ctx = make_intertwine_context(mk, 40, c.d == 1 ? 8 : 5);
    const double ak = a_kappa(mk);
    CapRule fine = denominator_rule(mk);
    fine.m = c.grid;
    CapRule coarse = fine;
    coarse.m = std::max(2, c.grid - 4);
    std::mt19937_64 rng(c.seed);
    double worst = 0, worst_coarse = 0;
    const int K = c.thetas;
    for (int k = 0; k < 10; ++k) {
        Vec3 x = detail::random_sphere_point(c.d, rng);
        for (int j = 0; j < K; ++j) {
            double th = std::numbers::pi * std::pow(2.0, -(K - 1 - j) * 0.6);
            worst = std::max(worst, denominator_identity(ctx, x, th, ak, fine).rel);
            if (k < 3) worst_coarse = std::max(worst_coarse, denominator_identity(ctx, x, th, ak, coarse).rel);
        }
    }
    r.observe("max_rel_error", worst);
    r.observe("centers", 10);
    r.observe("angles", K);
    r.observe("theta_min", std::numbers::pi * std::pow(2.0, -(K - 1) * 0.6));
    r.trace_label = "max_rel_error at cap rule m-4 (first 3 centers) and m";
    r.refinement_trace = {worst_coarse, worst};
    r.pass = worst < 1e-5;
}

inline void subordination_run(const Resolved& c, ExperimentResult& r)
{
    auto mk = make_multiplicity(c.kappa);
    const double lam = mk.lambda_kappa;
    double scalar = 0, mass = 0;
    for (double t : {0.1, 1.0, 5.0}) {
        mass = std::max(mass, std::abs(subordinated_exponential(lam, t, 0) - 1));
        for (int n = 0; n <= 10; ++n) {
            scalar = std::max(scalar, std::abs(subordinated_exponential(lam, t, n) - std::exp(-n * t)));
        }
    }
    auto op_error = [&](int extra) {
        auto sp = make_harmonic_space(mk, c.grid, extra);
        std::mt19937_64 rng(c.seed);
        DegreeDecomposition f = random_polynomial(sp, c.grid, rng);
        double sup = 0;
        for (double v : f.grid_values()) sup = std::max(sup, std::abs(v));
        double e = 0;
        for (int k = 0; k < 20; ++k) {
            Vec3 x = detail::random_sphere_point(c.d, rng);
            for (double t : {0.1, 1.0, 5.0}) {
                e = std::max(e, std::abs(poisson(f, std::exp(-t)).eval(x) - subordinated_heat(f, t, x)) / sup);
            }
        }
        return e;
    };
    double op = op_error(0);
    double op2 = op_error(4);
    r.observe("scalar_max_abs_error", scalar);
    r.observe("mass_max_abs_error", mass);
    r.observe("operator_max_rel_error", op);
    r.observe("polynomial_degree", c.grid);
    r.trace_label = "operator_max_rel_error on grids of exactness 2N and 2N+4";
    r.refinement_trace = {op, op2};
    r.pass = scalar < 1e-8 && mass < 1e-8 && op < 1e-5 && op2 < 1e-5;
}

inline void semigroup_run(const Resolved& c, ExperimentResult& r)
{
    auto mk = make_multiplicity(c.kappa);
    const int N = c.grid;
    auto laws = [&](int extra, double& pe, double& he) {
        auto sp = make_harmonic_space(mk, N, extra);
        std::mt19937_64 rng(c.seed);
        DegreeDecomposition f = random_polynomial(sp, N, rng);
        auto fv = f.grid_values();
        double sup = 0;
        for (double v : fv) sup = std::max(sup, std::abs(v));
        pe = he = 0;
        const std::pair<double, double> rs[] = {{0.3, 0.7}, {0.5, 0.9}, {0.95, 0.8}};
        for (auto [r1, r2] : rs) {
            auto a = poisson(poisson(f, r2), r1).grid_values();
            auto b = poisson(f, r1 * r2).grid_values();
            for (std::size_t k = 0; k < a.size(); ++k) pe = std::max(pe, std::abs(a[k] - b[k]) / sup);
        }
        const std::pair<double, double> ts[] = {{0.05, 0.2}, {0.1, 0.5}, {0.01, 0.02}};
        for (auto [s, t] : ts) {
            auto a = heat(heat(f, t, N), s, N).grid_values();
            auto b = heat(f, s + t, N).grid_values();
            for (std::size_t k = 0; k < a.size(); ++k) he = std::max(he, std::abs(a[k] - b[k]) / sup);
        }
        return sp;
    };
    double pe, he, pe2, he2;
    auto sp = laws(0, pe, he);
    laws(4, pe2, he2);
    // Closed-form kernel against the expansion; the grid absorbs the r^n tail.
    auto ctx = make_intertwine_context(mk, 24);
    auto wide = make_harmonic_space(mk, N, 32);
    std::mt19937_64 rng(c.seed + 1);
    DegreeDecomposition f = random_polynomial(wide, N, rng);
    auto fv = f.grid_values();
    double kernel_route = 0;
    for (int k = 0; k < 3; ++k) {
        Vec3 x = detail::random_sphere_point(c.d, rng);
        for (double rr : {0.3, 0.5}) {
            double a = poisson(f, rr).eval(x);
            double b = poisson_convolve(ctx, *wide, fv, rr, x);
            kernel_route = std::max(kernel_route, std::abs(a - b) / std::max(1.0, std::abs(a)));
        }
    }
    // Positivity on f = g^2.
    auto sp4 = make_harmonic_space(mk, N / 2);
    DegreeDecomposition g = random_polynomial(sp4, N / 2, rng);
    DegreeDecomposition sq = project(
        sp, [&](const Vec3& y) { double v = g.eval(y); return v * v; }, 2 * (N / 2));
    double fmax = 0;
    for (double v : sq.grid_values()) fmax = std::max(fmax, v);
    double pos = std::numeric_limits<double>::infinity();
    std::vector<Vec3> samples;
    for (int k = 0; k < 10000; ++k) samples.push_back(detail::random_sphere_point(c.d, rng));
    for (double rr : {0.5, 0.9}) {
        DegreeDecomposition pr = poisson(sq, rr);
        for (const Vec3& x : samples) pos = std::min(pos, pr.eval(x) / fmax);
    }
    double heat_min = std::numeric_limits<double>::infinity();
    for (double t : {0.05, 0.1, 0.5}) {
        int M = heat_truncation(mk.lambda_kappa, t);
        for (int k = 0; k <= 2000; ++k) heat_min = std::min(heat_min, heat_kernel(mk.lambda_kappa, t, -1 + k / 1000.0, M));
    }
    r.observe("poisson_semigroup_error", pe);
    r.observe("heat_semigroup_error", he);
    r.observe("poisson_kernel_route_error", kernel_route);
    r.observe("poisson_positivity_min", pos);
    r.observe("positivity_samples", 2 * samples.size());
    r.observe("heat_kernel_min", heat_min);
    r.trace_label = "max(poisson, heat) semigroup error on grids of exactness 2N and 2N+4";
    r.refinement_trace = {std::max(pe, he), std::max(pe2, he2)};
    r.pass = pe < 1e-8 && he < 1e-8 && pe2 < 1e-8 && he2 < 1e-8 && kernel_route < 1e-6 && pos >= -1e-12 &&
             heat_min >= -1e-8;
}

inline void kernel_trace_run(const Resolved& c, ExperimentResult& r)
{
    auto mk = make_multiplicity(c.kappa);
    auto ctx = make_intertwine_context(mk, std::max(8, c.grid + 2));
    const double ak = a_kappa(mk);
    auto worst_at = [&](int extra, bool record) {
        double worst = 0;
        for (int n = 0; n <= c.grid; ++n) {
            QuadratureGrid g = weighted_sphere_grid_for_degree(c.d, mk.kappa, 2 * n + extra);
            double s = 0;
            for (std::size_t k = 0; k < g.size(); ++k) {
                s += g.weights[k] * reproducing_kernel(ctx, n, g.points[k], g.points[k]);
            }
            double tr = ak * s;
            double dim = static_cast<double>(harmonic_dimension(c.d, n));
            if (record) {
                r.observe("trace_n" + std::to_string(n), tr);
                r.observe("dim_n" + std::to_string(n), dim);
            }
            worst = std::max(worst, std::abs(tr / dim - 1));
        }
        return worst;
    };
    double w0 = worst_at(0, true);
    double w1 = worst_at(4, false);
    r.observe("max_rel_error", w0);
    r.trace_label = "max_rel_error on grids of exactness 2n and 2n+4";
    r.refinement_trace = {w0, w1};
    r.pass = w0 < 1e-4 && w1 < 1e-4;
}

// Ratio sweep of a cap transform against its closed-form majorant.
template <class Transform, class Bound, class Sampler>
double majorant_sweep(const MultiplicityVector& mk, int m, int cap_m, std::uint64_t seed, int samples, Transform&& tr,
                      Bound&& bound, Sampler&& sampler, int& used)
{
    auto ctx = make_intertwine_context(mk, m, cap_m);
    std::mt19937_64 rng(seed);
    double C = 0;
    used = 0;
    for (int k = 0; k < samples; ++k) {
        Vec3 x, y;
        double th;
        sampler(rng, x, y, th);
        double b = bound(ctx, x, th, y);
        if (!(b > 0)) continue;
        C = std::max(C, tr(ctx, x, th, y) / b);
        ++used;
    }
    return C;
}

inline void lemma2_run(const Resolved& c, ExperimentResult& r)
{
    auto mk = make_multiplicity(c.kappa);
    const int d = c.d;
    auto sampler = [d](std::mt19937_64& rng, Vec3& x, Vec3& y, double& th) {
        std::uniform_int_distribution<int> pick(0, 2 * d + 1);
        int mode = pick(rng);
        x = mode <= d ? detail::near_plane_point(d, mode, 1e-3, rng) : detail::random_sphere_point(d, rng);
        th = detail::log_uniform(std::numbers::pi / 256, std::numbers::pi, rng);
        Vec3 z = detail::random_in_cap(d, abs_coords(x), th, rng);
        y = detail::random_signs(d + 1, abs_coords(z), rng);
    };
    auto tr = [](const IntertwineContext& ctx, const Vec3& x, double th, const Vec3& y) {
        return intertwine_cap(ctx, x, th, y);
    };
    auto bd = [](const IntertwineContext& ctx, const Vec3& x, double th, const Vec3& y) {
        return lemma2_bound(ctx, x, th, y);
    };
    int used = 0, used2 = 0;
    const int S = 500;
    double C1 = majorant_sweep(mk, 40, c.grid, c.seed, S, tr, bd, sampler, used);
    double C2 = majorant_sweep(mk, 80, 2 * c.grid, c.seed, S, tr, bd, sampler, used2);
    r.observe("C_obs", C1);
    r.observe("C_obs_refined", C2);
    r.observe("samples", used);
    r.observe("growth", rel_change(C1, C2));
    r.trace_label = "C_obs with (m, cap_m) and (2m, 2cap_m) nodes";
    r.refinement_trace = {C1, C2};
    r.pass = detail::finite_positive(C1) && std::isfinite(C2) && rel_change(C1, C2) < 0.25;
}

inline void ball_bound_run(const Resolved& c, ExperimentResult& r)
{
    auto mk = make_multiplicity(c.kappa);
    const int d = c.d;
    auto sampler = [d](std::mt19937_64& rng, Vec3& x, Vec3& y, double& th) {
        std::uniform_int_distribution<int> pick(0, 2 * d + 2);
        int mode = pick(rng);
        Vec3 X = mode <= d ? detail::near_plane_point(d, mode, 1e-3, rng) : detail::random_sphere_point(d, rng);
        X[d] = std::abs(X[d]);
        x = X;
        x[d] = 0;
        th = detail::log_uniform(std::numbers::pi / 256, std::numbers::pi, rng);
        Vec3 z = abs_coords(detail::random_in_cap(d, abs_coords(X), th, rng));
        y = detail::random_signs(d, z, rng);
        y[d] = 0;
    };
    auto tr = [](const IntertwineContext& ctx, const Vec3& x, double th, const Vec3& y) {
        return intertwine_cap_ball(ctx, x, th, y);
    };
    auto bd = [](const IntertwineContext& ctx, const Vec3& x, double th, const Vec3& y) {
        return ball_cap_bound(ctx, x, th, y);
    };
    int used = 0, used2 = 0;
    double C1 = majorant_sweep(mk, 40, c.grid, c.seed, 500, tr, bd, sampler, used);
    double C2 = majorant_sweep(mk, 80, 2 * c.grid, c.seed, 500, tr, bd, sampler, used2);
    r.observe("C_obs", C1);
    r.observe("C_obs_refined", C2);
    r.observe("samples", used);
    r.observe("growth", rel_change(C1, C2));
    r.trace_label = "C_obs with (m, cap_m) and (2m, 2cap_m) nodes";
    r.refinement_trace = {C1, C2};
    r.pass = detail::finite_positive(C1) && std::isfinite(C2) && rel_change(C1, C2) < 0.25;
}

struct RatioRange {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0;
    void add(double v)
    {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double C() const { return std::max(hi, 1 / lo); }
};

inline void lemma3_run(const Resolved& c, ExperimentResult& r)
{
    const int d = c.d;
    WeightSpec spec = make_weight_spec(Domain::sphere, c.tau);
    auto sweep = [&](int m, RatioRange& meas, RatioRange& dens, double& doubling) {
        std::mt19937_64 rng(c.seed);
        doubling = 0;
        for (int k = 0; k < 200; ++k) {
            std::uniform_int_distribution<int> pick(0, 2 * d + 1);
            int mode = pick(rng);
            Vec3 x = mode <= d ? detail::near_plane_point(d, mode, detail::log_uniform(1e-4, 1e-2, rng), rng)
                               : detail::random_sphere_point(d, rng);
            double th = detail::log_uniform(std::numbers::pi / 128, std::numbers::pi, rng);
            double cm = cap_measure(spec, x, th, m);
            meas.add(cm / lemma3_comparand(spec, x, th, Convention::measure));
            dens.add(cap_measure_density_power(d, c.tau, x, th, m) /
                     lemma3_comparand(spec, x, th, Convention::density_power));
            if (th <= std::numbers::pi / 2) doubling = std::max(doubling, cap_measure(spec, x, 2 * th, m) / cm);
        }
    };
    RatioRange m1, d1, m2, d2;
    double dbl1, dbl2;
    sweep(c.grid, m1, d1, dbl1);
    sweep(2 * c.grid, m2, d2, dbl2);
    r.observe("C_measure", m1.C());
    r.observe("ratio_min_measure", m1.lo);
    r.observe("ratio_max_measure", m1.hi);
    r.observe("C_density_power", d1.C());
    r.observe("ratio_min_density_power", d1.lo);
    r.observe("ratio_max_density_power", d1.hi);
    r.observe("doubling_constant", dbl1);
    r.observe("C_measure_refined", m2.C());
    r.observe("C_density_power_refined", d2.C());
    r.observe("samples", 200);
    r.trace_label = "C_measure with m and 2m cap nodes";
    r.refinement_trace = {m1.C(), m2.C()};
    r.pass = std::isfinite(m1.C()) && std::isfinite(d1.C()) && rel_change(m1.C(), m2.C()) < 0.25 &&
             rel_change(d1.C(), d2.C()) < 0.25 && std::isfinite(dbl1);
}

inline void lemma442_run(const Resolved& c, ExperimentResult& r)
{
    const int d = c.d;
    WeightSpec spec = make_weight_spec(Domain::ball, c.tau);
    auto sweep = [&](int m) {
        RatioRange rr;
        std::mt19937_64 rng(c.seed);
        for (int k = 0; k < 200; ++k) {
            std::uniform_int_distribution<int> pick(0, 2 * d + 2);
            int mode = pick(rng);
            // Lifted center; mode <= d puts it near a coordinate plane, mode = d
            // near the boundary of the ball.
            Vec3 X = mode <= d ? detail::near_plane_point(d, mode, detail::log_uniform(1e-4, 1e-2, rng), rng)
                               : detail::random_sphere_point(d, rng);
            Vec3 x = X;
            x[d] = 0;
            double th = detail::log_uniform(std::numbers::pi / 128, std::numbers::pi, rng);
            rr.add(cap_measure(spec, x, th, m) / lemma3_comparand(spec, x, th));
        }
        return rr;
    };
    RatioRange a = sweep(c.grid), b = sweep(2 * c.grid);
    r.observe("C_measure", a.C());
    r.observe("ratio_min", a.lo);
    r.observe("ratio_max", a.hi);
    r.observe("C_measure_refined", b.C());
    r.observe("samples", 200);
    r.trace_label = "C_measure with m and 2m cap nodes";
    r.refinement_trace = {a.C(), b.C()};
    r.pass = std::isfinite(a.C()) && rel_change(a.C(), b.C()) < 0.25;
}

// Test functions for the domination experiments on a d = 1 domain.
inline std::vector<std::pair<std::string, SphereIntegrand>> domination_family(Domain dom, const Resolved& c)
{
    std::vector<std::pair<std::string, SphereIntegrand>> fs;
    std::mt19937_64 rng(c.seed);
    auto coef = detail::random_coefficients(4, rng);
    switch (dom) {
    case Domain::sphere: {
        Vec3 b = normalized({0.8, 0.6, 0});
        fs.push_back({"zonal_bump", {[b](const Vec3& y) { return std::exp(4 * (dot(b, y) - 1)); }, {}, {}}});
        fs.push_back({"spike", spike_integrand(Domain::sphere, 1, normalized({0.9, 0.2, 0}), 0.1, 1.0)});
        fs.push_back({"random_poly", {[coef](const Vec3& y) { return std::abs(detail::poly_eval(coef, y[0]) + y[1]); },
                                      {}, {}}});
        break;
    }
    case Domain::ball:
        fs.push_back({"bump", lift_ball_function(1, [](const Vec3& x) { return std::exp(-4 * (x[0] - 0.5) * (x[0] - 0.5)); })});
        fs.push_back({"spike", spike_integrand(Domain::ball, 1, {0.3, 0, 0}, 0.1, 1.0)});
        fs.push_back({"random_poly", lift_ball_function(1, [coef](const Vec3& x) { return detail::poly_eval(coef, x[0]); })});
        break;
    default:
        fs.push_back({"bump", lift_simplex_function(1, [](const Vec3& u) { return std::exp(3 * u[0]); })});
        fs.push_back({"spike", spike_integrand(Domain::simplex, 1, {0.3, 0, 0}, 0.1, 1.0)});
        fs.push_back({"random_poly", lift_simplex_function(1, [coef](const Vec3& u) { return detail::poly_eval(coef, u[0]); })});
        break;
    }
    return fs;
}

inline std::vector<Vec3> domination_points(Domain dom, int count)
{
    std::vector<Vec3> pts;
    for (int k = 0; k < count; ++k) {
        double s = (k + 0.5) / count;
        switch (dom) {
        case Domain::sphere: {
            double a = 2 * std::numbers::pi * s;
            pts.push_back({std::cos(a), std::sin(a), 0});
            break;
        }
        case Domain::ball:
            pts.push_back({2 * s - 1, 0, 0});
            break;
        default:
            pts.push_back({s, 0, 0});
            break;
        }
    }
    return pts;
}

// max over functions and points of the domination ratio, at two rule levels.
inline std::pair<double, double> domination_constants(const Resolved& c, Domain dom, ExperimentResult& r,
                                                      const std::string& prefix, int points)
{
    auto mk = make_multiplicity(c.kappa);
    auto fs = domination_family(dom, c);
    auto pts = domination_points(dom, points);
    double C[2] = {0, 0};
    for (int level = 0; level < 2; ++level) {
        auto ctx = make_intertwine_context(mk, 40, level == 0 ? 8 : 16);
        MaximalOptions o = detail::maximal_options(c, level == 0 ? c.grid : 2 * c.grid);
        for (const auto& [name, F] : fs) {
            double q = domination_check(ctx, dom, F, pts, o).c_obs;
            if (level == 0) r.observe(prefix + "C_" + name, q);
            C[level] = std::max(C[level], q);
        }
    }
    return {C[0], C[1]};
}

inline void domination_sphere_ball_run(const Resolved& c, ExperimentResult& r)
{
    auto [s1, s2] = domination_constants(c, Domain::sphere, r, "sphere_", 100);
    auto [b1, b2] = domination_constants(c, Domain::ball, r, "ball_", 100);
    r.observe("C_sphere", s1);
    r.observe("C_sphere_refined", s2);
    r.observe("C_ball", b1);
    r.observe("C_ball_refined", b2);
    // kappa = 0 collapse and the constant function.
    Resolved z = c;
    z.kappa.assign(c.kappa.size(), 0.0);
    auto ctx0 = make_intertwine_context(make_multiplicity(z.kappa), 40, 8);
    MaximalOptions o = detail::maximal_options(c, c.grid);
    double c0 = 0;
    auto pts = domination_points(Domain::sphere, 100);
    for (const auto& [name, F] : domination_family(Domain::sphere, c)) {
        c0 = std::max(c0, domination_check(ctx0, Domain::sphere, F, pts, o).c_obs);
    }
    auto ctx = make_intertwine_context(make_multiplicity(c.kappa), 40, 8);
    double one = domination_ratio(ctx, Domain::sphere, constant_integrand(1.0), pts[7], o);
    r.observe("C_kappa0_sphere", c0);
    r.observe("ratio_constant_function", one);
    r.observe("points", 100);
    r.trace_label = "max(C_sphere, C_ball) with rule m, cap_m and doubled";
    r.refinement_trace = {std::max(s1, b1), std::max(s2, b2)};
    r.pass = std::isfinite(s1) && std::isfinite(b1) && rel_change(s1, s2) < 0.25 && rel_change(b1, b2) < 0.25 &&
             c0 <= 1 + 1e-6;
}

inline void domination_simplex_run(const Resolved& c, ExperimentResult& r)
{
    auto [t1, t2] = domination_constants(c, Domain::simplex, r, "simplex_", 100);
    r.observe("C_simplex", t1);
    r.observe("C_simplex_refined", t2);
    r.observe("points", 100);
    r.trace_label = "C_simplex with rule m, cap_m and doubled";
    r.refinement_trace = {t1, t2};
    r.pass = std::isfinite(t1) && rel_change(t1, t2) < 0.25;
}

inline std::vector<Vec3> spike_centers(Domain dom)
{
    switch (dom) {
    case Domain::sphere:
        return {{1, 0, 0}, normalized({0.6, 0.8, 0}), normalized({0.999, 0.04, 0})};
    case Domain::ball:
        return {{0, 0, 0}, {0.5, 0, 0}, {0.03, 0, 0}};
    default:
        return {{0.5, 0, 0}, {0.05, 0, 0}, {0.95, 0, 0}};
    }
}

inline void weak_type_run(Domain dom, const Resolved& c, ExperimentResult& r)
{
    auto mk = make_multiplicity(c.kappa);
    auto ctx = make_intertwine_context(mk, 40, 8);
    MaximalOptions o = detail::maximal_options(c);
    std::vector<std::pair<std::string, std::vector<double>>> taus;
    if (c.tau_given) {
        taus.push_back({"tau", c.tau});
    } else {
        std::vector<double> half(c.kappa);
        for (double& t : half) t *= 0.5;
        taus.push_back({"tau_eq_kappa", c.kappa});
        taus.push_back({"tau_half_kappa", half});
    }
    bool ok = true;
    double first_slope = 0;
    for (const auto& [label, tau] : taus) {
        make_weight_spec(dom, tau);
        auto rep = weak_type_experiment(ctx, dom, tau, spike_centers(dom), std::numbers::pi / 8, 5, o, c.grid);
        r.observe(label + "_slope", rep.slope);
        r.observe(label + "_worst_ratio", rep.worst);
        for (std::size_t h = 0; h < rep.worst_by_radius.size(); ++h) {
            r.observe(label + "_ratio_halving" + std::to_string(h), rep.worst_by_radius[h]);
        }
        ok = ok && rep.slope < 0.1 && std::isfinite(rep.worst);
        if (&label == &taus.front().first) first_slope = rep.slope;
    }
    auto rep2 = weak_type_experiment(ctx, dom, taus.front().second, spike_centers(dom), std::numbers::pi / 8, 5, o,
                                     2 * c.grid);
    r.observe("refined_slope", rep2.slope);
    r.observe("radius_max", std::numbers::pi / 8);
    r.observe("halvings", 5);
    r.trace_label = "slope for the first tau on grids with base and 2 base cells";
    r.refinement_trace = {first_slope, rep2.slope};
    r.pass = ok && rep2.slope < 0.1;
}

inline void mcm_lp_run(const Resolved& c, ExperimentResult& r)
{
    auto mk = make_multiplicity(c.kappa);
    auto ctx = make_intertwine_context(mk, 40, 8);
    MaximalOptions o = detail::maximal_options(c);
    auto sp = make_harmonic_space(mk, 6);
    std::mt19937_64 rng(c.seed);
    auto fs = detail::random_family(sp, 7, 6, rng);
    fs.push_back([](const Vec3&) { return 1.0; });
    bool in_range = lp_range_ok(mk, c.tau, c.p);
    if (!in_range) r.warnings.push_back("tau outside -1/2 < tau < p kappa + (p-1)/2");
    LpReport a = lp_bound_experiment(ctx, c.tau, c.p, fs, c.grid / 2, o);
    LpReport b = lp_bound_experiment(ctx, c.tau, c.p, fs, c.grid, o);
    r.observe("worst_ratio", b.worst);
    r.observe("worst_ratio_coarse", a.worst);
    r.observe("ratio_constant_function", b.ratios.back());
    r.observe("tau_in_range", in_range ? 1 : 0);
    r.observe("functions", static_cast<double>(fs.size()));
    r.trace_label = "worst ratio on grids with base/2 and base cells";
    r.refinement_trace = {a.worst, b.worst};
    r.pass = in_range && std::isfinite(b.worst) && rel_change(a.worst, b.worst) < 0.25;
}

inline void pointwise_361_run(const Resolved& c, ExperimentResult& r)
{
    const double q = (1 + c.p) / 2;
    auto mk = make_multiplicity(c.kappa);
    bool ok_range = true;
    for (std::size_t i = 0; i < c.tau.size(); ++i) ok_range = ok_range && c.tau[i] < q * mk[i] + 0.5 * (q - 1);
    if (!ok_range) r.warnings.push_back("tau outside tau < q kappa + (q-1)/2");
    auto sp = make_harmonic_space(mk, 6);
    std::mt19937_64 rng(c.seed);
    auto fs = detail::random_family(sp, 4, 6, rng);
    std::vector<Vec3> pts;
    const int npts = c.d == 1 ? 64 : 16;
    const int m = c.d == 1 ? 8 : 6;
    for (int k = 0; k < npts; ++k) pts.push_back(detail::random_sphere_point(c.d, rng));
    double w[2] = {0, 0};
    for (int level = 0; level < 2; ++level) {
        MaximalOptions o = detail::maximal_options(c, level == 0 ? m : 2 * m);
        for (const auto& f : fs) w[level] = std::max(w[level], hl_power_domination(c.d, c.kappa, c.tau, q, f, pts, o));
    }
    r.observe("q", q);
    r.observe("worst_ratio", w[0]);
    r.observe("worst_ratio_refined", w[1]);
    r.observe("tau_in_range", ok_range ? 1 : 0);
    r.trace_label = "worst ratio with cap rule m and 2m";
    r.refinement_trace = {w[0], w[1]};
    r.pass = ok_range && std::isfinite(w[0]) && rel_change(w[0], w[1]) < 0.25;
}

inline std::vector<double> p_list(const Resolved& c)
{
    if (c.p_given) return {c.p};
    return {1.5, 2.0, 3.0};
}

inline std::string p_label(double p)
{
    std::ostringstream s;
    s << p;
    return s.str();
}

inline void fefferman_stein_run(const Resolved& c, ExperimentResult& r)
{
    auto mk = make_multiplicity(c.kappa);
    auto ctx = make_intertwine_context(mk, 40, 8);
    MaximalOptions o = detail::maximal_options(c);
    std::vector<PointFunction> bumps;
    for (int j = 0; j < 8; ++j) {
        double a = 2 * std::numbers::pi * j / 8 + 0.3;
        Vec3 cj{std::cos(a), std::sin(a), 0};
        bumps.push_back([cj](const Vec3& y) { return std::exp(6 * (dot(cj, y) - 1)); });
    }
    FamilyMaxima coarse = family_maxima(ctx, c.tau, bumps, c.grid / 2, o);
    FamilyMaxima fine = family_maxima(ctx, c.tau, bumps, c.grid, o);
    bool ok = true;
    for (double p : p_list(c)) {
        double v = fine.vector_ratio(p), v0 = coarse.vector_ratio(p);
        r.observe("vector_ratio_p" + p_label(p), v);
        r.observe("vector_ratio_coarse_p" + p_label(p), v0);
        ok = ok && std::isfinite(v) && rel_change(v0, v) < 0.25;
        if (!lp_range_ok(mk, c.tau, p)) {
            r.warnings.push_back("tau outside the range for p = " + p_label(p));
            ok = false;
        }
    }
    // Equal members: the l^2 factor cancels.
    FamilyMaxima same = fine;
    for (std::size_t j = 1; j < same.values.size(); ++j) {
        same.values[j] = same.values[0];
        same.maxima[j] = same.maxima[0];
    }
    r.observe("equal_members_deviation", std::abs(same.vector_ratio(2.0) - same.ratio(0, 2.0)));
    // Weighted inequality for the Hardy-Littlewood maximal function.
    SphereIntegrand cap = spike_integrand(Domain::sphere, 1, normalized({-0.3, 1, 0}), 0.4, 1.0);
    SphereIntegrand power{[](const Vec3& y) { return std::pow(std::abs(y[0]), 0.6); }, {}, {}};
    MaximalOptions oh = detail::maximal_options(c, 12);
    double s1 = stein_weight_ratio(c.kappa, 2.0, bumps[0], cap, c.grid, oh);
    double s2 = stein_weight_ratio(c.kappa, 2.0, bumps[0], power, c.grid, oh);
    r.observe("weighted_ratio_cap_weight", s1);
    r.observe("weighted_ratio_power_weight", s2);
    r.trace_label = "vector ratio at the first p on grids with base/2 and base cells";
    double p0 = p_list(c).front();
    r.refinement_trace = {coarse.vector_ratio(p0), fine.vector_ratio(p0)};
    r.pass = ok && std::isfinite(s1) && std::isfinite(s2);
}

inline void cesaro_run(const Resolved& c, ExperimentResult& r)
{
    auto mk = make_multiplicity(c.kappa);
    if (!(c.delta > mk.lambda_kappa) && !c.allow_small_delta) {
        throw ConfigError("cesaro-vector: delta > lambda_kappa is required (override with --allow-small-delta)");
    }
    auto ctx = make_intertwine_context(mk, 40, 8);
    MaximalOptions o = detail::maximal_options(c);
    auto sp = make_harmonic_space(mk, 16);
    std::mt19937_64 rng(c.seed);
    std::vector<DegreeDecomposition> fs;
    for (int j = 0; j < 8; ++j) fs.push_back(random_polynomial(sp, 16, rng));
    std::vector<int> ns{2, 4, 8, 16, 2, 4, 8, 16};
    auto ps = p_list(c);
    CesaroReport a = cesaro_maximal_experiment(ctx, c.delta, ps, ns, fs, c.grid / 2, o, c.allow_small_delta);
    CesaroReport b = cesaro_maximal_experiment(ctx, c.delta, ps, ns, fs, c.grid, o, c.allow_small_delta);
    bool ok = true;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        r.observe("vector_ratio_p" + p_label(ps[i]), b.vector_ratios[i]);
        r.observe("vector_ratio_coarse_p" + p_label(ps[i]), a.vector_ratios[i]);
        ok = ok && std::isfinite(b.vector_ratios[i]) && rel_change(a.vector_ratios[i], b.vector_ratios[i]) < 0.25;
    }
    r.observe("pointwise_sup_over_maximal", b.pointwise);
    // Constant members reproduce exactly.
    DegreeDecomposition one{sp, std::vector<double>(sp->total(), 0.0), true};
    one.coef[0] = 1 / sp->blocks[0][0].scale / std::sqrt(1.0);
    double one_dev = 0;
    for (int n : {2, 4, 8, 16}) {
        auto s = cesaro_mean(one, n, c.delta).grid_values();
        auto v = one.grid_values();
        for (std::size_t k = 0; k < s.size(); ++k) one_dev = std::max(one_dev, std::abs(s[k] - v[k]));
    }
    r.observe("constant_member_deviation", one_dev);
    r.trace_label = "vector ratio at the first p on grids with base/2 and base cells";
    r.refinement_trace = {a.vector_ratios[0], b.vector_ratios[0]};
    r.pass = ok && std::isfinite(b.pointwise) && one_dev < 1e-12;
}

inline void multiplier_run(const Resolved& c, ExperimentResult& r)
{
    auto mk = make_multiplicity(c.kappa);
    const double gamma = 3;
    const int k = default_difference_order(mk.lambda_kappa);
    auto make_seq = [&](int L, bool alternating) {
        MultiplierSequence mu;
        mu.k = k;
        for (int j = 0; j < L; ++j) mu.values.push_back(alternating ? (j % 2 ? -1.0 : 1.0) : std::cos(gamma * std::log(1.0 + j)));
        return mu;
    };
    // Largest block value over the last four dyadic blocks against the four before.
    auto block_growth = [](const MultiplierCondition& mc) {
        const auto& b = mc.block_values;
        const std::size_t n = b.size();
        if (n < 8) throw std::runtime_error("multiplier-bound: too few dyadic blocks");
        double early = *std::max_element(b.end() - 8, b.end() - 4);
        double late = *std::max_element(b.end() - 4, b.end());
        return late / early;
    };
    const int L = (1 << 13) + k + 2;
    using HP = boost::multiprecision::cpp_bin_float_50;
    MultiplierCondition cond = multiplier_condition([&](const HP& j) { return cos(gamma * log(1 + j)); }, L, k);
    MultiplierCondition alt =
        multiplier_condition([](const HP& j) { return HP(static_cast<long>(j) % 2 ? -1 : 1); }, L, k);
    double cgrowth = block_growth(cond), agrowth = block_growth(alt);
    r.observe("difference_order", k);
    r.observe("sup_abs", cond.sup_abs);
    r.observe("variation", cond.variation);
    r.observe("variation_block_growth", cgrowth);
    r.observe("alternating_variation_block_growth", agrowth);
    const auto ps = p_list(c);
    std::vector<double> Ns{8, 16, 32};
    std::vector<std::vector<double>> proxies(ps.size());
    for (double N : Ns) {
        const int n_max = static_cast<int>(N);
        auto sp = make_harmonic_space(mk, n_max);
        std::mt19937_64 rng(c.seed);
        MultiplierSequence mu = make_seq(n_max + 1, false);
        // Mean-zero random polynomials and one random harmonic of each degree
        // n >= 1; constants are fixed by mu_0 = 1.
        std::vector<DegreeDecomposition> fs;
        for (int j = 0; j < 8; ++j) fs.push_back(random_polynomial(sp, n_max, rng, true));
        for (int n = 1; n <= n_max; ++n) fs.push_back(random_polynomial(sp, n_max, rng).component(n));
        std::vector<double> worst(ps.size(), 0.0);
        for (const auto& f : fs) {
            auto fv = f.grid_values();
            auto tv = apply_multiplier(f, mu).grid_values();
            for (std::size_t i = 0; i < ps.size(); ++i) {
                worst[i] = std::max(worst[i], grid_norm(sp->grid.weights, tv, ps[i]) / grid_norm(sp->grid.weights, fv, ps[i]));
            }
        }
        for (std::size_t i = 0; i < ps.size(); ++i) {
            proxies[i].push_back(worst[i]);
            r.observe("operator_proxy_p" + p_label(ps[i]) + "_N" + std::to_string(n_max), worst[i]);
        }
    }
    double pslope = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ps.size(); ++i) {
        double sl = loglog_slope(Ns, proxies[i]);
        r.observe("operator_proxy_slope_p" + p_label(ps[i]), sl);
        pslope = std::max(pslope, sl);
    }
    r.observe("operator_proxy_slope_max", pslope);
    r.trace_label = "operator proxy at the last p for N = 16 and N = 32";
    r.refinement_trace = {proxies.back()[1], proxies.back()[2]};
    r.pass = cond.sup_abs <= 1 + 1e-12 && cgrowth < 1.25 && agrowth > 4 && pslope < 0.1;
}

inline void littlewood_paley_run(const Resolved& c, ExperimentResult& r)
{
    auto mk = make_multiplicity(c.kappa);
    auto constants = [&](int extra, bool record) {
        auto sp = make_harmonic_space(mk, c.grid, extra);
        std::mt19937_64 rng(c.seed);
        double C = 0;
        double lo = std::numeric_limits<double>::infinity(), hi = 0;
        for (int j = 0; j < 10; ++j) {
            DegreeDecomposition f = random_polynomial(sp, c.grid, rng, true);
            auto fv = f.grid_values();
            auto gv = littlewood_paley_g(f);
            for (double p : {1.5, 2.0, 3.0}) {
                double q = grid_norm(sp->grid.weights, gv, p) / grid_norm(sp->grid.weights, fv, p);
                lo = std::min(lo, q);
                hi = std::max(hi, q);
            }
        }
        C = std::max(hi, 1 / lo);
        if (record) {
            r.observe("ratio_min", lo);
            r.observe("ratio_max", hi);
            // One harmonic of degree n: g(f) = |f| n / sqrt(2n(2n-1)).
            const int n = std::min(3, c.grid);
            DegreeDecomposition h{sp, std::vector<double>(sp->total(), 0.0), true};
            h.coef[sp->offset[n]] = 1;
            auto hv = h.grid_values();
            auto gh = littlewood_paley_g(h);
            double dev = 0;
            for (std::size_t k = 0; k < hv.size(); ++k) {
                dev = std::max(dev, std::abs(gh[k] - std::abs(hv[k]) * n / std::sqrt(2.0 * n * (2 * n - 1))));
            }
            r.observe("single_harmonic_deviation", dev);
            DegreeDecomposition one{sp, std::vector<double>(sp->total(), 0.0), true};
            one.coef[0] = 1;
            double cmax = 0;
            for (double v : littlewood_paley_g(one)) cmax = std::max(cmax, std::abs(v));
            r.observe("constant_g_sup", cmax);
        }
        return C;
    };
    double C1 = constants(0, true);
    double C2 = constants(8, false);
    r.observe("C_obs", C1);
    r.observe("C_obs_refined", C2);
    r.trace_label = "C_obs on grids of exactness 2N and 2N+8";
    r.refinement_trace = {C1, C2};
    r.pass = std::isfinite(C1) && C2 <= 2 * C1 && C1 <= 2 * C2 && r.value("single_harmonic_deviation") < 1e-10 &&
             r.value("constant_g_sup") < 1e-12;
}

inline void bs_integral_run(const Resolved& c, ExperimentResult& r)
{
    const int d = c.d;
    auto G = [](const Vec3& y) { return std::exp(0.3 * y[0] + 0.5 * y[1] - 0.2 * y[2]) + y[2] * y[2] * y[2] * y[2] * y[0]; };
    auto [l1, r1] = sphere_ball_sides(d, G, c.grid);
    auto [l2, r2] = sphere_ball_sides(d, G, 2 * c.grid);
    double e1 = std::abs(l1 - r1) / std::abs(l1), e2 = std::abs(l2 - r2) / std::abs(l2);
    r.observe("sphere_side", l1);
    r.observe("ball_side", r1);
    r.observe("rel_difference", e1);
    r.trace_label = "rel_difference with n and 2n nodes per direction";
    r.refinement_trace = {e1, e2};
    r.pass = e1 < 1e-8 && e2 < 1e-8;
}

inline void tb_run(const Resolved& c, ExperimentResult& r)
{
    const int d = c.d;
    auto g = [](const Vec3& u) { return std::exp(u[0] + 0.5 * u[1]) * (1 + u[0] * u[1]); };
    auto [l1, r1] = ball_simplex_sides(d, g, c.grid);
    auto [l2, r2] = ball_simplex_sides(d, g, 2 * c.grid);
    double e1 = std::abs(l1 - r1) / std::abs(l1), e2 = std::abs(l2 - r2) / std::abs(l2);
    r.observe("ball_side", l1);
    r.observe("simplex_side", r1);
    r.observe("rel_difference", e1);
    r.trace_label = "rel_difference with n and 2n nodes per direction";
    r.refinement_trace = {e1, e2};
    r.pass = e1 < 1e-8 && e2 < 1e-8;
}

// proj_n(W^B) on [-1,1] against Gram-Schmidt in the monomials.
inline void proj_bs_run(const Resolved& c, ExperimentResult& r)
{
    auto mk = make_multiplicity(c.kappa);
    const int D = c.grid;
    const long double a = c.kappa[0], b = c.kappa[1];
    detail::MomentGramSchmidt gs(D, [a, b](int k) -> long double {
        if (k % 2) return 0.0L;
        return static_cast<long double>(boost::math::beta((k + 2 * a + 1) / 2, b + 0.5L));
    });
    std::mt19937_64 rng(c.seed);
    auto coef = detail::random_coefficients(D, rng);
    auto f = [&](const Vec3& x) { return detail::poly_eval(coef, x[0]); };
    auto error_at = [&](int extra) {
        auto sp = make_harmonic_space(mk, D, extra);
        auto dec = project_ball_decomposition(sp, f, D);
        double e = 0, sup = 0;
        for (int k = 0; k < 25; ++k) {
            double x = -1 + 2 * (k + 0.5) / 25;
            sup = std::max(sup, std::abs(detail::poly_eval(coef, x)));
            for (int n = 0; n <= D; ++n) {
                double lib = dec.eval_component(n, lift_to_sphere(1, {x, 0, 0}));
                double ref = static_cast<double>(gs.project(n, coef, x));
                e = std::max(e, std::abs(lib - ref));
            }
        }
        return e / sup;
    };
    double e1 = error_at(0), e2 = error_at(8);
    r.observe("max_rel_error", e1);
    r.observe("degree", D);
    r.trace_label = "max_rel_error on grids of exactness 2N and 2N+8";
    r.refinement_trace = {e1, e2};
    r.pass = e1 < 1e-8 && e2 < 1e-8;
}

// proj_n(W^T) on [0,1] against Gram-Schmidt in the monomials.
inline void proj_tb_run(const Resolved& c, ExperimentResult& r)
{
    auto mk = make_multiplicity(c.kappa);
    const int D = c.grid;
    const long double a = c.kappa[0], b = c.kappa[1];
    detail::MomentGramSchmidt gs(D, [a, b](int k) -> long double {
        return static_cast<long double>(boost::math::beta(k + a + 0.5L, b + 0.5L));
    });
    std::mt19937_64 rng(c.seed);
    auto coef = detail::random_coefficients(D, rng);
    auto f = [&](const Vec3& u) { return detail::poly_eval(coef, u[0]); };
    auto error_at = [&](int extra) {
        auto sp = make_harmonic_space(mk, 2 * D, extra);
        double e = 0, sup = 0;
        for (int k = 0; k < 25; ++k) {
            double u = (k + 0.5) / 25;
            sup = std::max(sup, std::abs(detail::poly_eval(coef, u)));
            for (int n = 0; n <= D; ++n) {
                double lib = project_simplex(sp, n, f, {u, 0, 0}, D);
                double ref = static_cast<double>(gs.project(n, coef, u));
                e = std::max(e, std::abs(lib - ref));
            }
        }
        return e / sup;
    };
    double e1 = error_at(0), e2 = error_at(8);
    r.observe("max_rel_error", e1);
    r.observe("degree", D);
    r.trace_label = "max_rel_error on grids of exactness 4N and 4N+8";
    r.refinement_trace = {e1, e2};
    r.pass = e1 < 1e-8 && e2 < 1e-8;
}

} // namespace experiments

inline const std::vector<Experiment>& registry()
{
    namespace E = experiments;
    static const std::vector<Experiment> reg = [] {
        const std::vector<double> k1{0.5, 1.0}, k2{1.0, 2.0, 0.5}, k2b{0.5, 1.0, 1.5};
        std::vector<Experiment> v;
        v.push_back({"denoM1f-identity", "a_kappa int V[chi_B(x,theta)] h^2 dw = c_lambda int_0^theta (sin phi)^{2 lambda} dphi",
                     {1, 2}, k1, k2, {}, {}, 8, 7, 12, 2, E::denominator_identity_run});
        v.push_back({"subordination", "e^{-nt} = int_0^inf e^{-n(n+2 lambda)s} phi_t(s) ds; P_{e^{-t}} f = int phi_t(s) H_s f ds",
                     {1, 2}, k1, k2, {}, {}, 6, 6, 24, 2, E::subordination_run});
        v.push_back({"semigroup-laws", "P_r P_s = P_{rs}, H_s H_t = H_{s+t}, P_r f >= 0 for f >= 0",
                     {1, 2}, k1, k2b, {}, {}, 8, 8, 24, 2, E::semigroup_run});
        v.push_back({"kernel-trace-dimension", "a_kappa int P_n(x,x) h^2 dw = dim H_n",
                     {1, 2}, k1, k2, {}, {}, 6, 6, 24, 2, E::kernel_trace_run});
        v.push_back({"lemma2-bound", "V[chi_B(x,theta)](y) <= c prod theta^{2 kappa_j}/(|x_j|+theta)^{2 kappa_j} chi_{c(|x|,theta)}(|y|)",
                     {1, 2}, k1, k2, {}, {}, 16, 16, 24, 2, E::lemma2_run});
        v.push_back({"lemma3-capmeasure", "meas_tau c(x,theta) ~ theta^d prod (|x_j|+theta)^{tau_j}",
                     {1, 2}, k1, k2, {-0.4, 1.0}, {-0.4, 0.5, 1.0}, 16, 16, 24, 2, E::lemma3_run});
        v.push_back({"lemma4-4-2-capmeasure", "meas^B_tau B(x,theta) ~ theta^d prod (|x_j|+theta)^{2 tau_j}, x_{d+1} = sqrt(1-|x|^2)",
                     {1, 2}, k1, k2, {-0.4, 1.0}, {-0.4, 0.5, 1.0}, 16, 16, 24, 2, E::lemma442_run});
        v.push_back({"theorem-Mf-domination", "M^V_kappa f(x) <= c sum_eps M_kappa f(x eps) on the sphere and the ball",
                     {1}, {1.0, 0.5}, {}, {}, {}, 8, 0, 20, 2, E::domination_sphere_ball_run});
        v.push_back({"weak11", "meas_tau{M^V_kappa f >= alpha} <= c ||f||_{tau,1}/alpha, tau <= kappa, sphere",
                     {1}, k1, {}, {}, {}, 48, 0, 24, 2, [](const Resolved& c, ExperimentResult& r) {
                         E::weak_type_run(Domain::sphere, c, r);
                     }});
        v.push_back({"MCM-lp", "||M^V_kappa f||_{tau,p} <= c ||f||_{tau,p}, -1/2 < tau < p kappa + (p-1)/2",
                     {1}, k1, {}, {}, {}, 64, 0, 24, 2, E::mcm_lp_run});
        v.push_back({"3-6-1-pointwise", "M_kappa f(x) <= c (M_tau |f|^q (x))^{1/q}, q = (1+p)/2",
                     {1, 2}, k1, k2, {}, {}, 0, 0, 24, 2, E::pointwise_361_run, 12});
        v.push_back({"fefferman-stein", "||(sum (M^V f_j)^2)^{1/2}||_{tau,p} <= c ||(sum f_j^2)^{1/2}||_{tau,p}",
                     {1}, k1, {}, {}, {}, 64, 0, 24, 2, E::fefferman_stein_run});
        v.push_back({"cesaro-vector", "||(sum |S^delta_{n_j} f_j|^2)^{1/2}||_{kappa,p} <= c ||(sum |f_j|^2)^{1/2}||_{kappa,p}, delta > lambda",
                     {1}, {0.5, 0.5}, {}, {}, {}, 64, 0, 24, 2, E::cesaro_run});
        v.push_back({"multiplier-bound", "||sum mu_j proj_j f||_{kappa,p} <= c ||f||_{kappa,p} under the difference condition",
                     {1, 2}, k1, k2, {}, {}, 0, 0, 24, 2, E::multiplier_run});
        v.push_back({"littlewood-paley", "c^{-1} ||f||_{kappa,p} <= ||g(f)||_{kappa,p} <= c ||f||_{kappa,p}",
                     {1, 2}, k1, k2b, {}, {}, 8, 8, 24, 2, E::littlewood_paley_run});
        v.push_back({"BSintegral", "int_S G dw = int_B [G(x, r) + G(x, -r)] dx / r, r = sqrt(1-|x|^2)",
                     {1, 2}, k1, k2, {}, {}, 24, 24, 24, 2, E::bs_integral_run});
        v.push_back({"T-B", "int_B g(x_1^2,...,x_d^2) dx = int_T g(u) du / sqrt(u_1...u_d)",
                     {1, 2}, k1, k2, {}, {}, 24, 24, 24, 2, E::tb_run});
        v.push_back({"projBS-consistency", "proj_n(W^B; f)(x) = proj_n F(x, sqrt(1-|x|^2))",
                     {1}, k1, {}, {}, {}, 8, 0, 24, 2, E::proj_bs_run});
        v.push_back({"projTB-consistency", "proj_n(W^T; f)(psi(x)) = 2^{-d} sum_eps proj_{2n}(W^B; f o psi)(x eps)",
                     {1}, k1, {}, {}, {}, 4, 0, 24, 2, E::proj_tb_run});
        v.push_back({"MCMB-weak11", "meas^B_tau{M^B f >= alpha} <= c ||f||_{tau,1}/alpha, ball",
                     {1}, k1, {}, {}, {}, 48, 0, 24, 2, [](const Resolved& c, ExperimentResult& r) {
                         E::weak_type_run(Domain::ball, c, r);
                     }});
        v.push_back({"MCMT-weak11", "meas^T_tau{M^T f >= alpha} <= c ||f||_{tau,1}/alpha, simplex",
                     {1}, k1, {}, {}, {}, 48, 0, 24, 2, [](const Resolved& c, ExperimentResult& r) {
                         E::weak_type_run(Domain::simplex, c, r);
                     }});
        v.push_back({"4-8-bound", "V^B[chi_e(x,theta)](Y) <= c prod theta^{2 kappa_j}/(|x_j|+theta)^{2 kappa_j}",
                     {1, 2}, k1, k2, {}, {}, 16, 16, 24, 2, E::ball_bound_run});
        v.push_back({"5-7-domination", "M^V_T f(x) <= c M_T f(x) on the simplex",
                     {1}, {1.0, 0.5}, {}, {}, {}, 8, 0, 20, 2, E::domination_simplex_run});
        return v;
    }();
    return reg;
}

inline const Experiment* find_experiment(const std::string& name)
{
    for (const auto& e : registry()) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

inline std::string registry_names()
{
    std::string s;
    for (const auto& e : registry()) {
        if (!s.empty()) s += ", ";
        s += e.name;
    }
    return s;
}

// Fills defaults and validates; throws ConfigError.
inline Resolved resolve(const ExperimentConfig& cfg)
{
    const Experiment* e = find_experiment(cfg.experiment);
    if (!e) throw ConfigError("unknown experiment '" + cfg.experiment + "'; valid names: " + registry_names());
    Resolved c;
    c.d = cfg.dimension.value_or(e->dims.front());
    if (std::find(e->dims.begin(), e->dims.end(), c.d) == e->dims.end()) {
        throw ConfigError(e->name + ": dimension " + std::to_string(c.d) + " is not supported");
    }
    c.kappa = cfg.kappa.value_or(c.d == 1 ? e->kappa1 : e->kappa2);
    if (static_cast<int>(c.kappa.size()) != c.d + 1) throw ConfigError("kappa needs d+1 entries");
    for (double k : c.kappa) {
        if (!(k >= 0) || !std::isfinite(k)) throw ConfigError("kappa entries must be finite and >= 0");
    }
    c.tau_given = cfg.tau.has_value();
    const auto& dt = c.d == 1 ? e->tau1 : e->tau2;
    c.tau = cfg.tau.value_or(dt.empty() ? c.kappa : dt);
    if (static_cast<int>(c.tau.size()) != c.d + 1) throw ConfigError("tau needs d+1 entries");
    for (double t : c.tau) {
        if (!(t > -0.5) || !std::isfinite(t)) throw ConfigError("tau entries must be finite and > -1/2");
    }
    int g = c.d == 1 ? e->grid1 : e->grid2;
    c.grid = cfg.grid_exactness.value_or(g);
    if (cfg.grid_exactness && *cfg.grid_exactness < 2) throw ConfigError("grid_exactness must be >= 2");
    if (cfg.grid_exactness && *cfg.grid_exactness > 256) throw ConfigError("grid_exactness must be <= 256");
    c.thetas = cfg.theta_count.value_or(c.d == 2 && e->thetas2 ? e->thetas2 : e->thetas);
    if (c.thetas < 2 || c.thetas > 256) throw ConfigError("theta_count must be in [2, 256]");
    c.p_given = cfg.p.has_value();
    c.p = cfg.p.value_or(e->p);
    if (!(c.p > 1) || !std::isfinite(c.p)) throw ConfigError("p must be finite and > 1");
    double lam = make_multiplicity(c.kappa).lambda_kappa;
    c.delta = cfg.delta.value_or(lam + 0.1);
    if (!(c.delta > 0) || !std::isfinite(c.delta)) throw ConfigError("delta must be finite and > 0");
    c.seed = cfg.seed;
    c.allow_small_delta = cfg.allow_small_delta;
    if (cfg.output.format != "json" && cfg.output.format != "csv") throw ConfigError("format must be csv or json");
    return c;
}

// Runs one experiment. Configuration errors propagate as ConfigError; any
// other failure is reported in the result as a numerical failure.
inline ExperimentResult run(const ExperimentConfig& cfg)
{
    Resolved c = resolve(cfg);
    const Experiment* e = find_experiment(cfg.experiment);
    ExperimentResult r;
    r.name = e->name;
    r.anchor = e->anchor;
    r.config = c;
    auto t0 = std::chrono::steady_clock::now();
    try {
        e->run(c, r);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& ex) {
        r.pass = false;
        r.error = ex.what();
    }
    r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& kv : r.observed) {
        if (!std::isfinite(kv.second)) r.pass = false;
    }
    return r;
}

// ---- emission ----

inline json config_json(const ExperimentResult& r)
{
    const Resolved& c = r.config;
    json j;
    j["experiment"] = r.name;
    j["dimension"] = c.d;
    j["kappa"] = c.kappa;
    j["tau"] = c.tau;
    j["grid_exactness"] = c.grid;
    j["theta_count"] = c.thetas;
    j["p"] = c.p;
    j["delta"] = c.delta;
    j["seed"] = c.seed;
    return j;
}

// The runtime is left out unless requested so that reruns are byte-identical.
inline json result_json(const ExperimentResult& r, bool with_runtime = false)
{
    json j;
    j["name"] = r.name;
    j["anchor"] = r.anchor;
    j["config"] = config_json(r);
    json obs = json::object();
    for (const auto& [k, v] : r.observed) obs[k] = std::isfinite(v) ? json(v) : json(nullptr);
    j["observed_constants"] = obs;
    j["pass"] = r.pass;
    j["refinement_trace"] = {{"label", r.trace_label}, {"values", r.refinement_trace}};
    j["warnings"] = r.warnings;
    if (!r.error.empty()) j["error"] = r.error;
    if (with_runtime) j["runtime_ms"] = r.runtime_ms;
    return j;
}

inline std::string fmt_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string o = "\"";
    for (char ch : s) {
        if (ch == '"') o += '"';
        o += ch;
    }
    return o + "\"";
}

// One row per statistic: experiment,section,key,value.
inline std::string result_csv(const ExperimentResult& r, bool header = true, bool with_runtime = false)
{
    std::ostringstream o;
    if (header) o << "experiment,section,key,value\n";
    auto row = [&](const std::string& sec, const std::string& key, const std::string& val) {
        o << csv_escape(r.name) << ',' << sec << ',' << csv_escape(key) << ',' << csv_escape(val) << '\n';
    };
    auto vec = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt_double(v[i]);
        return s;
    };
    const Resolved& c = r.config;
    row("meta", "anchor", r.anchor);
    row("config", "dimension", std::to_string(c.d));
    row("config", "kappa", vec(c.kappa));
    row("config", "tau", vec(c.tau));
    row("config", "grid_exactness", std::to_string(c.grid));
    row("config", "theta_count", std::to_string(c.thetas));
    row("config", "p", fmt_double(c.p));
    row("config", "delta", fmt_double(c.delta));
    row("config", "seed", std::to_string(c.seed));
    for (const auto& [k, v] : r.observed) row("observed", k, fmt_double(v));
    for (std::size_t i = 0; i < r.refinement_trace.size(); ++i) {
        row("trace", "level" + std::to_string(i + 1), fmt_double(r.refinement_trace[i]));
    }
    row("trace", "label", r.trace_label);
    for (const auto& w : r.warnings) row("meta", "warning", w);
    if (!r.error.empty()) row("meta", "error", r.error);
    row("result", "pass", r.pass ? "true" : "false");
    if (with_runtime) row("result", "runtime_ms", fmt_double(r.runtime_ms));
    return o.str();
}

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file " + path);
    f << text;
}

inline std::string render(const ExperimentResult& r, const std::string& format, bool with_runtime = false)
{
    if (format == "csv") return result_csv(r, true, with_runtime);
    return result_json(r, with_runtime).dump(2) + "\n";
}

// ---- configuration files ----

inline std::vector<double> json_vector(const json& v, const std::string& key)
{
    if (!v.is_array()) throw ConfigError(key + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(key + " must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

inline int json_int(const json& v, const std::string& key)
{
    if (!v.is_number_integer()) throw ConfigError(key + " must be an integer");
    return v.get<int>();
}

inline double json_number(const json& v, const std::string& key)
{
    if (!v.is_number()) throw ConfigError(key + " must be a number");
    return v.get<double>();
}

inline ExperimentConfig config_from_json(const json& j)
{
    if (!j.is_object()) throw ConfigError("each configuration must be a JSON object");
    ExperimentConfig c;
    bool named = false;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        const json& v = it.value();
        if (k == "experiment") {
            if (!v.is_string()) throw ConfigError("experiment must be a string");
            c.experiment = v.get<std::string>();
            named = true;
        } else if (k == "dimension") {
            c.dimension = json_int(v, k);
        } else if (k == "kappa") {
            c.kappa = json_vector(v, k);
        } else if (k == "tau") {
            c.tau = json_vector(v, k);
        } else if (k == "grid_exactness") {
            c.grid_exactness = json_int(v, k);
        } else if (k == "theta_count") {
            c.theta_count = json_int(v, k);
        } else if (k == "p") {
            c.p = json_number(v, k);
        } else if (k == "delta") {
            c.delta = json_number(v, k);
        } else if (k == "seed") {
            if (!v.is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
            c.seed = v.get<std::uint64_t>();
        } else if (k == "output") {
            if (!v.is_object()) throw ConfigError("output must be an object with path and format");
            for (auto o = v.begin(); o != v.end(); ++o) {
                if (o.key() == "path" && o.value().is_string()) {
                    c.output.path = o.value().get<std::string>();
                } else if (o.key() == "format" && o.value().is_string()) {
                    c.output.format = o.value().get<std::string>();
                } else {
                    throw ConfigError("unknown or invalid output key '" + o.key() + "'");
                }
            }
        } else {
            throw ConfigError("unknown configuration key '" + k + "'");
        }
    }
    if (!named) throw ConfigError("configuration without an experiment name");
    return c;
}

// A suite file is a JSON array of configurations, or an object whose only key
// "experiments" holds that array.
inline std::vector<ExperimentConfig> suite_from_json(const json& j)
{
    const json* arr = &j;
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it.key() != "experiments") throw ConfigError("unknown suite key '" + it.key() + "'");
        }
        if (!j.contains("experiments")) throw ConfigError("suite object needs an experiments array");
        arr = &j["experiments"];
    }
    if (!arr->is_array()) throw ConfigError("suite must be an array of configurations");
    if (arr->empty()) throw ConfigError("suite is empty");
    std::vector<ExperimentConfig> out;
    for (const auto& c : *arr) out.push_back(config_from_json(c));
    return out;
}

// Every registry entry at its default configuration.
inline std::vector<ExperimentConfig> default_suite()
{
    std::vector<ExperimentConfig> out;
    for (const auto& e : registry()) {
        ExperimentConfig c;
        c.experiment = e.name;
        out.push_back(c);
        if (e.name == "denoM1f-identity") {
            c.dimension = 2;
            out.push_back(c);
        }
    }
    return out;
}

struct SuiteSummary {
    std::vector<ExperimentResult> results;
    bool config_error = false;
    std::size_t passed = 0;

    bool all_pass() const { return !config_error && passed == results.size(); }
};

// Runs every configuration; a failing or misconfigured entry does not stop the
// others. Misconfigured entries appear with pass = false and the error text.
inline SuiteSummary run_suite(const std::vector<ExperimentConfig>& cfgs,
                              const std::function<void(const ExperimentResult&)>& on_result = {})
{
    if (cfgs.empty()) throw ConfigError("suite is empty");
    SuiteSummary s;
    for (const auto& cfg : cfgs) {
        ExperimentResult r;
        try {
            r = run(cfg);
            if (!cfg.output.path.empty()) write_text(cfg.output.path, render(r, cfg.output.format));
        } catch (const ConfigError& e) {
            r = ExperimentResult{};
            r.name = cfg.experiment;
            r.error = std::string("configuration error: ") + e.what();
            s.config_error = true;
        }
        if (r.pass) ++s.passed;
        if (on_result) on_result(r);
        s.results.push_back(std::move(r));
    }
    return s;
}

inline json summary_json(const SuiteSummary& s, bool with_runtime = false)
{
    json j;
    j["experiments"] = json::array();
    for (const auto& r : s.results) j["experiments"].push_back(result_json(r, with_runtime));
    j["passed"] = s.passed;
    j["total"] = s.results.size();
    j["pass"] = s.all_pass();
    return j;
}

inline std::string summary_csv(const SuiteSummary& s, bool with_runtime = false)
{
    std::string out = "experiment,section,key,value\n";
    for (const auto& r : s.results) out += result_csv(r, false, with_runtime);
    return out;
}

} // namespace dunkl::harness

#endif
