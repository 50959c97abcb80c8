// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <cstdio>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <dunkl/harness.hpp>

using namespace dunkl::harness;

namespace {

struct Run {
    std::string name;
    int d;
};

std::map<std::string, ExperimentResult> cache;

std::string key(const Run& r) { return r.name + "/d" + std::to_string(r.d); }

ExperimentConfig config(const Run& r)
{
    ExperimentConfig c;
    c.experiment = r.name;
    c.dimension = r.d;
    return c;
}

const ExperimentResult& get(const Run& r)
{
    auto it = cache.find(key(r));
    if (it != cache.end()) return it->second;
    ExperimentResult res = run(config(r));
    std::fprintf(stderr, "  %-24s d=%d %s %.1f s%s%s\n", r.name.c_str(), r.d, res.pass ? "pass" : "FAIL",
                 res.runtime_ms / 1000, res.error.empty() ? "" : " error: ", res.error.c_str());
    return cache.emplace(key(r), std::move(res)).first->second;
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// NaN when the run failed before recording the statistic.
double val(const ExperimentResult& r, const std::string& k)
{
    for (const auto& kv : r.observed) {
        if (kv.first == k) return kv.second;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

int failures = 0;

void report(int n, bool ok, const std::string& detail)
{
    std::printf("criterion %d: %s  %s\n", n, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

// Passes when every run passes; detail lists one observed value per run.
void group(int n, const std::vector<Run>& runs, const char* obs, const char* f = "%.3g")
{
    bool ok = true;
    std::string detail;
    for (const Run& r : runs) {
        const ExperimentResult& res = get(r);
        ok = ok && res.pass;
        detail += key(r) + " " + std::string(obs) + "=" + fmt(f, val(res, obs)) + "; ";
    }
    report(n, ok, detail);
}

} // namespace

int main()
{
    {
        bool ok = true;
        std::string detail;
        for (int d : {1, 2}) {
            const ExperimentResult& r = get({"denoM1f-identity", d});
            ok = ok && r.pass && r.runtime_ms < 60000 && val(r, "centers") >= 10 && val(r, "angles") >= 12;
            detail += "d" + std::to_string(d) + " rel=" + fmt("%.2e", val(r, "max_rel_error")) +
                      " t=" + fmt("%.1f", r.runtime_ms / 1000) + "s; ";
        }
        report(1, ok, detail);
    }
    {
        bool ok = true;
        std::string detail;
        for (int d : {1, 2}) {
            const ExperimentResult& r = get({"subordination", d});
            ok = ok && r.pass && val(r, "scalar_max_abs_error") < 1e-8 && val(r, "mass_max_abs_error") < 1e-8 &&
                 val(r, "operator_max_rel_error") < 1e-5;
            detail += "d" + std::to_string(d) + " scalar=" + fmt("%.1e", val(r, "scalar_max_abs_error")) +
                      " mass=" + fmt("%.1e", val(r, "mass_max_abs_error")) +
                      " op=" + fmt("%.1e", val(r, "operator_max_rel_error")) + "; ";
        }
        report(2, ok, detail);
    }
    {
        bool ok = true;
        std::string detail;
        for (int d : {1, 2}) {
            const ExperimentResult& r = get({"semigroup-laws", d});
            ok = ok && r.pass && val(r, "positivity_samples") >= 10000;
            detail += "d" + std::to_string(d) + " poisson=" + fmt("%.1e", val(r, "poisson_semigroup_error")) +
                      " heat=" + fmt("%.1e", val(r, "heat_semigroup_error")) +
                      " min=" + fmt("%.2g", val(r, "poisson_positivity_min")) + "; ";
        }
        report(3, ok, detail);
    }
    {
        bool ok = true;
        std::string detail;
        for (int d : {1, 2}) {
            const ExperimentResult& r = get({"kernel-trace-dimension", d});
            ok = ok && r.pass;
            detail += "d" + std::to_string(d) + " rel=" + fmt("%.1e", val(r, "max_rel_error")) + "; ";
        }
        // dim H_n = 2n + 1 on S^2
        ok = ok && dunkl::harmonic_dimension(2, 6) == 13;
        report(4, ok, detail);
    }
    group(5, {{"lemma2-bound", 1}, {"lemma2-bound", 2}, {"4-8-bound", 1}, {"4-8-bound", 2}}, "growth", "%.2g");
    group(6, {{"lemma3-capmeasure", 1}, {"lemma3-capmeasure", 2}, {"lemma4-4-2-capmeasure", 1},
              {"lemma4-4-2-capmeasure", 2}},
          "C_measure");
    {
        const ExperimentResult& a = get({"theorem-Mf-domination", 1});
        const ExperimentResult& b = get({"5-7-domination", 1});
        bool ok = a.pass && b.pass && val(a, "C_kappa0_sphere") <= 1 + 1e-6;
        report(7, ok,
               "C_sphere=" + fmt("%.4g", val(a, "C_sphere")) + " C_ball=" + fmt("%.4g", val(a, "C_ball")) +
                   " C_simplex=" + fmt("%.4g", val(b, "C_simplex")) +
                   " C_kappa0=" + fmt("%.4g", val(a, "C_kappa0_sphere")));
    }
    {
        bool ok = true;
        std::string detail;
        for (const char* n : {"weak11", "MCMB-weak11", "MCMT-weak11"}) {
            const ExperimentResult& r = get({n, 1});
            double s1 = val(r, "tau_eq_kappa_slope"), s2 = val(r, "tau_half_kappa_slope");
            ok = ok && r.pass && s1 < 0.1 && s2 < 0.1;
            detail += std::string(n) + " slopes=" + fmt("%.3g", s1) + "," + fmt("%.3g", s2) + "; ";
        }
        report(8, ok, detail);
    }
    {
        bool ok = true;
        std::string detail;
        for (const Run& r : std::vector<Run>{{"cesaro-vector", 1}, {"fefferman-stein", 1}}) {
            const ExperimentResult& res = get(r);
            ok = ok && res.pass;
            detail += r.name + " p2=" + fmt("%.3g", val(res, "vector_ratio_p2")) + "; ";
        }
        for (int d : {1, 2}) {
            const ExperimentResult& res = get({"multiplier-bound", d});
            ok = ok && res.pass && val(res, "operator_proxy_slope_max") < 0.1;
            detail += "multiplier d" + std::to_string(d) + " slope=" + fmt("%.2g", val(res, "operator_proxy_slope_max")) +
                      "; ";
        }
        report(9, ok, detail);
    }
    {
        bool ok = true;
        std::string detail;
        for (const Run& r : std::vector<Run>{{"BSintegral", 1}, {"BSintegral", 2}, {"T-B", 1}, {"T-B", 2},
                                             {"projBS-consistency", 1}, {"projTB-consistency", 1}}) {
            const ExperimentResult& res = get(r);
            const char* obs = r.name.rfind("proj", 0) == 0 ? "max_rel_error" : "rel_difference";
            ok = ok && res.pass;
            detail += key(r) + " " + obs + "=" + fmt("%.1e", val(res, obs)) + "; ";
        }
        report(10, ok, detail);
    }
    {
        // Rerun the quick experiments from scratch and compare both output formats byte for byte.
        bool ok = true;
        int compared = 0;
        for (const auto& [k, first] : cache) {
            if (first.runtime_ms > 10000) continue;
            Run r{first.name, first.config.d};
            ExperimentResult again = run(config(r));
            ok = ok && render(first, "json") == render(again, "json") && render(first, "csv") == render(again, "csv");
            ++compared;
        }
        report(11, ok && compared > 0, std::to_string(compared) + " runs rerun, json and csv identical");
    }
    return failures == 0 ? 0 : 1;
}
