// dunkl-sphere: run the verification experiments of the library.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <dunkl/harness.hpp>

namespace h = dunkl::harness;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kConfig = 2;

std::vector<double> parse_list(const std::string& s, const std::string& what)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw h::ConfigError(what + ": cannot parse '" + item + "' as a number");
        }
    }
    if (out.empty()) throw h::ConfigError(what + ": empty list");
    return out;
}

void report(const h::ExperimentResult& r)
{
    std::fprintf(stderr, "%-24s %s  %.0f ms%s%s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL", r.runtime_ms,
                 r.error.empty() ? "" : "  ", r.error.c_str());
    for (const auto& w : r.warnings) std::fprintf(stderr, "  warning: %s\n", w.c_str());
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Weighted h-harmonic analysis on the sphere, ball and simplex: verification experiments"};
    app.require_subcommand(1);

    struct {
        std::string experiment, kappa, tau, out, format = "json";
        int d = 0, grid = 0, thetas = 0;
        double p = 0, delta = 0;
        std::uint64_t seed = 1;
        bool allow_small_delta = false, with_timing = false;
    } o;

    auto* run = app.add_subcommand("run", "Run one experiment");
    run->add_option("--experiment", o.experiment, "Experiment name (see list)")->required();
    auto* od = run->add_option("--d", o.d, "Dimension d in {1,2}");
    auto* ok = run->add_option("--kappa", o.kappa, "Multiplicities a,b[,c]");
    auto* ot = run->add_option("--tau", o.tau, "Weight exponents a,b[,c]");
    auto* op = run->add_option("--p", o.p, "Exponent p > 1");
    auto* odel = run->add_option("--delta", o.delta, "Cesaro order delta");
    auto* og = run->add_option("--grid-exactness", o.grid, "Grid size or quadrature exactness");
    auto* oth = run->add_option("--theta-count", o.thetas, "Number of cap radii");
    run->add_option("--seed", o.seed, "Random seed");
    run->add_option("--out", o.out, "Result file");
    run->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    run->add_flag("--allow-small-delta", o.allow_small_delta, "Permit delta <= lambda_kappa");
    run->add_flag("--with-timing", o.with_timing, "Include runtime_ms in the result file");

    std::string config, suite_out, suite_format = "json";
    bool suite_timing = false;
    auto* suite = app.add_subcommand("suite", "Run a list of experiments (default suite without --config)");
    suite->add_option("--config", config, "JSON file: array of configurations");
    suite->add_option("--out", suite_out, "Summary file");
    suite->add_option("--format", suite_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    suite->add_flag("--with-timing", suite_timing, "Include runtime_ms in the summary");

    auto* list = app.add_subcommand("list", "List experiments with the statements they check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kPass : kConfig;
    }

    try {
        if (list->parsed()) {
            for (const auto& e : h::registry()) std::printf("%-24s %s\n", e.name.c_str(), e.anchor.c_str());
            return kPass;
        }
        if (run->parsed()) {
            h::ExperimentConfig c;
            c.experiment = o.experiment;
            if (od->count()) c.dimension = o.d;
            if (ok->count()) c.kappa = parse_list(o.kappa, "--kappa");
            if (ot->count()) c.tau = parse_list(o.tau, "--tau");
            if (op->count()) c.p = o.p;
            if (odel->count()) c.delta = o.delta;
            if (og->count()) c.grid_exactness = o.grid;
            if (oth->count()) c.theta_count = o.thetas;
            c.seed = o.seed;
            c.output = {o.out, o.format};
            c.allow_small_delta = o.allow_small_delta;
            h::ExperimentResult r = h::run(c);
            std::string text = h::render(r, o.format, o.with_timing);
            if (o.out.empty()) {
                std::fwrite(text.data(), 1, text.size(), stdout);
            } else {
                h::write_text(o.out, text);
            }
            report(r);
            return r.pass ? kPass : kFail;
        }
        std::vector<h::ExperimentConfig> cfgs;
        if (config.empty()) {
            cfgs = h::default_suite();
        } else {
            std::ifstream f(config);
            if (!f) throw h::ConfigError("cannot read " + config);
            h::json j;
            try {
                j = h::json::parse(f);
            } catch (const h::json::parse_error& e) {
                throw h::ConfigError(std::string("invalid JSON in ") + config + ": " + e.what());
            }
            cfgs = h::suite_from_json(j);
        }
        // Validate everything before running anything.
        for (const auto& c : cfgs) h::resolve(c);
        h::SuiteSummary s = h::run_suite(cfgs, report);
        std::string text = suite_format == "csv" ? h::summary_csv(s, suite_timing)
                                                 : h::summary_json(s, suite_timing).dump(2) + "\n";
        if (suite_out.empty()) {
            std::fwrite(text.data(), 1, text.size(), stdout);
        } else {
            h::write_text(suite_out, text);
        }
        std::fprintf(stderr, "%zu/%zu passed\n", s.passed, s.results.size());
        if (s.config_error) return kConfig;
        return s.all_pass() ? kPass : kFail;
    } catch (const h::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kConfig;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kConfig;
    }
}
