#include <cmath>
#include <set>
#include <string>

#include <boost/math/special_functions/legendre.hpp>
#include <gtest/gtest.h>

#include <dunkl/harness.hpp>

using namespace dunkl::harness;

namespace {

ExperimentConfig named(const std::string& name)
{
    ExperimentConfig c;
    c.experiment = name;
    return c;
}

} // namespace

TEST(Registry, HasAllExperiments)
{
    const std::set<std::string> expected{"denoM1f-identity", "subordination", "semigroup-laws", "kernel-trace-dimension",
                                         "lemma2-bound", "lemma3-capmeasure", "lemma4-4-2-capmeasure",
                                         "theorem-Mf-domination", "weak11", "MCM-lp", "3-6-1-pointwise",
                                         "fefferman-stein", "cesaro-vector", "multiplier-bound", "littlewood-paley",
                                         "BSintegral", "T-B", "projBS-consistency", "projTB-consistency",
                                         "MCMB-weak11", "MCMT-weak11", "4-8-bound", "5-7-domination"};
    std::set<std::string> got;
    for (const auto& e : registry()) {
        got.insert(e.name);
        EXPECT_FALSE(e.anchor.empty());
    }
    EXPECT_EQ(got, expected);
    EXPECT_EQ(registry().size(), expected.size());
}

TEST(Config, ResolveFillsDefaults)
{
    Resolved r = resolve(named("denoM1f-identity"));
    EXPECT_EQ(r.d, 1);
    EXPECT_EQ(r.kappa, (std::vector<double>{0.5, 1.0}));
    EXPECT_EQ(r.thetas, 12);
    ExperimentConfig c = named("denoM1f-identity");
    c.dimension = 2;
    r = resolve(c);
    EXPECT_EQ(r.kappa, (std::vector<double>{1.0, 2.0, 0.5}));
    EXPECT_EQ(r.tau, r.kappa);
    EXPECT_NEAR(r.delta, 4.1, 1e-15);
}

TEST(Config, RejectsInvalidConfigurations)
{
    EXPECT_THROW(resolve(named("no-such-experiment")), ConfigError);
    ExperimentConfig c = named("weak11");
    c.dimension = 2;
    EXPECT_THROW(resolve(c), ConfigError);
    c = named("BSintegral");
    c.kappa = std::vector<double>{0.5, 1.0, 2.0};
    EXPECT_THROW(resolve(c), ConfigError);
    c = named("lemma3-capmeasure");
    c.tau = std::vector<double>{-0.5, 1.0};
    EXPECT_THROW(resolve(c), ConfigError);
    c = named("MCM-lp");
    c.p = 1.0;
    EXPECT_THROW(resolve(c), ConfigError);
    c = named("BSintegral");
    c.output.format = "xml";
    EXPECT_THROW(resolve(c), ConfigError);
}

TEST(Config, JsonParsing)
{
    auto c = config_from_json(json::parse(R"({"experiment":"T-B","dimension":2,"kappa":[1,2,0.5],"seed":5,
        "output":{"path":"x.csv","format":"csv"}})"));
    EXPECT_EQ(c.experiment, "T-B");
    EXPECT_EQ(*c.dimension, 2);
    EXPECT_EQ(c.seed, 5u);
    EXPECT_EQ(c.output.format, "csv");
    EXPECT_THROW(config_from_json(json::parse(R"({"experiment":"T-B","colour":1})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"dimension":1})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"experiment":"T-B","kappa":"0.5,1"})")), ConfigError);
    EXPECT_THROW(config_from_json(json::parse(R"({"experiment":"T-B","output":{"file":"a"}})")), ConfigError);
}

TEST(Config, SuiteParsing)
{
    EXPECT_THROW(suite_from_json(json::parse("[]")), ConfigError);
    EXPECT_THROW(suite_from_json(json::parse(R"({"experiments":[]})")), ConfigError);
    EXPECT_THROW(suite_from_json(json::parse(R"({"runs":[]})")), ConfigError);
    auto s = suite_from_json(json::parse(R"([{"experiment":"T-B"},{"experiment":"T-B"}])"));
    EXPECT_EQ(s.size(), 2u);
    EXPECT_THROW(run_suite({}), ConfigError);
}

TEST(Runs, FastExperimentsPass)
{
    for (const char* name : {"BSintegral", "T-B", "projBS-consistency", "projTB-consistency", "kernel-trace-dimension"}) {
        for (int d : {1, 2}) {
            ExperimentConfig c = named(name);
            const Experiment* e = find_experiment(name);
            if (std::find(e->dims.begin(), e->dims.end(), d) == e->dims.end()) continue;
            c.dimension = d;
            ExperimentResult r = run(c);
            EXPECT_TRUE(r.pass) << name << " d=" << d << " " << r.error;
            EXPECT_EQ(r.refinement_trace.size(), 2u);
        }
    }
}

TEST(Runs, DuplicateSuiteEntriesBothRun)
{
    SuiteSummary s = run_suite({named("T-B"), named("T-B")});
    ASSERT_EQ(s.results.size(), 2u);
    EXPECT_TRUE(s.all_pass());
    EXPECT_EQ(render(s.results[0], "json"), render(s.results[1], "json"));
}

TEST(Runs, CesaroRejectsSmallDeltaUnlessOverridden)
{
    ExperimentConfig c = named("cesaro-vector");
    c.delta = 0.5;
    EXPECT_THROW(run(c), ConfigError);
}

TEST(Output, DeterministicAndComplete)
{
    ExperimentConfig c = named("lemma2-bound");
    c.seed = 42;
    ExperimentResult a = run(c), b = run(c);
    EXPECT_EQ(render(a, "json"), render(b, "json"));
    EXPECT_EQ(render(a, "csv"), render(b, "csv"));
    json j = result_json(a);
    for (const char* key : {"name", "config", "observed_constants", "pass", "refinement_trace"}) EXPECT_TRUE(j.contains(key));
    EXPECT_FALSE(j.contains("runtime_ms"));
    EXPECT_TRUE(result_json(a, true).contains("runtime_ms"));
    std::string csv = render(a, "csv");
    EXPECT_EQ(csv.rfind("experiment,section,key,value\n", 0), 0u);
    EXPECT_NE(csv.find("lemma2-bound,result,pass,"), std::string::npos);
    // A different seed changes the sample.
    c.seed = 43;
    EXPECT_NE(render(run(c), "json"), render(a, "json"));
}

TEST(GramSchmidt, LegendreFromLebesgueMoments)
{
    // Moments of dx on [-1,1]: orthonormal polynomials are sqrt((2n+1)/2) P_n.
    detail::MomentGramSchmidt gs(6, [](int k) -> long double { return k % 2 ? 0.0L : 2.0L / (k + 1); });
    std::vector<double> c{0.3, -1.0, 0.5, 0.0, 2.0};  // 0.3 - x + x^2/2 + 2 x^4
    double x = 0.37;
    // proj_n f = <f, p_n> p_n with p_n = sqrt((2n+1)/2) P_n.
    for (int n = 0; n <= 4; ++n) {
        double inner = 0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            // int x^k P_n by 40-point Gauss-Legendre
            auto r = dunkl::gauss_legendre_rule(40);
            for (std::size_t q = 0; q < r.size(); ++q) {
                inner += c[k] * std::pow(r.nodes[q], k) * boost::math::legendre_p(n, r.nodes[q]) * r.weights[q];
            }
        }
        double ref = inner * (2 * n + 1) / 2.0 * boost::math::legendre_p(n, x);
        EXPECT_NEAR(static_cast<double>(gs.project(n, c, x)), ref, 1e-13) << n;
    }
}
