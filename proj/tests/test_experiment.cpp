#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "support.hpp"
#include "typedld/experiment.hpp"

using namespace typedld;
using namespace testing_support;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("typedld_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run_cli(const TempDir& dir, const std::string& args) {
  const auto out = dir.path / "stdout.txt";
  const auto err = dir.path / "stderr.txt";
  const std::string cmd = std::string(TYPEDLD_CLI) + " " + args + " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {WEXITSTATUS(status), slurp(out), slurp(err)};
}

DecayStudy study(double c, std::vector<std::size_t> ns, ConstraintSet event, std::uint64_t samples) {
  DecayStudy s;
  s.c = c;
  s.n_values = std::move(ns);
  s.event = std::move(event);
  s.samples = samples;
  s.seed = 5;
  s.threads = 1;
  return s;
}

}  // namespace

TEST(DecayStudy, FullSpaceAndMeanEventsHaveZeroEstimate) {
  for (const auto& ev : {ConstraintSet{50, {}, {}}, ConstraintSet{50, {{LinearFunctional::mean(), 2.0}}, {}}}) {
    const auto recs = run_decay_study(study(2.0, {10, 20, 40}, ev, 500));
    ASSERT_EQ(recs.size(), 3u);
    for (const auto& r : recs) {
      EXPECT_EQ(r.hits, r.samples);
      ASSERT_TRUE(r.estimate.has_value());
      EXPECT_EQ(*r.estimate, 0.0);
      EXPECT_FALSE(std::signbit(*r.estimate));
      EXPECT_EQ(*r.stderr_estimate, 0.0);
      EXPECT_NEAR(r.predicted, 0.0, 1e-12);
    }
  }
}

TEST(DecayStudy, SkipsOddEdgeCountsWithWarning) {
  std::vector<std::string> warnings;
  const auto recs = run_decay_study(study(1.0, {9, 10, 11, 12}, ConstraintSet{50, {}, {}}, 10), &warnings);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].n, 10u);
  EXPECT_EQ(recs[1].n, 12u);
  EXPECT_EQ(warnings.size(), 2u);
}

TEST(DecayStudy, NoHitRowsAreFlagged) {
  ConstraintSet ev{50, {}, {{LinearFunctional::pmf_at(0), 0.9}}};
  const auto recs = run_decay_study(study(2.0, {20}, ev, 100));
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].hits, 0u);
  EXPECT_FALSE(recs[0].estimate.has_value());
  const auto csv = records_to_csv(recs);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,event,estimate,stderr,predicted,samples,hits");
  EXPECT_NE(csv.find("20,event,no-hit,,"), std::string::npos);
  EXPECT_EQ(records_to_json(recs)[0]["flag"], "no-hit");
  EXPECT_FALSE(fitted_decay_slope(recs).has_value());
}

TEST(DecayStudy, EstimateAgreesWithExactProbability) {
  // P{ at least 4 of 10 nodes isolated } in G(10, 10), by inclusion-exclusion.
  ConstraintSet ev{50, {}, {{LinearFunctional::pmf_at(0), 0.4}}};
  const auto recs = run_decay_study(study(2.0, {10}, ev, 1'000'000));
  ASSERT_EQ(recs.size(), 1u);
  const double exact = prob_at_least_isolated(10, 10, 4);
  const double ph = static_cast<double>(recs[0].hits) / 1e6;
  const double se = std::sqrt(exact * (1.0 - exact) / 1e6);
  EXPECT_NEAR(ph, exact, 4.0 * se);
  // the delta-method error bar on the exponent covers the exact exponent
  EXPECT_NEAR(*recs[0].estimate, -std::log(exact) / 10.0, 4.0 * *recs[0].stderr_estimate);
}

TEST(DecayStudy, HitCountsIndependentOfThreadCount) {
  ConstraintSet ev{50, {}, {{LinearFunctional::pmf_at(0), 0.3}}};
  const auto one = count_event_hits(12, 12, ev, 20000, 9, 1);
  EXPECT_EQ(one, count_event_hits(12, 12, ev, 20000, 9, 3));
  EXPECT_EQ(one, count_event_hits(12, 12, ev, 20000, 9, 8));
  EXPECT_NE(one, count_event_hits(12, 12, ev, 20000, 10, 1));
}

TEST(DecayStudy, FittedSlope) {
  std::vector<ExperimentRecord> recs;
  for (std::size_t n : {10, 20, 30}) {
    const double p = std::exp(-0.5 * static_cast<double>(n) - 1.0);
    const auto samples = std::uint64_t{1} << 50;
    recs.push_back({n, "e", std::nullopt, std::nullopt, 0.0, samples,
                    static_cast<std::uint64_t>(p * static_cast<double>(samples))});
  }
  EXPECT_NEAR(*fitted_decay_slope(recs), 0.5, 1e-6);
}

TEST(MonteCarloClassCounts, DeterministicAndThreadIndependent) {
  const auto spec = binary_cross_spec(4);
  const auto a = monte_carlo_class_counts(spec, 30000, 3, 1);
  EXPECT_EQ(a, monte_carlo_class_counts(spec, 30000, 3, 4));
  std::uint64_t total = 0;
  for (const auto& [k, c] : a) total += c;
  EXPECT_EQ(total, 30000u);
  EXPECT_EQ(a.size(), 3u);
}

TEST(ExperimentConfig, Validation) {
  EXPECT_THROW(make_experiment_config("decay", Json::parse(R"({"c":2,"n":[10]})"), std::nullopt, std::nullopt, "."),
               ParseError);
  EXPECT_THROW(make_experiment_config("plot", Json::object(), 1, std::nullopt, "."), ParseError);
  EXPECT_THROW(make_experiment_config("sample", Json::parse(R"({"samples":0})"), 1, std::nullopt, "."), ParseError);
  const auto cfg = make_experiment_config("decay", Json::parse(R"({"c":2,"n":[20,10],"seed":4})"), std::nullopt,
                                          std::nullopt, ".");
  EXPECT_EQ(cfg.seed, 4u);
  EXPECT_EQ(cfg.format, OutputFormat::csv);
  EXPECT_THROW(decay_study_from_config(cfg), ParseError);
}

TEST(Cli, MeasureMatchingGraph) {
  TempDir dir;
  dir.write("g.txt", "typedgraph v1\nn=4\ntypes=a a b b\ne 1 3\ne 2 4\n");
  dir.write("measure.json", R"({"graph":"g.txt"})");
  const auto r = run_cli(dir, "measure --config " + (dir.path / "measure.json").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["types"].dump(), R"({"a":0.5,"b":0.5})");
  EXPECT_EQ(j["links"].dump(), R"({"a,b":0.5,"b,a":0.5})");
  EXPECT_EQ(j["locality"].dump(), R"({"a|b:1":0.5,"b|a:1":0.5})");
  EXPECT_EQ(j["degrees"].dump(), R"({"1":1.0})");
}

TEST(Cli, RateInfeasible) {
  TempDir dir;
  dir.write("eta.tsv", "a\t0.5\nb\t0.5\n");
  dir.write("pi.tsv", "a,b\t1\nb,a\t1\n");
  dir.write("p.tsv", "a|b:2\t1\n");
  dir.write("rate.json", R"({"eta":"eta.tsv","pi":"pi.tsv","p":"p.tsv"})");
  const auto r = run_cli(dir, "rate --config " + (dir.path / "rate.json").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["value"], "inf");
  EXPECT_EQ(j["feasible"], false);
}

TEST(Cli, RateIcInline) {
  TempDir dir;
  dir.write("rate.json", R"({"c":2,"p":{"2":1}})");
  const auto r = run_cli(dir, "rate --config " + (dir.path / "rate.json").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(Json::parse(r.out)["value"].get<double>(), 2.0 - std::log(2.0), 1e-12);
}

TEST(Cli, OptimizeMeanOnly) {
  TempDir dir;
  dir.write("opt.json", R"({"c":2,"constraints":{"eq":[{"f":"mean","r":2}]}})");
  const auto r = run_cli(dir, "optimize --config " + (dir.path / "opt.json").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_NEAR(j["value"].get<double>(), 0.0, 1e-12);
  EXPECT_EQ(j["K"], 50);
  EXPECT_LT(j["poisson_tail"].get<double>(), 1e-40);
}

TEST(Cli, OptimizeInfeasibleExitsTwo) {
  TempDir dir;
  dir.write("opt.json", R"({"c":2,"constraints":{"K":5,"ge":[{"f":"pmf@0","r":0.7},{"f":"pmf@5","r":0.7}]}})");
  const auto r = run_cli(dir, "optimize --config " + (dir.path / "opt.json").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("infeasible"), std::string::npos);
}

TEST(Cli, LldpRowsAndGuard) {
  TempDir dir;
  dir.write("zero.json", R"({"family":[
    {"spec":{"n":4,"eta":{"a":0.5,"b":0.5},"pi":{}},"target":"a|=1/2;b|=1/2"},
    {"spec":{"n":6,"eta":{"a":0.5,"b":0.5},"pi":{}},"target":"a|=1/2;b|=1/2"}]})");
  const auto r = run_cli(dir, "lldp --config " + (dir.path / "zero.json").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "n,probability,exponent,entropy,gap\n4,1,0,0,0\n6,1,0,0,0\n");

  dir.write("big.json", R"({"family":[{"spec":{"n":40,"eta":{"a":0.5,"b":0.5},"pi":{"a,b":0.5}},"target":"a|b:1=1/2;b|a:1=1/2"}]})");
  const auto g = run_cli(dir, "lldp --config " + (dir.path / "big.json").string());
  EXPECT_EQ(g.code, 2);
  EXPECT_NE(g.err.find("100000000"), std::string::npos);
}

TEST(Cli, ParseErrorsExitOne) {
  TempDir dir;
  dir.write("bad.json", "{not json");
  EXPECT_EQ(run_cli(dir, "rate --config " + (dir.path / "bad.json").string()).code, 1);
  dir.write("g.txt", "typedgraph v1\nn=2\ntypes=a a\ne 2 1\n");
  dir.write("measure.json", R"({"graph":"g.txt"})");
  const auto r = run_cli(dir, "measure --config " + (dir.path / "measure.json").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 4"), std::string::npos);
  EXPECT_EQ(run_cli(dir, "measure").code, 1);
  dir.write("decay.json", R"({"c":2,"n":[10]})");
  EXPECT_EQ(run_cli(dir, "decay --config " + (dir.path / "decay.json").string()).code, 1);
}

TEST(Cli, InadmissibleSpecExitsTwo) {
  TempDir dir;
  dir.write("s.json", R"({"spec":{"n":3,"eta":{"a":0.5,"b":0.5},"pi":{}}})");
  const auto r = run_cli(dir, "enumerate --config " + (dir.path / "s.json").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("not an integer"), std::string::npos);
}

TEST(Cli, DeterministicOutputs) {
  TempDir dir;
  dir.write("decay.json", R"({"c":2,"n":[10,12],"event":{"ge":[{"f":"pmf@0","r":0.3}]},"samples":20000})");
  dir.write("enumerate.json", R"({"spec":{"n":4,"eta":{"a":0.5,"b":0.5},"pi":{"a,b":0.5}},"samples":20000})");
  dir.write("sample.json", R"({"erdos_renyi":{"n":8,"c":2},"samples":3})");
  for (const char* kind : {"decay", "enumerate", "sample"}) {
    const auto cfg = (dir.path / (std::string(kind) + ".json")).string();
    const auto a = run_cli(dir, std::string(kind) + " --config " + cfg + " --seed 17 --threads 1 --out " +
                                    (dir.path / "a.out").string());
    const auto b = run_cli(dir, std::string(kind) + " --config " + cfg + " --seed 17 --threads 3 --out " +
                                    (dir.path / "b.out").string());
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(slurp(dir.path / "a.out"), slurp(dir.path / "b.out")) << kind;
    EXPECT_FALSE(slurp(dir.path / "a.out").empty());
  }
  const auto json = run_cli(dir, "decay --config " + (dir.path / "decay.json").string() + " --seed 17 --format json");
  ASSERT_EQ(json.code, 0);
  EXPECT_EQ(Json::parse(json.out).size(), 2u);
}
