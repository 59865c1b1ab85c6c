// Acceptance checks; prints one PASS/FAIL line per criterion.
// Usage: acceptance [--criterion N]...   (no arguments runs all seven)

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "../optimizer_oracles.hpp"
#include "../support.hpp"
#include "typedld/experiment.hpp"

using namespace typedld;
using namespace testing_support;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// 1. psi(P) = (P1, P2) exactly on 1000 random typed graphs.
Outcome psi_consistency() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(20240601);
  std::uniform_int_distribution<std::size_t> size(1, 50), letters(1, 4);
  std::uniform_real_distribution<double> density(0.0, 0.25);
  int bad = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto g = random_graph(gen, size(gen), letters(gen), density(gen));
    const auto r = psi(empirical_locality_measure(g));
    if (!(r.types == empirical_type_measure(g) && r.links == empirical_link_measure(g))) ++bad;
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 10.0, fmt::format("{} of 1000 graphs inconsistent, {:.2f} s (limit 10 s)", bad, secs)};
}

// 2. The rate functions vanish at their reference laws.
Outcome zero_of_rate() {
  const auto t0 = Clock::now();
  std::vector<std::string> notes;
  bool ok = true;

  struct Case {
    std::size_t z;
    std::vector<double> eta;
    std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> pi;
  };
  const std::vector<Case> cases{
      {2, {0.5, 0.5}, {{0, 1, 0.5}}},
      {3, {0.2, 0.3, 0.5}, {{0, 0, 0.1}, {0, 1, 0.3}, {1, 2, 0.4}, {2, 2, 0.6}}},
  };
  for (const auto& c : cases) {
    const auto alph = alphabet(c.z);
    std::map<TypeId, double> eta;
    for (std::uint32_t a = 0; a < c.z; ++a) eta[TypeId{a}] = c.eta[a];
    std::map<TypePair, double> pi;
    for (const auto& [a, b, w] : c.pi) {
      pi[{TypeId{a}, TypeId{b}}] = w;
      pi[{TypeId{b}, TypeId{a}}] = w;
    }
    const TypeMeasure eta_m(eta);
    const LinkMeasure pi_m(pi);
    const ReferenceLaw q(*alph, eta_m, pi_m);
    std::uint32_t radius = 1;
    while (truncated_reference(q, radius).tail_mass >= 1e-8) ++radius;
    const auto t = truncated_reference(q, radius);
    const auto r = rate_J(*alph, eta_m, pi_m, t.measure);
    ok = ok && r.feasible && r.value < 1e-4;
    notes.push_back(fmt::format("J(|Z|={}, K={}, tail {:.1e}) = {:.3e}{}", c.z, radius, t.tail_mass, r.value,
                                r.feasible ? "" : " infeasible"));
  }
  for (double c : {0.5, 1.0, 2.0, 4.0}) {
    std::uint32_t K = 1;
    while (poisson_tail(c, K) >= 1e-12) ++K;
    std::map<Degree, double> m;
    double s = 0.0;
    for (Degree k = 0; k <= K; ++k) s += (m[k] = poisson_pmf(c, k));
    for (auto& [k, w] : m) w /= s;
    const auto r = rate_I_c(c, ProbMeasure<Degree>(m), 1e-6);
    ok = ok && r.feasible && r.value < 1e-6;
    notes.push_back(fmt::format("I_{}(K={}) = {:.3e}", c, K, r.value));
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 1.0;
  std::string detail;
  for (const auto& n : notes) detail += n + "; ";
  return {ok, detail + fmt::format("{:.3f} s (limit 1 s)", secs)};
}

std::vector<std::pair<std::string, ConditionSpec>> enumerable_specs() {
  const TypeId a{0}, b{1}, c{2};
  std::vector<std::pair<std::string, ConditionSpec>> out;
  out.emplace_back("binary n=4", binary_cross_spec(4));
  out.emplace_back("binary n=6", binary_cross_spec(6));
  out.emplace_back("binary n=8", binary_cross_spec(8));
  out.emplace_back("binary n=10", binary_cross_spec(10));
  out.emplace_back("single n=5 m=4", ConditionSpec::from_counts(alphabet(1), {5}, {{{a, a}, 4}}));
  out.emplace_back("single n=6 m=5", ConditionSpec::from_counts(alphabet(1), {6}, {{{a, a}, 5}}));
  out.emplace_back("single n=7 m=7", ConditionSpec::from_counts(alphabet(1), {7}, {{{a, a}, 7}}));
  out.emplace_back("binary 3+3 mixed",
                   ConditionSpec::from_counts(alphabet(2), {3, 3}, {{{a, a}, 1}, {{a, b}, 4}, {{b, b}, 1}}));
  out.emplace_back("ternary 2+2+2",
                   ConditionSpec::from_counts(alphabet(3), {2, 2, 2}, {{{a, a}, 1}, {{a, b}, 2}, {{b, c}, 2}}));
  return out;
}

BigInt independent_support_size(const ConditionSpec& spec) {
  BigInt s = 1;
  for (const auto& blk : block_plan(spec).blocks) s *= binom(blk.capacity, blk.edges);
  return s;
}

constexpr std::uint64_t kClassSamples = 1'000'000;
constexpr std::uint64_t kClassSeed = 314159;

// 3. Exact class probabilities are count / support; Monte Carlo agrees within 4 standard errors.
Outcome counting_identity() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::size_t classes = 0, worst_spec = 0;
  double worst_z = 0.0;
  std::string failures;
  const auto specs = enumerable_specs();
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const auto& [name, spec] = specs[s];
    const auto rep = type_class_counts(spec);
    if (BigInt(rep.support_size) != independent_support_size(spec) || rep.support_size > 1'000'000) {
      ok = false;
      failures += name + ": support size mismatch; ";
    }
    std::uint64_t total = 0;
    for (const auto& cls : rep.classes) {
      total += cls.count;
      const Rational direct = exact_event_probability(spec, [&](const ExactLocality& p) { return p == cls.measure; });
      const Rational ratio(static_cast<std::int64_t>(cls.count), static_cast<std::int64_t>(rep.support_size));
      if (direct != ratio || rep.probability(cls) != ratio) {
        ok = false;
        failures += name + ": class " + cls.key + " probability mismatch; ";
      }
    }
    if (total != rep.support_size) {
      ok = false;
      failures += name + ": class counts do not sum to the support; ";
    }
    const auto mc = monte_carlo_class_counts(spec, kClassSamples, substream_seed(kClassSeed, s));
    for (const auto& [key, hits] : mc) {
      if (rep.find(key) == nullptr) {
        ok = false;
        failures += name + ": sampled class " + key + " outside the support; ";
      }
    }
    for (const auto& cls : rep.classes) {
      ++classes;
      const double p = boost::rational_cast<double>(rep.probability(cls));
      const auto it = mc.find(cls.key);
      const double f = it == mc.end() ? 0.0 : static_cast<double>(it->second) / kClassSamples;
      const double se = std::sqrt(p * (1.0 - p) / kClassSamples);
      const double z = se > 0.0 ? std::abs(f - p) / se : (f == p ? 0.0 : kInfinity);
      if (z > worst_z) {
        worst_z = z;
        worst_spec = s;
      }
      if (z > 4.0) ok = false;
    }
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 300.0;
  return {ok, failures + fmt::format("{} specs, {} classes, worst |z| = {:.2f} ({}), {:.1f} s (limit 300 s)",
                                     specs.size(), classes, worst_z, specs[worst_spec].first, secs)};
}

// 4. LLDP exponent gap on the binary cross-edge family.
Outcome lldp_gap() {
  const auto t0 = Clock::now();
  std::vector<LldpTarget> family;
  for (std::size_t n : {4, 6, 8}) {
    auto spec = binary_cross_spec(n);
    auto target = parse_class_key(*spec.alphabet, "a|b:1=1/2;b|a:1=1/2");
    family.push_back({std::move(spec), std::move(target)});
  }
  const auto gaps = lldp_exponent_gap(family);
  const double env = [](double n) { return std::log(n) / n; }(6.0);
  const double C = (gaps[1].gap - gaps[0].gap) / env;
  bool ok = true;
  std::string detail;
  for (const auto& g : gaps) {
    const double dn = static_cast<double>(g.n);
    const double bound = gaps[0].gap + C * std::log(dn) / dn;
    const bool holds = g.n == 4 || g.gap <= bound + 1e-12;
    ok = ok && std::isfinite(g.gap) && holds;
    detail += fmt::format("n={} gap={:.4f} bound={:.4f}; ", g.n, g.gap, g.n == 4 ? gaps[0].gap : bound);
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 120.0;
  return {ok, detail + fmt::format("C={:.4f}, {:.2f} s (limit 120 s)", C, secs)};
}

constexpr std::uint64_t kDecaySeed = 271828;
const std::vector<std::size_t> kDecayN{50, 100, 150, 200};

ConstraintSet decay_event() {
  return ConstraintSet{default_support_cap(2.0), {}, {{LinearFunctional::pmf_at(0), 0.4}}};
}

// 5. Erdos-Renyi decay slope against V* = inf { H(p || q_2) : mean 2, p(0) >= 0.4 }.
Outcome decay_slope() {
  const auto t0 = Clock::now();
  const double c = 2.0;
  const auto event = decay_event();
  const double v_star = rate_infimum_for_event(c, event).value;
  const double oracle = pinned_tilt(poisson_reference(c, event.K), 0.4, c).value;
  const bool v_ok = std::abs(v_star - oracle) <= 1e-4;

  DecayStudy study;
  study.c = c;
  study.n_values = kDecayN;
  study.event = event;
  study.event_id = "p0_ge_0.4";
  study.samples = 1'000'000;
  study.seed = kDecaySeed;
  const auto recs = run_decay_study(study);

  std::string rows;
  for (const auto& r : recs) {
    rows += r.estimate ? fmt::format("n={} hits={} est={:.4f}+-{:.4f}; ", r.n, r.hits, *r.estimate, *r.stderr_estimate)
                       : fmt::format("n={} hits=0 (no-hit); ", r.n);
  }
  const auto slope = fitted_decay_slope(recs);
  bool slope_ok = false;
  bool monotone = true;
  if (slope) {
    slope_ok = std::abs(*slope - v_star) <= 0.25 * v_star;
    double prev = kInfinity;
    for (const auto& r : recs) {
      if (!r.estimate) {
        monotone = false;
        continue;
      }
      const double g = std::abs(*r.estimate - v_star);
      if (g > prev + 2.0 * *r.stderr_estimate) monotone = false;
      prev = g;
    }
  }
  // Exact P{D_z in Gamma} by inclusion-exclusion; its slope is reported, not judged.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto n : kDecayN) {
    const double p = prob_at_least_isolated(n, n, static_cast<std::uint64_t>(std::ceil(0.4 * static_cast<double>(n) - 1e-9)));
    rows += fmt::format("exact P(n={})={:.3e}; ", n, p);
    const double x = static_cast<double>(n), y = -std::log(p);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(kDecayN.size());
  const double exact_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double secs = seconds_since(t0);
  const bool ok = v_ok && slope_ok && monotone && secs < 900.0;
  return {ok, fmt::format("V*={:.6f} (oracle {:.6f}); {}fitted slope={}; exact-probability slope={:.4f}; {:.1f} s",
                          v_star, oracle, rows, slope ? fmt::format("{:.4f}", *slope) : std::string("unavailable"),
                          exact_slope, secs)};
}

// 6. Optimizer vs. primal grid search on 20 random problems with at most 3 free dimensions.
Outcome optimizer_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(777);
  double worst = 0.0;
  std::size_t active = 0;
  for (int t = 0; t < 20; ++t) {
    const auto pr = random_problem(gen);
    const auto opt = minimize_relative_entropy(pr.q_ref, pr.cons);
    const double grid = zoom_grid_minimum(pr.q_ref, pr.cons);
    worst = std::max(worst, std::isfinite(grid) ? std::abs(opt.value - grid) : kInfinity);
    for (double mu : opt.certificate.ge_multipliers) active += mu > 1e-9 ? 1 : 0;
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-4 && secs < 60.0,
          fmt::format("max |optimizer - grid| = {:.2e} over 20 problems ({} active inequalities), {:.1f} s (limit 60 s)",
                      worst, active, secs)};
}

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 7. Reruns of the criterion 3 and 5 experiments write byte-identical files.
Outcome determinism() {
  const auto t0 = Clock::now();
  const auto dir = std::filesystem::temp_directory_path() / "typedld_acceptance_determinism";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  auto run_all = [&](const std::string& tag, std::size_t threads) {
    std::vector<std::filesystem::path> files;
    const auto specs = enumerable_specs();
    for (std::size_t s = 0; s < specs.size(); ++s) {
      Json body{{"spec", to_json(specs[s].second)}, {"samples", kClassSamples}, {"threads", threads}};
      const auto cfg = make_experiment_config("enumerate", body, substream_seed(kClassSeed, s), std::nullopt, dir);
      files.push_back(dir / fmt::format("classes_{}_{}.json", s, tag));
      std::ofstream(files.back(), std::ios::binary) << run_experiment(cfg);
    }
    Json n_list = kDecayN;
    Json body{{"c", 2.0},
              {"n", n_list},
              {"event", to_json(decay_event())},
              {"event_id", "p0_ge_0.4"},
              {"samples", 1'000'000},
              {"threads", threads}};
    const auto cfg = make_experiment_config("decay", body, kDecaySeed, OutputFormat::csv, dir);
    files.push_back(dir / fmt::format("decay_{}.csv", tag));
    std::ofstream(files.back(), std::ios::binary) << run_experiment(cfg);
    return files;
  };
  const auto first = run_all("first", 1);
  const auto second = run_all("second", 0);
  std::size_t same = 0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    const auto a = read_all(first[i]);
    if (!a.empty() && a == read_all(second[i])) ++same;
  }
  std::filesystem::remove_all(dir);
  return {same == first.size(),
          fmt::format("{} of {} output files byte-identical across reruns (1 vs. auto threads), {:.1f} s", same,
                      first.size(), seconds_since(t0))};
}

const std::vector<std::pair<const char*, std::function<Outcome()>>> kCriteria{
    {"psi consistency on random typed graphs", psi_consistency},
    {"rate functions vanish at the reference law", zero_of_rate},
    {"counting identity and Monte Carlo class frequencies", counting_identity},
    {"finite-n exponent gap envelope", lldp_gap},
    {"Erdos-Renyi decay slope vs. optimizer infimum", decay_slope},
    {"optimizer vs. grid-search oracle", optimizer_oracle},
    {"determinism of experiment outputs", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      selected.push_back(std::atoi(argv[++i]));
    } else {
      std::cerr << "usage: acceptance [--criterion N]...\n";
      return 2;
    }
  }
  if (selected.empty()) {
    for (int i = 1; i <= static_cast<int>(kCriteria.size()); ++i) selected.push_back(i);
  }
  bool all = true;
  for (int id : selected) {
    if (id < 1 || id > static_cast<int>(kCriteria.size())) {
      std::cerr << "unknown criterion " << id << "\n";
      return 2;
    }
    const auto& [name, fn] = kCriteria[static_cast<std::size_t>(id - 1)];
    Outcome o{false, ""};
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << o.detail << std::endl;
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
