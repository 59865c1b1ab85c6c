#include "typedld/experiment.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "typedld/rate.hpp"

namespace typedld {

namespace {

std::size_t worker_count(std::size_t requested, std::uint64_t tasks) {
  std::size_t t = requested == 0 ? std::thread::hardware_concurrency() : requested;
  t = std::max<std::size_t>(1, t);
  return static_cast<std::size_t>(std::min<std::uint64_t>(t, std::max<std::uint64_t>(1, tasks)));
}

// Runs fn(shard) for every shard; each shard is handled by exactly one worker.
template <class Fn>
void for_each_shard(std::uint64_t shards, std::size_t threads, Fn&& fn) {
  const auto workers = worker_count(threads, shards);
  if (workers == 1) {
    for (std::uint64_t s = 0; s < shards; ++s) fn(s);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (auto s = next++; s < shards; s = next++) fn(s);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t shard_samples(std::uint64_t samples, std::uint64_t shard) {
  return samples / kShards + (shard < samples % kShards ? 1 : 0);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const Json& require(const Json& body, const char* field) {
  if (!body.contains(field)) throw ParseError(std::string("config field '") + field + "' is missing");
  return body[field];
}

// A field holding either an inline JSON value or a path to a file.
struct Source {
  std::optional<std::string> text;  // file contents
  Json inline_json;
};

Source source_of(const ExperimentConfig& cfg, const Json& v) {
  if (v.is_string()) return {read_file(cfg.base_dir / v.get<std::string>()), Json()};
  return {std::nullopt, v};
}

Json json_of(const ExperimentConfig& cfg, const Json& v) {
  auto src = source_of(cfg, v);
  if (!src.text) return src.inline_json;
  try {
    return Json::parse(*src.text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("invalid JSON in '") + v.get<std::string>() + "': " + e.what());
  }
}

template <class Key>
std::set<std::string> labels_of(const Source& s) {
  return s.text ? labels_in_tsv<Key>(*s.text) : labels_in_json<Key>(s.inline_json);
}

template <class Key>
FiniteMeasure<Key> finite_of(const TypeAlphabet& alph, const Source& s) {
  return s.text ? finite_measure_from_tsv<Key>(alph, *s.text) : finite_measure_from_json<Key>(alph, s.inline_json);
}

template <class Key>
ProbMeasure<Key> prob_of(const TypeAlphabet& alph, const Source& s) {
  return s.text ? prob_measure_from_tsv<Key>(alph, *s.text) : prob_measure_from_json<Key>(alph, s.inline_json);
}

ConditionSpec spec_of(const ExperimentConfig& cfg, const Json& v) { return condition_spec_from_json(json_of(cfg, v)); }

double number_of(const Json& body, const char* field) {
  const auto& v = require(body, field);
  if (!v.is_number()) throw ParseError(std::string("config field '") + field + "' must be a number");
  return v.get<double>();
}

std::string fmt_num(double x) { return format_weight(x); }

}  // namespace

ExperimentConfig make_experiment_config(std::string kind, Json body, std::optional<std::uint64_t> seed,
                                        std::optional<OutputFormat> format, std::filesystem::path base_dir) {
  static const std::set<std::string> kinds{"sample", "measure", "rate", "enumerate", "decay", "lldp", "optimize"};
  if (!kinds.contains(kind)) throw ParseError("unknown experiment kind '" + kind + "'");
  if (!body.is_object()) throw ParseError("config must be a JSON object");
  ExperimentConfig cfg;
  cfg.kind = std::move(kind);
  cfg.base_dir = std::move(base_dir);
  if (body.contains("kind") && body["kind"] != cfg.kind) {
    throw ParseError("config kind '" + body["kind"].dump() + "' does not match subcommand '" + cfg.kind + "'");
  }
  if (body.contains("samples")) {
    const auto& s = body["samples"];
    if (!s.is_number_integer() || s.get<std::int64_t>() < 1) throw ParseError("config field 'samples' must be >= 1");
    cfg.samples = s.get<std::uint64_t>();
  }
  if (body.contains("threads")) {
    if (!body["threads"].is_number_unsigned()) throw ParseError("config field 'threads' must be a non-negative integer");
    cfg.threads = body["threads"].get<std::size_t>();
  }
  cfg.seed = seed;
  if (!cfg.seed && body.contains("seed")) {
    if (!body["seed"].is_number_unsigned()) throw ParseError("config field 'seed' must be an unsigned integer");
    cfg.seed = body["seed"].get<std::uint64_t>();
  }
  const bool stochastic = cfg.kind == "sample" || cfg.kind == "decay" ||
                          (cfg.kind == "enumerate" && body.contains("samples"));
  if (stochastic && !cfg.seed) throw ParseError("a seed is required for '" + cfg.kind + "'");
  cfg.format = format.value_or(cfg.kind == "decay" || cfg.kind == "lldp" ? OutputFormat::csv : OutputFormat::json);
  cfg.body = std::move(body);
  return cfg;
}

std::uint64_t count_event_hits(std::size_t n, std::uint64_t m, const ConstraintSet& event, std::uint64_t samples,
                               std::uint64_t seed, std::size_t threads) {
  std::vector<std::uint64_t> hits(kShards, 0);
  for_each_shard(kShards, threads, [&](std::uint64_t shard) {
    Rng rng(substream_seed(seed, (static_cast<std::uint64_t>(n) << 32) | shard));
    std::uint64_t h = 0;
    for (std::uint64_t i = shard_samples(samples, shard); i > 0; --i) {
      const auto g = sample_erdos_renyi(n, m, rng);
      if (event.contains(degree_histogram(g), n)) ++h;
    }
    hits[shard] = h;
  });
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  return total;
}

std::vector<ExperimentRecord> run_decay_study(const DecayStudy& study, std::vector<std::string>* warnings) {
  if (study.samples < 1) throw PreconditionError("decay study needs samples >= 1");
  for (std::size_t i = 1; i < study.n_values.size(); ++i) {
    if (study.n_values[i] <= study.n_values[i - 1]) throw PreconditionError("n values must be strictly increasing");
  }
  const double predicted = rate_infimum_for_event(study.c, study.event).value;
  std::vector<ExperimentRecord> out;
  for (auto n : study.n_values) {
    const double half = static_cast<double>(n) * study.c / 2.0;
    const double m = std::round(half);
    if (std::abs(half - m) > 1e-9) {
      if (warnings) warnings->push_back(fmt::format("skipping n = {}: n c / 2 = {} is not an integer", n, half));
      continue;
    }
    ExperimentRecord rec{n, study.event_id, std::nullopt, std::nullopt, predicted, study.samples, 0};
    rec.hits = count_event_hits(n, static_cast<std::uint64_t>(m), study.event, study.samples, study.seed, study.threads);
    if (rec.hits > 0) {
      const double ph = static_cast<double>(rec.hits) / static_cast<double>(study.samples);
      const double dn = static_cast<double>(n);
      rec.estimate = -std::log(ph) / dn + 0.0;
      // delta method: sd(log p_hat) = sqrt((1 - p) / (samples p)) = sqrt((1 - p) / hits)
      rec.stderr_estimate = std::sqrt((1.0 - ph) / static_cast<double>(rec.hits)) / dn;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::string records_to_csv(const std::vector<ExperimentRecord>& records) {
  std::string out = "n,event,estimate,stderr,predicted,samples,hits\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.n, r.event, r.estimate ? fmt_num(*r.estimate) : "no-hit",
                       r.stderr_estimate ? fmt_num(*r.stderr_estimate) : "", fmt_num(r.predicted), r.samples, r.hits);
  }
  return out;
}

Json records_to_json(const std::vector<ExperimentRecord>& records) {
  Json arr = Json::array();
  for (const auto& r : records) {
    Json j;
    j["n"] = r.n;
    j["event"] = r.event;
    j["estimate"] = r.estimate ? Json(*r.estimate) : Json();
    j["stderr"] = r.stderr_estimate ? Json(*r.stderr_estimate) : Json();
    j["predicted"] = r.predicted;
    j["samples"] = r.samples;
    j["hits"] = r.hits;
    if (!r.estimate) j["flag"] = "no-hit";
    arr.push_back(std::move(j));
  }
  return arr;
}

std::optional<double> fitted_decay_slope(const std::vector<ExperimentRecord>& records) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : records) {
    if (r.hits == 0) continue;
    pts.emplace_back(static_cast<double>(r.n),
                     -std::log(static_cast<double>(r.hits) / static_cast<double>(r.samples)));
  }
  if (pts.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [x, y] : pts) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
  }
  return sxy / sxx;
}

std::string gaps_to_csv(const std::vector<GapPoint>& gaps) {
  std::string out = "n,probability,exponent,entropy,gap\n";
  for (const auto& g : gaps) {
    out += fmt::format("{},{},{},{},{}\n", g.n, format_weight(g.probability), fmt_num(g.exponent), fmt_num(g.entropy),
                       fmt_num(g.gap));
  }
  return out;
}

Json gaps_to_json(const std::vector<GapPoint>& gaps) {
  Json arr = Json::array();
  for (const auto& g : gaps) {
    arr.push_back(Json{{"n", g.n},
                       {"probability", format_weight(g.probability)},
                       {"exponent", g.exponent},
                       {"entropy", g.entropy},
                       {"gap", g.gap}});
  }
  return arr;
}

std::map<std::string, std::uint64_t> monte_carlo_class_counts(const ConditionSpec& spec, std::uint64_t samples,
                                                              std::uint64_t seed, std::size_t threads) {
  block_plan(spec);  // fail fast on an inadmissible spec
  std::vector<std::map<std::string, std::uint64_t>> per_shard(kShards);
  for_each_shard(kShards, threads, [&](std::uint64_t shard) {
    Rng rng(substream_seed(seed, shard));
    auto& counts = per_shard[shard];
    for (std::uint64_t i = shard_samples(samples, shard); i > 0; --i) {
      const auto g = sample_conditional_graph(spec, rng);
      ++counts[class_key(*spec.alphabet, empirical_locality_measure(g))];
    }
  });
  std::map<std::string, std::uint64_t> total;
  for (const auto& m : per_shard) {
    for (const auto& [k, c] : m) total[k] += c;
  }
  return total;
}

DecayStudy decay_study_from_config(const ExperimentConfig& cfg) {
  const auto& body = cfg.body;
  DecayStudy study;
  study.c = number_of(body, "c");
  if (!(study.c > 0.0)) throw ParseError("config field 'c' must be positive");
  const auto& ns = require(body, "n");
  if (!ns.is_array() || ns.empty()) throw ParseError("config field 'n' must be a non-empty array");
  for (const auto& v : ns) {
    if (!v.is_number_unsigned() || v.get<std::size_t>() < 1) throw ParseError("entries of 'n' must be positive integers");
    study.n_values.push_back(v.get<std::size_t>());
  }
  for (std::size_t i = 1; i < study.n_values.size(); ++i) {
    if (study.n_values[i] <= study.n_values[i - 1]) throw ParseError("config field 'n' must be strictly increasing");
  }
  study.event = body.contains("event") ? constraint_set_from_json(json_of(cfg, body["event"]), default_support_cap(study.c))
                                       : ConstraintSet{default_support_cap(study.c), {}, {}};
  if (body.contains("event_id")) study.event_id = body["event_id"].get<std::string>();
  study.samples = cfg.samples;
  study.seed = cfg.seed.value();
  study.threads = cfg.threads;
  return study;
}

std::vector<LldpTarget> lldp_family_from_config(const ExperimentConfig& cfg) {
  const auto& fam = require(cfg.body, "family");
  if (!fam.is_array() || fam.empty()) throw ParseError("config field 'family' must be a non-empty array");
  std::vector<LldpTarget> out;
  for (const auto& item : fam) {
    if (!item.is_object() || !item.contains("spec") || !item.contains("target") || !item["target"].is_string()) {
      throw ParseError("family entries must be {\"spec\": ..., \"target\": \"<class key>\"}");
    }
    auto spec = spec_of(cfg, item["spec"]);
    auto target = parse_class_key(*spec.alphabet, item["target"].get<std::string>());
    out.push_back({std::move(spec), std::move(target)});
  }
  return out;
}

std::vector<ExperimentRecord> run_decay_study(const ExperimentConfig& config, std::vector<std::string>* warnings) {
  return run_decay_study(decay_study_from_config(config), warnings);
}

std::vector<GapPoint> run_lldp_study(const ExperimentConfig& config) {
  return lldp_exponent_gap(lldp_family_from_config(config));
}

Json run_measure(const ExperimentConfig& cfg) {
  const auto& g = require(cfg.body, "graph");
  if (!g.is_string()) throw ParseError("config field 'graph' must be a path");
  const auto graph = parse_graph(read_file(cfg.base_dir / g.get<std::string>()));
  const auto& alph = graph.alphabet();
  Json j;
  j["n"] = graph.node_count();
  j["edges"] = graph.edge_count();
  j["types"] = to_json(alph, empirical_type_measure(graph));
  j["links"] = to_json(alph, empirical_link_measure(graph));
  j["locality"] = to_json(alph, empirical_locality_measure(graph));
  j["degrees"] = to_json(alph, degree_distribution(graph));
  return j;
}

Json run_rate(const ExperimentConfig& cfg) {
  const auto& body = cfg.body;
  const double tol = body.contains("tol") ? number_of(body, "tol") : 1e-9;
  const auto p_src = source_of(cfg, require(body, "p"));
  if (body.contains("c")) {
    const double c = number_of(body, "c");
    if (!(c > 0.0)) throw PreconditionError("I_c needs c > 0");
    const TypeAlphabet none({"a"});
    return to_json(rate_I_c(c, prob_of<Degree>(none, p_src), tol));
  }
  const auto eta_src = source_of(cfg, require(body, "eta"));
  const auto pi_src = source_of(cfg, require(body, "pi"));
  std::set<std::string> labels;
  if (body.contains("alphabet")) {
    for (const auto& l : body["alphabet"]) labels.insert(l.get<std::string>());
  } else {
    labels = labels_of<TypeId>(eta_src);
    labels.merge(labels_of<TypePair>(pi_src));
    labels.merge(labels_of<LocalityKey>(p_src));
  }
  const TypeAlphabet alph(std::vector<std::string>(labels.begin(), labels.end()));
  return to_json(rate_J(alph, prob_of<TypeId>(alph, eta_src), finite_of<TypePair>(alph, pi_src),
                        prob_of<LocalityKey>(alph, p_src), tol));
}

Json run_optimize(const ExperimentConfig& cfg) {
  const auto& body = cfg.body;
  if (body.contains("c")) {
    const double c = number_of(body, "c");
    if (!(c > 0.0)) throw ParseError("config field 'c' must be positive");
    const auto cons = body.contains("constraints")
                          ? constraint_set_from_json(json_of(cfg, body["constraints"]), default_support_cap(c))
                          : ConstraintSet{default_support_cap(c), {}, {}};
    auto j = to_json(rate_infimum_for_event(c, cons));
    j["c"] = c;
    j["K"] = cons.K;
    j["poisson_tail"] = poisson_tail(c, static_cast<std::uint32_t>(cons.K));
    return j;
  }
  const auto& ref = require(body, "reference");
  if (!ref.is_array()) throw ParseError("config field 'reference' must be an array of K+1 weights");
  std::vector<double> q;
  for (const auto& v : ref) {
    if (!v.is_number()) throw ParseError("reference weights must be numbers");
    q.push_back(v.get<double>());
  }
  if (q.size() < 2) throw ParseError("reference needs at least two weights");
  const auto cons = constraint_set_from_json(json_of(cfg, require(body, "constraints")), q.size() - 1);
  return to_json(minimize_relative_entropy(q, cons));
}

Json run_enumerate(const ExperimentConfig& cfg) {
  const auto spec = spec_of(cfg, require(cfg.body, "spec"));
  auto rep = type_class_counts(spec);
  if (cfg.body.contains("event")) {
    const auto& ev = cfg.body["event"];
    if (!ev.is_string()) throw ParseError("config field 'event' must be a class key");
    const auto key = class_key(*spec.alphabet, parse_class_key(*spec.alphabet, ev.get<std::string>()));
    rep.event_probability = exact_event_probability(rep, [&](const ExactLocality& p) {
      return class_key(*spec.alphabet, p) == key;
    });
  }
  auto j = to_json(rep);
  if (cfg.body.contains("samples")) {
    const auto counts = monte_carlo_class_counts(spec, cfg.samples, *cfg.seed, cfg.threads);
    Json mc;
    mc["samples"] = cfg.samples;
    mc["seed"] = *cfg.seed;
    Json cj = Json::object();
    for (const auto& [k, c] : counts) cj[k] = c;
    mc["counts"] = std::move(cj);
    j["monte_carlo"] = std::move(mc);
  }
  return j;
}

std::string run_sample(const ExperimentConfig& cfg) {
  const auto& body = cfg.body;
  std::string out;
  for (std::uint64_t i = 0; i < cfg.samples; ++i) {
    Rng rng(substream_seed(*cfg.seed, i));
    if (body.contains("erdos_renyi")) {
      const auto& er = body["erdos_renyi"];
      const auto n = static_cast<std::size_t>(number_of(er, "n"));
      std::uint64_t m = 0;
      if (er.contains("m")) {
        m = er["m"].get<std::uint64_t>();
      } else {
        const double half = static_cast<double>(n) * number_of(er, "c") / 2.0;
        if (std::abs(half - std::round(half)) > 1e-9) throw PreconditionError("n c / 2 must be an integer");
        m = static_cast<std::uint64_t>(std::round(half));
      }
      out += write_graph(sample_erdos_renyi(n, m, rng));
    } else {
      out += write_graph(sample_conditional_graph(spec_of(cfg, require(body, "spec")), rng));
    }
  }
  return out;
}

std::string run_experiment(const ExperimentConfig& cfg, std::vector<std::string>* warnings) {
  auto dump = [&](const Json& j) { return j.dump(2) + "\n"; };
  if (cfg.kind == "sample") return run_sample(cfg);
  if (cfg.kind == "measure") return dump(run_measure(cfg));
  if (cfg.kind == "rate") return dump(run_rate(cfg));
  if (cfg.kind == "optimize") return dump(run_optimize(cfg));
  if (cfg.kind == "enumerate") return dump(run_enumerate(cfg));
  if (cfg.kind == "decay") {
    const auto recs = run_decay_study(cfg, warnings);
    return cfg.format == OutputFormat::csv ? records_to_csv(recs) : dump(records_to_json(recs));
  }
  if (cfg.kind == "lldp") {
    const auto gaps = run_lldp_study(cfg);
    return cfg.format == OutputFormat::csv ? gaps_to_csv(gaps) : dump(gaps_to_json(gaps));
  }
  throw ParseError("unknown experiment kind '" + cfg.kind + "'");
}

}  // namespace typedld
