#include "typedld/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <unordered_set>

namespace typedld {

std::uint64_t Rng::uniform_below(std::uint64_t bound) {
  if (bound == 0) throw PreconditionError("uniform_below: bound must be positive");
  // Reject the lowest (2^64 mod bound) outputs so every residue is equally likely.
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t r = next();
    if (r >= threshold) return r % bound;
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

ConditionSpec ConditionSpec::from_counts(std::shared_ptr<const TypeAlphabet> alphabet,
                                         const std::vector<std::uint64_t>& type_counts,
                                         const std::map<TypePair, std::uint64_t>& block_edges) {
  if (!alphabet || type_counts.size() != alphabet->size()) {
    throw PreconditionError("type_counts must have one entry per alphabet letter");
  }
  std::uint64_t n = 0;
  for (auto c : type_counts) n += c;
  if (n == 0) throw PreconditionError("spec needs at least one node");
  const double dn = static_cast<double>(n);
  std::map<TypeId, double> eta;
  for (std::uint32_t a = 0; a < type_counts.size(); ++a) {
    eta[TypeId{a}] = static_cast<double>(type_counts[a]) / dn;
  }
  std::map<TypePair, double> pi;
  for (const auto& [ab, m] : block_edges) {
    if (ab.second < ab.first) throw PreconditionError("block keys must satisfy a <= b");
    if (ab.first == ab.second) {
      pi[ab] = 2.0 * static_cast<double>(m) / dn;
    } else {
      pi[ab] = static_cast<double>(m) / dn;
      pi[TypePair{ab.second, ab.first}] = static_cast<double>(m) / dn;
    }
  }
  return ConditionSpec{std::move(alphabet), static_cast<std::size_t>(n), ProbMeasure<TypeId>(std::move(eta)),
                       FiniteMeasure<TypePair>(std::move(pi))};
}

Json to_json(const ConditionSpec& spec) {
  Json j;
  j["n"] = spec.n;
  j["alphabet"] = spec.alphabet->symbols();
  j["eta"] = to_json(*spec.alphabet, spec.eta);
  j["pi"] = to_json(*spec.alphabet, spec.pi);
  return j;
}

ConditionSpec condition_spec_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("condition spec must be a JSON object");
  if (!j.contains("n") || !j["n"].is_number_unsigned()) throw ParseError("spec field 'n' must be a positive integer");
  if (!j.contains("eta")) throw ParseError("spec field 'eta' is missing");
  std::set<std::string> labels;
  if (j.contains("alphabet")) {
    if (!j["alphabet"].is_array()) throw ParseError("spec field 'alphabet' must be an array");
    for (const auto& l : j["alphabet"]) {
      if (!l.is_string()) throw ParseError("alphabet entries must be strings");
      labels.insert(l.get<std::string>());
    }
  } else {
    labels = labels_in_json<TypeId>(j["eta"]);
    if (j.contains("pi")) labels.merge(labels_in_json<TypePair>(j["pi"]));
  }
  std::shared_ptr<const TypeAlphabet> alph;
  try {
    alph = std::make_shared<const TypeAlphabet>(std::vector<std::string>(labels.begin(), labels.end()));
  } catch (const PreconditionError& e) {
    throw ParseError(std::string("spec alphabet: ") + e.what());
  }
  auto eta = prob_measure_from_json<TypeId>(*alph, j["eta"]);
  auto pi = j.contains("pi") ? finite_measure_from_json<TypePair>(*alph, j["pi"]) : FiniteMeasure<TypePair>{};
  // An off-diagonal entry given in one orientation only is mirrored.
  auto mirrored = pi.weights();
  for (const auto& [ab, w] : pi) mirrored.try_emplace(TypePair{ab.second, ab.first}, w);
  pi = FiniteMeasure<TypePair>(std::move(mirrored));
  const auto n = j["n"].get<std::size_t>();
  if (n == 0) throw ParseError("spec field 'n' must be a positive integer");
  return ConditionSpec{std::move(alph), n, std::move(eta), std::move(pi)};
}

namespace {

std::optional<std::uint64_t> near_integer(double x) {
  const double r = std::round(x);
  if (r < 0.0 || std::abs(x - r) > 1e-9 * std::max(1.0, std::abs(x))) return std::nullopt;
  return static_cast<std::uint64_t>(r);
}

// Either fills `plan` or returns the first violation.
std::string build_plan(const ConditionSpec& spec, BlockPlan& plan) {
  const auto& alph = *spec.alphabet;
  const auto z = alph.size();
  if (spec.n == 0) return "n must be at least 1";
  const double dn = static_cast<double>(spec.n);
  plan.n = spec.n;
  plan.type_counts.assign(z, 0);
  plan.offsets.assign(z, 0);
  std::uint64_t total = 0;
  for (const auto& [a, w] : spec.eta) {
    if (index_of(a) >= z) return "eta has a type outside the alphabet";
    const auto c = near_integer(dn * w);
    if (!c) {
      return "n*eta(" + alph.label(a) + ") = " + format_weight(dn * w) + " is not an integer";
    }
    plan.type_counts[index_of(a)] = *c;
  }
  for (std::size_t a = 0; a < z; ++a) {
    plan.offsets[a] = total;
    total += plan.type_counts[a];
  }
  if (total != spec.n) return "sum_a n*eta(a) = " + std::to_string(total) + " differs from n";
  for (const auto& [ab, w] : spec.pi) {
    if (index_of(ab.first) >= z || index_of(ab.second) >= z) return "pi has a type pair outside the alphabet";
    const double sym = spec.pi.weight(TypePair{ab.second, ab.first});
    if (std::abs(sym - w) > 1e-9 * std::max(1.0, w)) {
      return "pi is not symmetric at (" + alph.label(ab.first) + "," + alph.label(ab.second) + ")";
    }
    if (ab.second < ab.first) continue;
    const auto na = plan.type_counts[index_of(ab.first)];
    const auto nb = plan.type_counts[index_of(ab.second)];
    const std::string name = alph.label(ab.first) + "," + alph.label(ab.second);
    Block blk{ab.first, ab.second, 0, 0};
    if (ab.first == ab.second) {
      const auto m = near_integer(dn * w / 2.0);
      if (!m) return "n*pi(" + name + ")/2 = " + format_weight(dn * w / 2.0) + " is not an integer";
      blk.capacity = na * (na - (na > 0 ? 1 : 0)) / 2;
      blk.edges = *m;
      if (blk.edges > blk.capacity) {
        return "block (" + name + ") needs " + std::to_string(blk.edges) + " links but capacity n_a(n_a-1)/2 is " +
               std::to_string(blk.capacity);
      }
    } else {
      const auto m = near_integer(dn * w);
      if (!m) return "n*pi(" + name + ") = " + format_weight(dn * w) + " is not an integer";
      blk.capacity = na * nb;
      blk.edges = *m;
      if (blk.edges > blk.capacity) {
        return "block (" + name + ") needs " + std::to_string(blk.edges) + " links but capacity n_a*n_b is " +
               std::to_string(blk.capacity);
      }
    }
    if (blk.edges > 0) plan.blocks.push_back(blk);
  }
  return {};
}

}  // namespace

AdmissibilityReport admissible(const ConditionSpec& spec) {
  BlockPlan plan;
  auto violation = build_plan(spec, plan);
  return {violation.empty(), std::move(violation)};
}

BlockPlan block_plan(const ConditionSpec& spec) {
  BlockPlan plan;
  if (auto violation = build_plan(spec, plan); !violation.empty()) throw InadmissibleSpec(violation);
  return plan;
}

std::vector<TypeId> canonical_types(const BlockPlan& plan) {
  std::vector<TypeId> types;
  types.reserve(plan.n);
  for (std::uint32_t a = 0; a < plan.type_counts.size(); ++a) {
    types.insert(types.end(), plan.type_counts[a], TypeId{a});
  }
  return types;
}

Edge block_edge(const BlockPlan& plan, const Block& block, std::uint64_t index) {
  const auto oa = plan.offsets[index_of(block.a)];
  if (block.a == block.b) {
    // colex: index = y(y-1)/2 + x with x < y
    auto y = static_cast<std::uint64_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(index))) / 2.0);
    while (y * (y - 1) / 2 > index) --y;
    while ((y + 1) * y / 2 <= index) ++y;
    const auto x = index - y * (y - 1) / 2;
    return {static_cast<std::uint32_t>(oa + x), static_cast<std::uint32_t>(oa + y)};
  }
  const auto nb = plan.type_counts[index_of(block.b)];
  const auto ob = plan.offsets[index_of(block.b)];
  return {static_cast<std::uint32_t>(oa + index / nb), static_cast<std::uint32_t>(ob + index % nb)};
}

std::vector<std::uint64_t> sample_index_subset(std::uint64_t universe, std::uint64_t m, Rng& rng) {
  if (m > universe) throw PreconditionError("cannot choose more elements than the universe holds");
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(m);
  for (std::uint64_t j = universe - m; j < universe; ++j) {
    const auto t = rng.uniform_below(j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<std::uint64_t> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

TypedGraph sample_conditional_graph(const ConditionSpec& spec, Rng& rng) {
  const auto plan = block_plan(spec);
  std::vector<Edge> edges;
  for (const auto& blk : plan.blocks) {
    for (auto idx : sample_index_subset(blk.capacity, blk.edges, rng)) {
      edges.push_back(block_edge(plan, blk, idx));
    }
  }
  return TypedGraph(spec.alphabet, canonical_types(plan), std::move(edges));
}

std::shared_ptr<const TypeAlphabet> single_type_alphabet() {
  static const auto alph = std::make_shared<const TypeAlphabet>(std::vector<std::string>{"a"});
  return alph;
}

TypedGraph sample_erdos_renyi(std::size_t n, std::uint64_t m, Rng& rng) {
  if (n == 0) throw PreconditionError("Erdos-Renyi graph needs n >= 1");
  const std::uint64_t pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (m > pairs) {
    throw PreconditionError("m = " + std::to_string(m) + " exceeds n(n-1)/2 = " + std::to_string(pairs));
  }
  BlockPlan plan;
  plan.n = n;
  plan.type_counts = {n};
  plan.offsets = {0};
  const Block blk{TypeId{0}, TypeId{0}, pairs, m};
  std::vector<Edge> edges;
  edges.reserve(m);
  for (auto idx : sample_index_subset(pairs, m, rng)) edges.push_back(block_edge(plan, blk, idx));
  return TypedGraph(single_type_alphabet(), std::vector<TypeId>(n, TypeId{0}), std::move(edges));
}

}  // namespace typedld
