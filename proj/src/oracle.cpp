#include "typedld/oracle.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <map>
#include <numeric>

namespace typedld {

namespace {

using BigInt = boost::multiprecision::cpp_int;

BigInt binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

// Lexicographic successor of a k-combination of [0, n); false after the last one.
bool next_combination(std::vector<std::uint64_t>& c, std::uint64_t n) {
  const auto k = c.size();
  for (std::size_t i = k; i-- > 0;) {
    if (c[i] < n - k + i) {
      ++c[i];
      for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

std::vector<std::uint64_t> first_combination(std::uint64_t k) {
  std::vector<std::uint64_t> c(k);
  std::iota(c.begin(), c.end(), 0);
  return c;
}

}  // namespace

std::uint64_t support_size(const BlockPlan& plan, std::uint64_t guard) {
  BigInt total = 1;
  for (const auto& b : plan.blocks) {
    total *= binomial(b.capacity, b.edges);
    if (total > guard) {
      throw EnumerationGuardError("support exceeds the enumeration bound of " + std::to_string(guard) +
                                  " graphs; use Monte Carlo sampling instead");
    }
  }
  return total.convert_to<std::uint64_t>();
}

SupportEnumerator::SupportEnumerator(const ConditionSpec& spec, std::uint64_t guard)
    : alphabet_(spec.alphabet), plan_(block_plan(spec)) {
  support_size_ = typedld::support_size(plan_, guard);
  types_ = canonical_types(plan_);
  for (const auto& b : plan_.blocks) combos_.push_back(first_combination(b.edges));
}

bool SupportEnumerator::advance() {
  for (std::size_t i = combos_.size(); i-- > 0;) {
    if (next_combination(combos_[i], plan_.blocks[i].capacity)) return true;
    combos_[i] = first_combination(plan_.blocks[i].edges);
  }
  return false;
}

std::optional<TypedGraph> SupportEnumerator::next() {
  if (done_) return std::nullopt;
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < combos_.size(); ++i) {
    for (auto idx : combos_[i]) edges.push_back(block_edge(plan_, plan_.blocks[i], idx));
  }
  TypedGraph g(alphabet_, types_, std::move(edges));
  done_ = !advance();
  return g;
}

std::string class_key(const TypeAlphabet& alph, const ExactLocality& p) {
  std::string out;
  for (const auto& [k, w] : p) {
    if (!out.empty()) out += ';';
    out += KeyCodec<LocalityKey>::encode(alph, k);
    out += '=';
    out += format_weight(w);
  }
  return out;
}

ExactLocality parse_class_key(const TypeAlphabet& alph, std::string_view key) {
  std::map<LocalityKey, Rational> atoms;
  while (!key.empty()) {
    const auto semi = key.find(';');
    const auto atom = key.substr(0, semi);
    const auto eq = atom.rfind('=');
    if (eq == std::string_view::npos) throw ParseError("class key atom must be 'key=weight'");
    if (!atoms.emplace(KeyCodec<LocalityKey>::decode(alph, atom.substr(0, eq)), parse_rational(atom.substr(eq + 1)))
             .second) {
      throw ParseError("duplicate atom in class key");
    }
    if (semi == std::string_view::npos) break;
    key.remove_prefix(semi + 1);
  }
  try {
    return ExactLocality(std::move(atoms));
  } catch (const PreconditionError& e) {
    throw ParseError(std::string("class key: ") + e.what());
  }
}

const TypeClass* EnumerationReport::find(std::string_view key) const {
  auto it = std::lower_bound(classes.begin(), classes.end(), key,
                             [](const TypeClass& c, std::string_view k) { return c.key < k; });
  return it != classes.end() && it->key == key ? &*it : nullptr;
}

Json to_json(const EnumerationReport& r) {
  Json j;
  j["spec"] = to_json(r.spec);
  j["support_size"] = r.support_size;
  Json classes = Json::array();
  for (const auto& c : r.classes) {
    Json cj;
    cj["key"] = c.key;
    cj["count"] = c.count;
    cj["probability"] = format_weight(r.probability(c));
    classes.push_back(std::move(cj));
  }
  j["classes"] = std::move(classes);
  if (r.event_probability) j["event_probability"] = format_weight(*r.event_probability);
  return j;
}

EnumerationReport type_class_counts(const ConditionSpec& spec, std::uint64_t guard) {
  SupportEnumerator en(spec, guard);
  std::map<std::string, TypeClass> classes;
  std::uint64_t seen = 0;
  while (auto g = en.next()) {
    auto p = empirical_locality_measure(*g);
    auto key = class_key(*spec.alphabet, p);
    auto it = classes.find(key);
    if (it == classes.end()) {
      classes.emplace(key, TypeClass{key, std::move(p), 1});
    } else {
      ++it->second.count;
    }
    ++seen;
  }
  EnumerationReport rep{spec, seen, {}, std::nullopt};
  for (auto& [k, c] : classes) rep.classes.push_back(std::move(c));
  return rep;
}

Rational exact_event_probability(const EnumerationReport& report, const LocalityEvent& event) {
  std::uint64_t hits = 0;
  for (const auto& c : report.classes) {
    if (event(c.measure)) hits += c.count;
  }
  return Rational(static_cast<std::int64_t>(hits), static_cast<std::int64_t>(report.support_size));
}

Rational exact_event_probability(const ConditionSpec& spec, const LocalityEvent& event) {
  return exact_event_probability(type_class_counts(spec), event);
}

EntropyNeighborhood::EntropyNeighborhood(ReferenceLaw q, const ProbMeasure<LocalityKey>& center, double eps)
    : q_(std::move(q)), center_entropy_(0.0), eps_(eps) {
  if (!(eps > 0.0)) throw PreconditionError("entropy neighbourhood needs eps > 0");
  center_entropy_ = entropy(center);
}

double EntropyNeighborhood::entropy(const ProbMeasure<LocalityKey>& mu) const {
  return relative_entropy_log(mu, [&](const LocalityKey& x) { return q_.log_pmf(x); });
}

bool EntropyNeighborhood::operator()(const ProbMeasure<LocalityKey>& mu) const {
  return entropy(mu) > threshold();
}

EntropyNeighborhood entropy_neighborhood(const TypeAlphabet& alph, const ProbMeasure<LocalityKey>& p,
                                         const ProbMeasure<TypeId>& eta, const FiniteMeasure<TypePair>& pi,
                                         double eps) {
  return EntropyNeighborhood(ReferenceLaw(alph, eta, pi), p, eps);
}

std::vector<GapPoint> lldp_exponent_gap(const std::vector<LldpTarget>& family, std::uint64_t guard) {
  std::vector<GapPoint> out;
  for (const auto& [spec, target] : family) {
    const auto rep = type_class_counts(spec, guard);
    const auto key = class_key(*spec.alphabet, target);
    const auto* cls = rep.find(key);
    if (cls == nullptr) {
      throw PreconditionError("target class " + key + " is empty at n = " + std::to_string(spec.n));
    }
    GapPoint pt{spec.n, rep.probability(*cls), 0.0, 0.0, 0.0};
    const double log_prob = std::log(static_cast<double>(cls->count)) - std::log(static_cast<double>(rep.support_size));
    pt.exponent = -log_prob / static_cast<double>(spec.n) + 0.0;
    const ReferenceLaw q(*spec.alphabet, spec.eta, spec.pi);
    pt.entropy = relative_entropy_log(target, [&](const LocalityKey& x) { return q.log_pmf(x); });
    pt.gap = std::abs(pt.exponent - pt.entropy);
    out.push_back(pt);
  }
  return out;
}

}  // namespace typedld
