#pragma once

// Finite measures over the type alphabet, type pairs, locality keys and degrees,
// plus the marginal map sending a locality measure to its (type, link) pair.

#include <boost/rational.hpp>

#include <compare>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "typedld/errors.hpp"

namespace typedld {

using Rational = boost::rational<std::int64_t>;
using Json = nlohmann::ordered_json;

inline double to_double(double w) { return w; }
inline double to_double(const Rational& w) { return boost::rational_cast<double>(w); }

/// Index of a type label in its alphabet. Index order equals lexicographic label order.
enum class TypeId : std::uint32_t {};

constexpr std::uint32_t index_of(TypeId t) { return static_cast<std::uint32_t>(t); }

/// Node degree; key of degree distributions.
using Degree = std::uint32_t;

/// Finite, lexicographically ordered set of distinct type labels.
///
/// Labels are non-empty and drawn from [A-Za-z0-9_.-] so that the text key
/// encodings below stay unambiguous.
class TypeAlphabet {
 public:
  explicit TypeAlphabet(std::vector<std::string> symbols);

  std::size_t size() const noexcept { return symbols_.size(); }
  const std::vector<std::string>& symbols() const noexcept { return symbols_; }
  const std::string& label(TypeId t) const;
  std::optional<TypeId> find(std::string_view label) const;
  /// Like find() but throws ParseError on an unknown label.
  TypeId id(std::string_view label) const;
  bool operator==(const TypeAlphabet&) const = default;

  static bool valid_label(std::string_view label);

 private:
  std::vector<std::string> symbols_;
};

/// A finite multiset of types; e(b) is count(b), zero counts are never stored.
class CountingMeasure {
 public:
  using Entry = std::pair<TypeId, std::uint32_t>;

  CountingMeasure() = default;
  /// Entries may arrive in any order and repeat; they are merged and sorted.
  explicit CountingMeasure(std::vector<Entry> entries);

  std::uint32_t count(TypeId t) const noexcept;
  std::uint32_t total() const noexcept;
  bool empty() const noexcept { return counts_.empty(); }
  const std::vector<Entry>& entries() const noexcept { return counts_; }

  auto operator<=>(const CountingMeasure&) const = default;
  bool operator==(const CountingMeasure&) const = default;

 private:
  std::vector<Entry> counts_;
};

/// Ordered pair of types (a, b); key space of link measures.
struct TypePair {
  TypeId first;
  TypeId second;
  auto operator<=>(const TypePair&) const = default;
};

/// A node's own type paired with the multiset of its neighbours' types.
struct LocalityKey {
  TypeId type;
  CountingMeasure neighbors;
  auto operator<=>(const LocalityKey&) const = default;
  bool operator==(const LocalityKey&) const = default;
};

/// Non-negative weights with finite support; zero weights are dropped.
template <class Key, class Weight = double>
class FiniteMeasure {
 public:
  using key_type = Key;
  using weight_type = Weight;
  using map_type = std::map<Key, Weight>;
  using const_iterator = typename map_type::const_iterator;

  FiniteMeasure() = default;
  explicit FiniteMeasure(map_type weights) : weights_(std::move(weights)) {
    for (auto it = weights_.begin(); it != weights_.end();) {
      if (it->second < Weight{0} || !std::isfinite(to_double(it->second))) {
        throw PreconditionError("measure weights must be finite and non-negative");
      }
      it = it->second == Weight{0} ? weights_.erase(it) : std::next(it);
    }
  }

  Weight weight(const Key& k) const {
    auto it = weights_.find(k);
    return it == weights_.end() ? Weight{0} : it->second;
  }
  Weight total() const {
    Weight s{0};
    for (const auto& [k, w] : weights_) s += w;
    return s;
  }
  std::size_t size() const noexcept { return weights_.size(); }
  bool empty() const noexcept { return weights_.empty(); }
  const_iterator begin() const noexcept { return weights_.begin(); }
  const_iterator end() const noexcept { return weights_.end(); }
  const map_type& weights() const noexcept { return weights_; }

  bool operator==(const FiniteMeasure&) const = default;

 private:
  map_type weights_;
};

/// Tolerance within which a floating ProbMeasure must sum to one.
inline constexpr double kNormalizationTol = 1e-12;

/// A FiniteMeasure of total mass one (exactly, for rational weights).
template <class Key, class Weight = double>
class ProbMeasure {
 public:
  using key_type = Key;
  using weight_type = Weight;
  using const_iterator = typename FiniteMeasure<Key, Weight>::const_iterator;

  explicit ProbMeasure(FiniteMeasure<Key, Weight> m) : m_(std::move(m)) {
    const Weight s = m_.total();
    if constexpr (std::is_floating_point_v<Weight>) {
      if (std::abs(s - 1.0) > kNormalizationTol) {
        throw PreconditionError("probability measure sums to " + std::to_string(s));
      }
    } else if (s != Weight{1}) {
      throw PreconditionError("probability measure does not sum to one");
    }
  }
  explicit ProbMeasure(typename FiniteMeasure<Key, Weight>::map_type w)
      : ProbMeasure(FiniteMeasure<Key, Weight>(std::move(w))) {}

  static ProbMeasure dirac(const Key& k) { return ProbMeasure({{k, Weight{1}}}); }

  Weight weight(const Key& k) const { return m_.weight(k); }
  std::size_t size() const noexcept { return m_.size(); }
  const_iterator begin() const noexcept { return m_.begin(); }
  const_iterator end() const noexcept { return m_.end(); }
  const FiniteMeasure<Key, Weight>& measure() const noexcept { return m_; }

  bool operator==(const ProbMeasure&) const = default;

 private:
  FiniteMeasure<Key, Weight> m_;
};

using TypeMeasure = ProbMeasure<TypeId>;
using LinkMeasure = FiniteMeasure<TypePair>;
using LocalityMeasure = ProbMeasure<LocalityKey>;
using DegreeMeasure = ProbMeasure<Degree>;

template <class Key>
FiniteMeasure<Key, double> to_real(const FiniteMeasure<Key, Rational>& m) {
  std::map<Key, double> out;
  for (const auto& [k, w] : m) out.emplace(k, to_double(w));
  return FiniteMeasure<Key, double>(std::move(out));
}

template <class Key>
ProbMeasure<Key, double> to_real(const ProbMeasure<Key, Rational>& m) {
  return ProbMeasure<Key, double>(to_real(m.measure()));
}

/// <p(.,e), e(.)>(a,b) = sum_e p(a,e) e(b).
template <class Weight>
FiniteMeasure<TypePair, Weight> link_marginal(const ProbMeasure<LocalityKey, Weight>& p) {
  std::map<TypePair, Weight> out;
  for (const auto& [key, w] : p) {
    for (const auto& [b, cnt] : key.neighbors.entries()) {
      out[TypePair{key.type, b}] += w * Weight(static_cast<std::int64_t>(cnt));
    }
  }
  return FiniteMeasure<TypePair, Weight>(std::move(out));
}

template <class Weight>
ProbMeasure<TypeId, Weight> type_marginal(const ProbMeasure<LocalityKey, Weight>& p) {
  std::map<TypeId, Weight> out;
  for (const auto& [key, w] : p) out[key.type] += w;
  return ProbMeasure<TypeId, Weight>(std::move(out));
}

template <class Weight>
struct MarginalPair {
  ProbMeasure<TypeId, Weight> types;
  FiniteMeasure<TypePair, Weight> links;
  bool operator==(const MarginalPair&) const = default;
};

/// The marginal map: locality measure -> (type marginal, link marginal).
template <class Weight>
MarginalPair<Weight> psi(const ProbMeasure<LocalityKey, Weight>& p) {
  return {type_marginal(p), link_marginal(p)};
}

struct ConsistencyReport {
  bool holds = true;
  /// Largest violation (link_marginal - pi for sub-consistency, |difference| for consistency).
  double max_violation = 0.0;
  std::optional<TypePair> worst_key;
};

namespace detail {

template <class Weight>
ConsistencyReport compare_links(const FiniteMeasure<TypePair, Weight>& pi,
                                const ProbMeasure<LocalityKey, Weight>& p, double tol,
                                bool two_sided) {
  const auto lm = link_marginal(p);
  std::set<TypePair> keys;
  for (const auto& [k, w] : lm) keys.insert(k);
  for (const auto& [k, w] : pi) keys.insert(k);
  ConsistencyReport rep;
  for (const auto& k : keys) {
    double diff = to_double(Weight(lm.weight(k) - pi.weight(k)));
    if (two_sided) diff = std::abs(diff);
    if (diff > rep.max_violation) {
      rep.max_violation = diff;
      rep.worst_key = k;
    }
  }
  rep.holds = rep.max_violation <= tol;
  return rep;
}

}  // namespace detail

/// (pi, p) is sub-consistent when link_marginal(p) <= pi + tol pointwise.
template <class Weight>
ConsistencyReport is_sub_consistent(const FiniteMeasure<TypePair, Weight>& pi,
                                    const ProbMeasure<LocalityKey, Weight>& p, double tol) {
  return detail::compare_links(pi, p, tol, false);
}

/// (pi, p) is consistent when |link_marginal(p) - pi| <= tol pointwise.
template <class Weight>
ConsistencyReport is_consistent(const FiniteMeasure<TypePair, Weight>& pi,
                                const ProbMeasure<LocalityKey, Weight>& p, double tol) {
  return detail::compare_links(pi, p, tol, true);
}

/// Total variation distance; both measures must share the key space (checked at compile time).
template <class Key, class Weight>
double total_variation(const ProbMeasure<Key, Weight>& mu, const ProbMeasure<Key, Weight>& nu) {
  double s = 0.0;
  auto a = mu.begin();
  auto b = nu.begin();
  while (a != mu.end() || b != nu.end()) {
    if (b == nu.end() || (a != mu.end() && a->first < b->first)) {
      s += to_double(a->second);
      ++a;
    } else if (a == mu.end() || b->first < a->first) {
      s += to_double(b->second);
      ++b;
    } else {
      s += std::abs(to_double(a->second) - to_double(b->second));
      ++a;
      ++b;
    }
  }
  return 0.5 * s;
}

// ---------------------------------------------------------------------------
// Canonical text encodings of keys:
//   type        "a"
//   type pair   "a,b"
//   counting    "a:2,b:1"  (canonical type order, empty measure is "")
//   locality    "a|b:2,c:1" (empty neighbourhood is "a|")
//   degree      "3"

template <class Key>
struct KeyCodec;

template <>
struct KeyCodec<TypeId> {
  static std::string encode(const TypeAlphabet& alph, TypeId k);
  static TypeId decode(const TypeAlphabet& alph, std::string_view s);
  static void labels(std::string_view s, std::set<std::string>& out);
};

template <>
struct KeyCodec<TypePair> {
  static std::string encode(const TypeAlphabet& alph, const TypePair& k);
  static TypePair decode(const TypeAlphabet& alph, std::string_view s);
  static void labels(std::string_view s, std::set<std::string>& out);
};

template <>
struct KeyCodec<CountingMeasure> {
  static std::string encode(const TypeAlphabet& alph, const CountingMeasure& k);
  static CountingMeasure decode(const TypeAlphabet& alph, std::string_view s);
  static void labels(std::string_view s, std::set<std::string>& out);
};

template <>
struct KeyCodec<LocalityKey> {
  static std::string encode(const TypeAlphabet& alph, const LocalityKey& k);
  static LocalityKey decode(const TypeAlphabet& alph, std::string_view s);
  static void labels(std::string_view s, std::set<std::string>& out);
};

template <>
struct KeyCodec<Degree> {
  static std::string encode(const TypeAlphabet& alph, Degree k);
  static Degree decode(const TypeAlphabet& alph, std::string_view s);
  static void labels(std::string_view, std::set<std::string>&) {}
};

/// Weights print with 17 significant digits; rationals print as "num/den".
std::string format_weight(double w);
std::string format_weight(const Rational& w);
Rational parse_rational(std::string_view s);

/// `key<TAB>weight` lines in canonical key order.
template <class Key, class Weight>
std::string to_tsv(const TypeAlphabet& alph, const FiniteMeasure<Key, Weight>& m) {
  std::string out;
  for (const auto& [k, w] : m) {
    out += KeyCodec<Key>::encode(alph, k);
    out += '\t';
    out += format_weight(w);
    out += '\n';
  }
  return out;
}

template <class Key, class Weight>
std::string to_tsv(const TypeAlphabet& alph, const ProbMeasure<Key, Weight>& m) {
  return to_tsv(alph, m.measure());
}

namespace detail {
std::vector<std::pair<int, std::pair<std::string, std::string>>> split_tsv(std::string_view text);
double parse_weight(std::string_view s, int line);
}  // namespace detail

template <class Key>
FiniteMeasure<Key> finite_measure_from_tsv(const TypeAlphabet& alph, std::string_view text) {
  std::map<Key, double> out;
  for (const auto& [line, kv] : detail::split_tsv(text)) {
    Key k;
    try {
      k = KeyCodec<Key>::decode(alph, kv.first);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line);
    }
    if (!out.emplace(k, detail::parse_weight(kv.second, line)).second) {
      throw ParseError("duplicate key '" + kv.first + "'", line);
    }
  }
  try {
    return FiniteMeasure<Key>(std::move(out));
  } catch (const PreconditionError& e) {
    throw ParseError(e.what());
  }
}

template <class Key>
ProbMeasure<Key> prob_measure_from_tsv(const TypeAlphabet& alph, std::string_view text) {
  try {
    return ProbMeasure<Key>(finite_measure_from_tsv<Key>(alph, text));
  } catch (const PreconditionError& e) {
    throw ParseError(e.what());
  }
}

/// Labels mentioned by the keys of a TSV measure file.
template <class Key>
std::set<std::string> labels_in_tsv(std::string_view text) {
  std::set<std::string> out;
  for (const auto& [line, kv] : detail::split_tsv(text)) KeyCodec<Key>::labels(kv.first, out);
  return out;
}

template <class Key, class Weight>
Json to_json(const TypeAlphabet& alph, const FiniteMeasure<Key, Weight>& m) {
  Json out = Json::object();
  for (const auto& [k, w] : m) out[KeyCodec<Key>::encode(alph, k)] = to_double(w);
  return out;
}

template <class Key, class Weight>
Json to_json(const TypeAlphabet& alph, const ProbMeasure<Key, Weight>& m) {
  return to_json(alph, m.measure());
}

template <class Key>
FiniteMeasure<Key> finite_measure_from_json(const TypeAlphabet& alph, const Json& j) {
  if (!j.is_object()) throw ParseError("measure must be a JSON object");
  std::map<Key, double> out;
  for (const auto& [ks, w] : j.items()) {
    if (!w.is_number()) throw ParseError("weight of '" + ks + "' is not a number");
    out[KeyCodec<Key>::decode(alph, ks)] = w.template get<double>();
  }
  try {
    return FiniteMeasure<Key>(std::move(out));
  } catch (const PreconditionError& e) {
    throw ParseError(e.what());
  }
}

template <class Key>
ProbMeasure<Key> prob_measure_from_json(const TypeAlphabet& alph, const Json& j) {
  try {
    return ProbMeasure<Key>(finite_measure_from_json<Key>(alph, j));
  } catch (const PreconditionError& e) {
    throw ParseError(e.what());
  }
}

template <class Key>
std::set<std::string> labels_in_json(const Json& j) {
  std::set<std::string> out;
  if (j.is_object()) {
    for (const auto& [ks, w] : j.items()) KeyCodec<Key>::labels(ks, out);
  }
  return out;
}

}  // namespace typedld
