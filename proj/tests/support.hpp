#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "typedld/graphs.hpp"
#include "typedld/measures.hpp"
#include "typedld/sampler.hpp"

namespace testing_support {

using namespace typedld;

inline std::shared_ptr<const TypeAlphabet> alphabet(std::size_t k) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < k; ++i) labels.push_back(std::string(1, static_cast<char>('a' + i)));
  return std::make_shared<const TypeAlphabet>(labels);
}

inline LocalityKey key(const TypeAlphabet& alph, const std::string& s) {
  return KeyCodec<LocalityKey>::decode(alph, s);
}

inline TypePair pair(const TypeAlphabet& alph, const std::string& s) { return KeyCodec<TypePair>::decode(alph, s); }

inline TypeId id(const TypeAlphabet& alph, const std::string& s) { return alph.id(s); }

/// Graph on n nodes with independent edges of probability p_edge and uniform types over k letters.
inline TypedGraph random_graph(std::mt19937_64& gen, std::size_t n, std::size_t k, double p_edge) {
  auto alph = alphabet(k);
  std::uniform_int_distribution<std::uint32_t> type(0, static_cast<std::uint32_t>(k - 1));
  std::bernoulli_distribution coin(p_edge);
  std::vector<TypeId> types(n);
  for (auto& t : types) t = TypeId{type(gen)};
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      if (coin(gen)) edges.push_back({static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(v)});
    }
  }
  return TypedGraph(alph, std::move(types), std::move(edges));
}

/// Random probability measure on `keys` with Dirichlet(1) weights.
template <class Key>
ProbMeasure<Key> random_prob(std::mt19937_64& gen, const std::vector<Key>& keys) {
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> w(keys.size());
  double s = 0.0;
  for (auto& x : w) s += (x = ex(gen));
  std::map<Key, double> m;
  for (std::size_t i = 0; i < keys.size(); ++i) m[keys[i]] += w[i] / s;
  return ProbMeasure<Key>(std::move(m));
}

using BigInt = boost::multiprecision::cpp_int;

inline BigInt binom(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  BigInt r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Graphs on k labelled vertices with m edges and no isolated vertex (inclusion-exclusion).
inline BigInt graphs_without_isolated(std::uint64_t k, std::uint64_t m) {
  BigInt s = 0;
  for (std::uint64_t i = 0; i <= k; ++i) {
    const auto r = k - i;
    const BigInt term = binom(k, i) * binom(r * (r - (r > 0 ? 1 : 0)) / 2, m);
    if (i % 2 == 0) {
      s += term;
    } else {
      s -= term;
    }
  }
  return s;
}

/// P{ at least j0 isolated vertices } in G(n, m).
inline double prob_at_least_isolated(std::uint64_t n, std::uint64_t m, std::uint64_t j0) {
  BigInt hits = 0;
  for (std::uint64_t j = j0; j <= n; ++j) hits += binom(n, j) * graphs_without_isolated(n - j, m);
  const BigInt total = binom(n * (n - 1) / 2, m);
  using boost::multiprecision::cpp_rational;
  return cpp_rational(hits, total).convert_to<double>();
}

/// The n-node, two-type spec with n/2 nodes per type and n/2 cross edges.
inline ConditionSpec binary_cross_spec(std::size_t n) {
  auto alph = alphabet(2);
  return ConditionSpec::from_counts(alph, {n / 2, n / 2}, {{{TypeId{0}, TypeId{1}}, n / 2}});
}

}  // namespace testing_support
