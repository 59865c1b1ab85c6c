#pragma once

// Exact-uniform samplers for typed graphs conditioned on their empirical type
// and link measures, and for Erdos-Renyi graphs with a fixed number of links.

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "typedld/graphs.hpp"
#include "typedld/measures.hpp"

namespace typedld {

/// Seeded random stream: std::mt19937_64 (whose output sequence is fixed by the
/// C++ standard) with bounded draws done by rejection, so identical seeds give
/// identical samples on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, bound); bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of substream `stream` of `seed`: splitmix64(seed ^ splitmix64(stream)).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream);

/// Target empirical type measure eta_n and link measure pi_n on n nodes.
struct ConditionSpec {
  std::shared_ptr<const TypeAlphabet> alphabet;
  std::size_t n;
  ProbMeasure<TypeId> eta;
  FiniteMeasure<TypePair> pi;

  /// Builds eta_n, pi_n from node counts per type and edge counts per unordered block (a <= b).
  static ConditionSpec from_counts(std::shared_ptr<const TypeAlphabet> alphabet,
                                   const std::vector<std::uint64_t>& type_counts,
                                   const std::map<TypePair, std::uint64_t>& block_edges);
};

Json to_json(const ConditionSpec& spec);
/// {n, eta: {label: w}, pi: {"a,b": w}}; an optional "alphabet" array fixes the letters.
ConditionSpec condition_spec_from_json(const Json& j);

/// One unordered type block (a <= b) and how many of its candidate pairs are links.
struct Block {
  TypeId a;
  TypeId b;
  std::uint64_t capacity;
  std::uint64_t edges;
};

/// Integer form of an admissible spec: nodes [offset[a], offset[a] + count[a]) have type a.
struct BlockPlan {
  std::size_t n = 0;
  std::vector<std::uint64_t> type_counts;
  std::vector<std::uint64_t> offsets;
  std::vector<Block> blocks;
};

struct AdmissibilityReport {
  bool ok = true;
  /// First violated constraint, empty when ok.
  std::string violation;
};

AdmissibilityReport admissible(const ConditionSpec& spec);

/// Throws InadmissibleSpec naming the violated bound.
BlockPlan block_plan(const ConditionSpec& spec);

/// Canonical type assignment of a plan: the first count[a0] nodes get a0, and so on.
std::vector<TypeId> canonical_types(const BlockPlan& plan);

/// The index-th candidate pair of a block (colex order within the block).
Edge block_edge(const BlockPlan& plan, const Block& block, std::uint64_t index);

/// Uniform random m-subset of [0, universe) by Floyd's algorithm, returned sorted.
std::vector<std::uint64_t> sample_index_subset(std::uint64_t universe, std::uint64_t m, Rng& rng);

/// Uniform over all graphs with the canonical type assignment and Psi(P) = (eta_n, pi_n).
TypedGraph sample_conditional_graph(const ConditionSpec& spec, Rng& rng);

/// Uniform m-edge graph on n nodes of the single type "a".
TypedGraph sample_erdos_renyi(std::size_t n, std::uint64_t m, Rng& rng);

/// The alphabet {"a"} used for single-type graphs.
std::shared_ptr<const TypeAlphabet> single_type_alphabet();

}  // namespace typedld
