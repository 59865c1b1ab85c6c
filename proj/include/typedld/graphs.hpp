#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "typedld/measures.hpp"

namespace typedld {

/// Undirected edge between 0-based nodes, stored with u < v.
struct Edge {
  std::uint32_t u;
  std::uint32_t v;
  auto operator<=>(const Edge&) const = default;
};

/// A simple undirected graph whose nodes carry types from a finite alphabet.
///
/// Nodes are 0-based in memory and 1-based in the text format. The edge list
/// is kept sorted; construction rejects self-loops, duplicates and unknown types.
class TypedGraph {
 public:
  TypedGraph(std::shared_ptr<const TypeAlphabet> alphabet, std::vector<TypeId> types,
             std::vector<Edge> edges);

  std::size_t node_count() const noexcept { return types_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const TypeAlphabet& alphabet() const noexcept { return *alphabet_; }
  const std::shared_ptr<const TypeAlphabet>& alphabet_ptr() const noexcept { return alphabet_; }
  TypeId type_of(std::size_t node) const { return types_.at(node); }
  std::span<const TypeId> types() const noexcept { return types_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::vector<std::uint32_t> degrees() const;

  bool operator==(const TypedGraph& other) const {
    return *alphabet_ == *other.alphabet_ && types_ == other.types_ && edges_ == other.edges_;
  }

 private:
  std::shared_ptr<const TypeAlphabet> alphabet_;
  std::vector<TypeId> types_;
  std::vector<Edge> edges_;
};

/// P1(a) = #{v : type(v) = a} / n.
ProbMeasure<TypeId, Rational> empirical_type_measure(const TypedGraph& g);

/// P2(a,b) = #{ordered adjacent (u,v) : type(u)=a, type(v)=b} / n. Total mass 2|E|/n.
FiniteMeasure<TypePair, Rational> empirical_link_measure(const TypedGraph& g);

/// P = (1/n) sum_v delta_(type(v), neighbour types of v).
ProbMeasure<LocalityKey, Rational> empirical_locality_measure(const TypedGraph& g);

/// D(k) = #{v : deg(v) = k} / n.
ProbMeasure<Degree, Rational> degree_distribution(const TypedGraph& g);

/// Number of nodes of each degree, indexed by degree (tight at the maximum degree).
std::vector<std::uint32_t> degree_histogram(const TypedGraph& g);

/// Serializes to the line-oriented `typedgraph v1` format.
std::string write_graph(const TypedGraph& g);

/// Parses `typedgraph v1`; the alphabet is the set of labels on the types line.
TypedGraph parse_graph(std::string_view text);

/// Parses `typedgraph v1` against a known alphabet.
TypedGraph parse_graph(std::string_view text, std::shared_ptr<const TypeAlphabet> alphabet);

}  // namespace typedld
