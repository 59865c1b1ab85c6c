#include "typedld/graphs.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

namespace typedld {

TypedGraph::TypedGraph(std::shared_ptr<const TypeAlphabet> alphabet, std::vector<TypeId> types,
                       std::vector<Edge> edges)
    : alphabet_(std::move(alphabet)), types_(std::move(types)), edges_(std::move(edges)) {
  if (!alphabet_) throw PreconditionError("typed graph needs an alphabet");
  if (types_.empty()) throw PreconditionError("typed graph needs at least one node");
  for (auto t : types_) {
    if (index_of(t) >= alphabet_->size()) throw PreconditionError("node type outside the alphabet");
  }
  const auto n = types_.size();
  for (auto& e : edges_) {
    if (e.u == e.v) throw PreconditionError("self-loop at node " + std::to_string(e.u + 1));
    if (e.u > e.v) std::swap(e.u, e.v);
    if (e.v >= n) throw PreconditionError("edge endpoint outside [1, n]");
  }
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
    throw PreconditionError("duplicate edge");
  }
}

std::vector<std::uint32_t> TypedGraph::degrees() const {
  std::vector<std::uint32_t> deg(types_.size(), 0);
  for (const auto& e : edges_) {
    ++deg[e.u];
    ++deg[e.v];
  }
  return deg;
}

ProbMeasure<TypeId, Rational> empirical_type_measure(const TypedGraph& g) {
  const auto n = static_cast<std::int64_t>(g.node_count());
  std::map<TypeId, std::int64_t> counts;
  for (auto t : g.types()) ++counts[t];
  std::map<TypeId, Rational> out;
  for (const auto& [t, c] : counts) out.emplace(t, Rational(c, n));
  return ProbMeasure<TypeId, Rational>(std::move(out));
}

FiniteMeasure<TypePair, Rational> empirical_link_measure(const TypedGraph& g) {
  const auto n = static_cast<std::int64_t>(g.node_count());
  std::map<TypePair, std::int64_t> counts;
  for (const auto& e : g.edges()) {
    const auto a = g.type_of(e.u);
    const auto b = g.type_of(e.v);
    ++counts[TypePair{a, b}];
    ++counts[TypePair{b, a}];
  }
  std::map<TypePair, Rational> out;
  for (const auto& [k, c] : counts) out.emplace(k, Rational(c, n));
  return FiniteMeasure<TypePair, Rational>(std::move(out));
}

ProbMeasure<LocalityKey, Rational> empirical_locality_measure(const TypedGraph& g) {
  const auto n = g.node_count();
  std::vector<std::vector<CountingMeasure::Entry>> nbr(n);
  for (const auto& e : g.edges()) {
    nbr[e.u].emplace_back(g.type_of(e.v), 1);
    nbr[e.v].emplace_back(g.type_of(e.u), 1);
  }
  std::map<LocalityKey, std::int64_t> counts;
  for (std::size_t v = 0; v < n; ++v) {
    ++counts[LocalityKey{g.type_of(v), CountingMeasure(std::move(nbr[v]))}];
  }
  std::map<LocalityKey, Rational> out;
  for (auto& [k, c] : counts) out.emplace(k, Rational(c, static_cast<std::int64_t>(n)));
  return ProbMeasure<LocalityKey, Rational>(std::move(out));
}

std::vector<std::uint32_t> degree_histogram(const TypedGraph& g) {
  std::vector<std::uint32_t> hist;
  for (auto d : g.degrees()) {
    if (d >= hist.size()) hist.resize(d + 1, 0);
    ++hist[d];
  }
  return hist;
}

ProbMeasure<Degree, Rational> degree_distribution(const TypedGraph& g) {
  const auto n = static_cast<std::int64_t>(g.node_count());
  const auto hist = degree_histogram(g);
  std::map<Degree, Rational> out;
  for (std::size_t k = 0; k < hist.size(); ++k) {
    if (hist[k] > 0) out.emplace(static_cast<Degree>(k), Rational(hist[k], n));
  }
  return ProbMeasure<Degree, Rational>(std::move(out));
}

std::string write_graph(const TypedGraph& g) {
  std::string out = "typedgraph v1\nn=" + std::to_string(g.node_count()) + "\ntypes=";
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    if (v > 0) out += ' ';
    out += g.alphabet().label(g.type_of(v));
  }
  out += '\n';
  for (const auto& e : g.edges()) {
    out += "e " + std::to_string(e.u + 1) + ' ' + std::to_string(e.v + 1) + '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

std::vector<std::string_view> words_of(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    const auto start = i;
    while (i < s.size() && s[i] != ' ') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::uint64_t parse_uint(std::string_view s, int line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("expected a non-negative integer, got '" + std::string(s) + "'", line);
  }
  return v;
}

TypedGraph parse_graph_impl(std::string_view text, std::shared_ptr<const TypeAlphabet> alphabet) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != "typedgraph v1") throw ParseError("missing 'typedgraph v1' header", 1);
  if (lines.size() < 3) throw ParseError("truncated graph file", static_cast<int>(lines.size()) + 1);
  if (!lines[1].starts_with("n=")) throw ParseError("expected 'n=<int>'", 2);
  const auto n = parse_uint(lines[1].substr(2), 2);
  if (n == 0) throw ParseError("n must be at least 1", 2);
  if (!lines[2].starts_with("types=")) throw ParseError("expected 'types=<labels>'", 3);
  const auto labels = words_of(lines[2].substr(6));
  if (labels.size() != n) {
    throw ParseError("types line lists " + std::to_string(labels.size()) + " labels, expected " +
                         std::to_string(n),
                     3);
  }
  if (!alphabet) {
    std::set<std::string> uniq(labels.begin(), labels.end());
    try {
      alphabet = std::make_shared<const TypeAlphabet>(std::vector<std::string>(uniq.begin(), uniq.end()));
    } catch (const PreconditionError& e) {
      throw ParseError(e.what(), 3);
    }
  }
  std::vector<TypeId> types;
  types.reserve(n);
  for (auto l : labels) {
    try {
      types.push_back(alphabet->id(l));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), 3);
    }
  }
  std::vector<Edge> edges;
  for (std::size_t i = 3; i < lines.size(); ++i) {
    const int ln = static_cast<int>(i) + 1;
    if (lines[i].empty() && i + 1 == lines.size()) break;
    const auto w = words_of(lines[i]);
    if (w.size() != 3 || w[0] != "e") throw ParseError("expected 'e <u> <v>'", ln);
    const auto u = parse_uint(w[1], ln);
    const auto v = parse_uint(w[2], ln);
    if (u < 1 || v > n || u >= v) throw ParseError("edge must satisfy 1 <= u < v <= n", ln);
    Edge e{static_cast<std::uint32_t>(u - 1), static_cast<std::uint32_t>(v - 1)};
    if (!edges.empty() && !(edges.back() < e)) throw ParseError("edges must be sorted and distinct", ln);
    edges.push_back(e);
  }
  return TypedGraph(std::move(alphabet), std::move(types), std::move(edges));
}

}  // namespace

TypedGraph parse_graph(std::string_view text) { return parse_graph_impl(text, nullptr); }

TypedGraph parse_graph(std::string_view text, std::shared_ptr<const TypeAlphabet> alphabet) {
  if (!alphabet) throw PreconditionError("parse_graph: null alphabet");
  return parse_graph_impl(text, std::move(alphabet));
}

}  // namespace typedld
