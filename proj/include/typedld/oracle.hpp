#pragma once

// Exhaustive small-n enumeration of the conditional support: exact type-class
// counts, exact event probabilities, entropy neighbourhoods and finite-n
// exponent gaps. Probabilities are exact rationals; logs are taken only when
// reporting.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "typedld/graphs.hpp"
#include "typedld/rate.hpp"
#include "typedld/sampler.hpp"

namespace typedld {

using ExactLocality = ProbMeasure<LocalityKey, Rational>;

inline constexpr std::uint64_t kEnumerationGuard = 100'000'000;

/// prod over blocks of C(capacity, edges); throws EnumerationGuardError above `guard`.
std::uint64_t support_size(const BlockPlan& plan, std::uint64_t guard = kEnumerationGuard);

/// Streams every admissible graph of a spec exactly once: the cartesian product
/// of per-block combinations, in lexicographic order (first block slowest).
class SupportEnumerator {
 public:
  explicit SupportEnumerator(const ConditionSpec& spec, std::uint64_t guard = kEnumerationGuard);

  std::optional<TypedGraph> next();
  std::uint64_t support_size() const noexcept { return support_size_; }

 private:
  bool advance();

  std::shared_ptr<const TypeAlphabet> alphabet_;
  BlockPlan plan_;
  std::vector<TypeId> types_;
  std::vector<std::vector<std::uint64_t>> combos_;
  std::uint64_t support_size_ = 0;
  bool done_ = false;
};

/// Canonical text of a whole locality measure: "key=weight" atoms joined by ';'
/// in canonical key order, weights as reduced fractions (e.g. "a|b:1=1/2;b|a:1=1/2").
std::string class_key(const TypeAlphabet& alph, const ExactLocality& p);
ExactLocality parse_class_key(const TypeAlphabet& alph, std::string_view key);

struct TypeClass {
  std::string key;
  ExactLocality measure;
  std::uint64_t count;
};

struct EnumerationReport {
  ConditionSpec spec;
  std::uint64_t support_size = 0;
  /// Sorted by key; counts sum to support_size.
  std::vector<TypeClass> classes;
  std::optional<Rational> event_probability;

  Rational probability(const TypeClass& c) const {
    return Rational(static_cast<std::int64_t>(c.count), static_cast<std::int64_t>(support_size));
  }
  const TypeClass* find(std::string_view key) const;
};

Json to_json(const EnumerationReport& r);

/// Groups the support of `spec` by exact empirical locality measure.
EnumerationReport type_class_counts(const ConditionSpec& spec, std::uint64_t guard = kEnumerationGuard);

using LocalityEvent = std::function<bool(const ExactLocality&)>;

/// #{z : event(P_z)} / support size, exactly.
Rational exact_event_probability(const ConditionSpec& spec, const LocalityEvent& event);
Rational exact_event_probability(const EnumerationReport& report, const LocalityEvent& event);

/// B_p = { mu : H(mu || q) > H(p || q) - eps/2 } with q the reference law of (eta, pi).
class EntropyNeighborhood {
 public:
  EntropyNeighborhood(ReferenceLaw q, const ProbMeasure<LocalityKey>& center, double eps);

  bool operator()(const ProbMeasure<LocalityKey>& mu) const;
  bool operator()(const ExactLocality& mu) const { return (*this)(to_real(mu)); }
  double center_entropy() const noexcept { return center_entropy_; }
  double threshold() const noexcept { return center_entropy_ - eps_ / 2.0; }
  double entropy(const ProbMeasure<LocalityKey>& mu) const;

 private:
  ReferenceLaw q_;
  double center_entropy_;
  double eps_;
};

EntropyNeighborhood entropy_neighborhood(const TypeAlphabet& alph, const ProbMeasure<LocalityKey>& p,
                                         const ProbMeasure<TypeId>& eta, const FiniteMeasure<TypePair>& pi,
                                         double eps);

struct LldpTarget {
  ConditionSpec spec;
  ExactLocality target;
};

struct GapPoint {
  std::size_t n;
  /// Q_(eta_n,pi_n){P_z = p_n}.
  Rational probability;
  /// -(1/n) log probability.
  double exponent;
  /// H(p_n || q_n) with q_n the reference law of (eta_n, pi_n).
  double entropy;
  double gap;
};

/// gap_n = |-(1/n) log Q{P_z = p_n} - H(p_n || q_n)| per spec; throws on an empty target class.
std::vector<GapPoint> lldp_exponent_gap(const std::vector<LldpTarget>& family,
                                        std::uint64_t guard = kEnumerationGuard);

}  // namespace typedld
