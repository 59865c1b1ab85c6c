#pragma once

// Relative entropy, the product-Poisson reference law q and the rate
// functions J_(eta,pi) and I_c. All logarithms are natural.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "typedld/measures.hpp"

namespace typedld {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// log k! for non-negative k.
double log_factorial(std::uint32_t k);

double poisson_log_pmf(double mean, std::uint32_t k);
double poisson_pmf(double mean, std::uint32_t k);
/// P(X > k) for X ~ Poisson(mean).
double poisson_tail(double mean, std::uint32_t k);

/// The reference law q(a,e) = eta(a) prod_b Poisson(pi(a,b)/eta(a))(e(b)).
///
/// q has countably infinite support and is never materialized; it is
/// evaluated pointwise or summed over a truncation ball (see truncated_reference).
class ReferenceLaw {
 public:
  /// Requires eta(a) > 0 for every letter of the alphabet and pi >= 0 symmetric.
  ReferenceLaw(const TypeAlphabet& alphabet, const ProbMeasure<TypeId>& eta,
               const FiniteMeasure<TypePair>& pi);

  std::size_t alphabet_size() const noexcept { return eta_.size(); }
  double eta(TypeId a) const { return eta_.at(index_of(a)); }
  /// Poisson intensity pi(a,b) / eta(a) of b-neighbours around an a-node.
  double intensity(TypeId a, TypeId b) const { return lambda_.at(index_of(a) * eta_.size() + index_of(b)); }
  /// Poisson intensity of the total neighbour count of an a-node.
  double row_intensity(TypeId a) const;

  double log_pmf(const LocalityKey& x) const;
  double pmf(const LocalityKey& x) const { return std::exp(log_pmf(x)); }
  double operator()(const LocalityKey& x) const { return pmf(x); }

 private:
  std::vector<double> eta_;
  std::vector<double> lambda_;
};

/// Pointwise q(a, e); throws PreconditionError when eta vanishes on the alphabet.
double q_pmf(const TypeAlphabet& alphabet, const ProbMeasure<TypeId>& eta,
             const FiniteMeasure<TypePair>& pi, TypeId a, const CountingMeasure& e);

/// q restricted to {(a,e) : sum_b e(b) <= radius}, each type row rescaled to mass eta(a).
struct TruncatedReference {
  ProbMeasure<LocalityKey> measure;
  /// Mass of q outside the truncation ball before rescaling.
  double tail_mass;
};

TruncatedReference truncated_reference(const ReferenceLaw& q, std::uint32_t radius);

/// H(p || q) = sum_x p(x) log(p(x)/q(x)); +inf when q(x) = 0 < p(x).
template <class Key, class Weight, class QEval>
double relative_entropy(const ProbMeasure<Key, Weight>& p, QEval&& q_eval) {
  double h = 0.0;
  for (const auto& [x, w] : p) {
    const double px = to_double(w);
    const double qx = q_eval(x);
    if (!(qx > 0.0)) return kInfinity;
    h += px * (std::log(px) - std::log(qx));
  }
  return h;
}

/// Same as relative_entropy but with a log-density evaluator; -inf marks q(x) = 0.
template <class Key, class Weight, class LogQEval>
double relative_entropy_log(const ProbMeasure<Key, Weight>& p, LogQEval&& log_q) {
  double h = 0.0;
  for (const auto& [x, w] : p) {
    const double px = to_double(w);
    const double lq = log_q(x);
    if (lq == -kInfinity) return kInfinity;
    h += px * (std::log(px) - lq);
  }
  return h;
}

struct RateResult {
  double value = kInfinity;
  bool feasible = false;
  /// Total variation between the type marginal of p and eta (0 for I_c).
  double tv_marginal = 0.0;
  /// Maximum of link_marginal(p) - pi (for I_c: |mean(p) - c|).
  double subconsistency_violation = 0.0;
};

Json to_json(const RateResult& r);

/// J_(eta,pi)(p) = H(p || q) when (pi,p) is sub-consistent and p1 = eta, +inf otherwise.
RateResult rate_J(const TypeAlphabet& alphabet, const ProbMeasure<TypeId>& eta,
                  const FiniteMeasure<TypePair>& pi, const ProbMeasure<LocalityKey>& p,
                  double tol = 1e-9);

/// I_c(p) = H(p || Poisson(c)) when mean(p) = c, +inf otherwise.
RateResult rate_I_c(double c, const ProbMeasure<Degree>& p, double tol = 1e-9);

double mean(const ProbMeasure<Degree>& p);

/// Embeds a degree law into the locality space of a one-letter alphabet: k -> (a, {a:k}).
ProbMeasure<LocalityKey> single_type_embedding(const ProbMeasure<Degree>& p);

}  // namespace typedld
