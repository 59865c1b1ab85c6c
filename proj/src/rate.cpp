#include "typedld/rate.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <functional>

namespace typedld {

double log_factorial(std::uint32_t k) { return boost::math::lgamma(static_cast<double>(k) + 1.0); }

double poisson_log_pmf(double mean, std::uint32_t k) {
  if (mean == 0.0) return k == 0 ? 0.0 : -kInfinity;
  return -mean + static_cast<double>(k) * std::log(mean) - log_factorial(k);
}

double poisson_pmf(double mean, std::uint32_t k) { return std::exp(poisson_log_pmf(mean, k)); }

double poisson_tail(double mean, std::uint32_t k) {
  if (mean == 0.0) return 0.0;
  return boost::math::gamma_p(static_cast<double>(k) + 1.0, mean);
}

ReferenceLaw::ReferenceLaw(const TypeAlphabet& alphabet, const ProbMeasure<TypeId>& eta,
                           const FiniteMeasure<TypePair>& pi) {
  const auto z = alphabet.size();
  eta_.assign(z, 0.0);
  for (const auto& [a, w] : eta) {
    if (index_of(a) >= z) throw PreconditionError("eta has a type outside the alphabet");
    eta_[index_of(a)] = w;
  }
  for (std::size_t a = 0; a < z; ++a) {
    if (!(eta_[a] > 0.0)) {
      throw PreconditionError("eta(" + alphabet.symbols()[a] + ") must be positive");
    }
  }
  lambda_.assign(z * z, 0.0);
  for (const auto& [ab, w] : pi) {
    if (index_of(ab.first) >= z || index_of(ab.second) >= z) {
      throw PreconditionError("pi has a type pair outside the alphabet");
    }
    const double sym = pi.weight(TypePair{ab.second, ab.first});
    if (std::abs(sym - w) > 1e-9 * std::max(1.0, w)) throw PreconditionError("pi must be symmetric");
    lambda_[index_of(ab.first) * z + index_of(ab.second)] = w / eta_[index_of(ab.first)];
  }
}

double ReferenceLaw::row_intensity(TypeId a) const {
  const auto z = eta_.size();
  double s = 0.0;
  for (std::size_t b = 0; b < z; ++b) s += lambda_.at(index_of(a) * z + b);
  return s;
}

double ReferenceLaw::log_pmf(const LocalityKey& x) const {
  const auto z = eta_.size();
  if (index_of(x.type) >= z) throw PreconditionError("locality key type outside the alphabet");
  double lq = std::log(eta_[index_of(x.type)]);
  // The product runs over the whole alphabet; absent b contribute exp(-lambda_ab).
  for (std::size_t b = 0; b < z; ++b) {
    const auto k = x.neighbors.count(TypeId(static_cast<std::uint32_t>(b)));
    const double lp = poisson_log_pmf(lambda_[index_of(x.type) * z + b], k);
    if (lp == -kInfinity) return -kInfinity;
    lq += lp;
  }
  return lq;
}

double q_pmf(const TypeAlphabet& alphabet, const ProbMeasure<TypeId>& eta,
             const FiniteMeasure<TypePair>& pi, TypeId a, const CountingMeasure& e) {
  return ReferenceLaw(alphabet, eta, pi).pmf(LocalityKey{a, e});
}

TruncatedReference truncated_reference(const ReferenceLaw& q, std::uint32_t radius) {
  const auto z = q.alphabet_size();
  std::map<LocalityKey, double> atoms;
  double tail = 0.0;
  for (std::uint32_t ai = 0; ai < z; ++ai) {
    const TypeId a{ai};
    std::vector<TypeId> active;
    for (std::uint32_t b = 0; b < z; ++b) {
      if (q.intensity(a, TypeId{b}) > 0.0) active.push_back(TypeId{b});
    }
    std::vector<std::pair<LocalityKey, double>> row;
    std::vector<CountingMeasure::Entry> cur;
    std::function<void(std::size_t, std::uint32_t)> rec = [&](std::size_t i, std::uint32_t left) {
      if (i == active.size()) {
        LocalityKey key{a, CountingMeasure(cur)};
        const double w = q.pmf(key);
        if (w > 0.0) row.emplace_back(std::move(key), w);
        return;
      }
      for (std::uint32_t k = 0; k <= left; ++k) {
        cur.emplace_back(active[i], k);
        rec(i + 1, left - k);
        cur.pop_back();
      }
    };
    rec(0, radius);
    double mass = 0.0;
    for (const auto& [k, w] : row) mass += w;
    for (auto& [k, w] : row) atoms.emplace(std::move(k), w * q.eta(a) / mass);
    tail += q.eta(a) * poisson_tail(q.row_intensity(a), radius);
  }
  return {ProbMeasure<LocalityKey>(std::move(atoms)), tail};
}

Json to_json(const RateResult& r) {
  Json j;
  if (std::isinf(r.value)) {
    j["value"] = "inf";
  } else {
    j["value"] = r.value;
  }
  j["feasible"] = r.feasible;
  j["tv_marginal"] = r.tv_marginal;
  j["subconsistency_violation"] = r.subconsistency_violation;
  return j;
}

RateResult rate_J(const TypeAlphabet& alphabet, const ProbMeasure<TypeId>& eta,
                  const FiniteMeasure<TypePair>& pi, const ProbMeasure<LocalityKey>& p, double tol) {
  const ReferenceLaw q(alphabet, eta, pi);
  RateResult r;
  r.tv_marginal = total_variation(type_marginal(p), eta);
  const auto sub = is_sub_consistent(pi, p, tol);
  r.subconsistency_violation = sub.max_violation;
  r.feasible = sub.holds && r.tv_marginal <= tol;
  if (r.feasible) {
    r.value = relative_entropy_log(p, [&](const LocalityKey& x) { return q.log_pmf(x); });
  }
  return r;
}

double mean(const ProbMeasure<Degree>& p) {
  double m = 0.0;
  for (const auto& [k, w] : p) m += static_cast<double>(k) * w;
  return m;
}

RateResult rate_I_c(double c, const ProbMeasure<Degree>& p, double tol) {
  if (!(c > 0.0)) throw PreconditionError("I_c needs c > 0");
  RateResult r;
  r.subconsistency_violation = std::abs(mean(p) - c);
  r.feasible = r.subconsistency_violation <= tol;
  if (r.feasible) {
    r.value = relative_entropy_log(p, [&](Degree k) { return poisson_log_pmf(c, k); });
  }
  return r;
}

ProbMeasure<LocalityKey> single_type_embedding(const ProbMeasure<Degree>& p) {
  std::map<LocalityKey, double> out;
  const TypeId a{0};
  for (const auto& [k, w] : p) {
    out.emplace(LocalityKey{a, k == 0 ? CountingMeasure{} : CountingMeasure({{a, k}})}, w);
  }
  return ProbMeasure<LocalityKey>(std::move(out));
}

}  // namespace typedld
