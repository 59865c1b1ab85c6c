#pragma once

// Minimization of H(p || q_ref) over degree laws on {0..K} cut out by linear
// equality and inequality constraints.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "typedld/measures.hpp"

namespace typedld {

/// f(k) = slope * k + points[k]; "mean" is slope 1, "pmf@k" is points {k: 1}.
struct LinearFunctional {
  double slope = 0.0;
  std::map<Degree, double> points;

  static LinearFunctional mean() { return {1.0, {}}; }
  static LinearFunctional pmf_at(Degree k) { return {0.0, {{k, 1.0}}}; }

  double operator()(Degree k) const {
    auto it = points.find(k);
    return slope * static_cast<double>(k) + (it == points.end() ? 0.0 : it->second);
  }
  std::vector<double> dense(std::size_t K) const;
  double apply(const ProbMeasure<Degree>& p) const;
  /// <f, D> for the degree law with `histogram[k]` nodes of degree k out of n.
  double apply(std::span<const std::uint32_t> histogram, std::size_t n) const;
};

struct LinearConstraint {
  LinearFunctional f;
  double r;
};

/// Gamma = { p on {0..K} : <f,p> = r for equalities, <f,p> >= r for inequalities }.
/// The simplex constraint is implicit.
struct ConstraintSet {
  std::size_t K = 0;
  std::vector<LinearConstraint> equalities;
  std::vector<LinearConstraint> inequalities;

  /// Membership of an arbitrary degree law; K is not enforced.
  bool contains(const ProbMeasure<Degree>& p, double tol = 1e-9) const;
  bool contains(std::span<const std::uint32_t> histogram, std::size_t n, double tol = 1e-9) const;
};

/// {"K": int, "eq": [{"f": ..., "r": num}], "ge": [...]} where f is "mean", "pmf@k"
/// or an object {"<k>": coef, "mean": slope}. `default_K` is used when "K" is absent.
ConstraintSet constraint_set_from_json(const Json& j, std::optional<std::size_t> default_K = std::nullopt);
Json to_json(const ConstraintSet& cons);

struct Certificate {
  /// Multipliers of the equality and inequality constraints (the latter are >= 0).
  std::vector<double> eq_multipliers;
  std::vector<double> ge_multipliers;
  /// log of the Gibbs normalizer: p(k) = q(k) exp(sum_i lambda_i f_i(k) - log_partition), q normalized.
  double log_partition = 0.0;
  /// Max of primal infeasibility, complementary slackness and stationarity residuals.
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
  /// Points of {0..K} on which every feasible law vanishes.
  std::vector<Degree> forced_zero;
};

struct Optimum {
  ProbMeasure<Degree> minimizer;
  double value;
  Certificate certificate;
};

Json to_json(const Optimum& opt);

/// Minimizes H(p || q_ref) over cons. q_ref has K+1 strictly positive entries and is
/// normalized to a probability on {0..K} first. Throws InfeasibleConstraints when Gamma is empty.
Optimum minimize_relative_entropy(std::span<const double> q_ref, const ConstraintSet& cons);

/// p_theta(k) proportional to q_ref(k) exp(theta k) on {0..K}.
ProbMeasure<Degree> tilted_family(std::span<const double> q_ref, double theta, std::size_t K);

/// Poisson(c) pmf on {0..K} (not renormalized).
std::vector<double> poisson_reference(double c, std::size_t K);

/// max(50, ceil(10 c)).
std::size_t default_support_cap(double c);

/// inf over cons of I_c: appends mean = c and minimizes against Poisson(c) on {0..K}.
Optimum rate_infimum_for_event(double c, const ConstraintSet& cons);

}  // namespace typedld
