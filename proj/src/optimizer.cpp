#include "typedld/optimizer.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>

#include "simplex.hpp"
#include "typedld/rate.hpp"

namespace typedld {

std::vector<double> LinearFunctional::dense(std::size_t K) const {
  std::vector<double> out(K + 1);
  for (std::size_t k = 0; k <= K; ++k) out[k] = (*this)(static_cast<Degree>(k));
  return out;
}

double LinearFunctional::apply(const ProbMeasure<Degree>& p) const {
  double s = 0.0;
  for (const auto& [k, w] : p) s += (*this)(k) * w;
  return s;
}

double LinearFunctional::apply(std::span<const std::uint32_t> histogram, std::size_t n) const {
  double s = 0.0;
  for (std::size_t k = 0; k < histogram.size(); ++k) {
    if (histogram[k] != 0) s += (*this)(static_cast<Degree>(k)) * histogram[k];
  }
  return s / static_cast<double>(n);
}

bool ConstraintSet::contains(const ProbMeasure<Degree>& p, double tol) const {
  for (const auto& c : equalities) {
    if (std::abs(c.f.apply(p) - c.r) > tol) return false;
  }
  for (const auto& c : inequalities) {
    if (c.f.apply(p) < c.r - tol) return false;
  }
  return true;
}

bool ConstraintSet::contains(std::span<const std::uint32_t> histogram, std::size_t n, double tol) const {
  for (const auto& c : equalities) {
    if (std::abs(c.f.apply(histogram, n) - c.r) > tol) return false;
  }
  for (const auto& c : inequalities) {
    if (c.f.apply(histogram, n) < c.r - tol) return false;
  }
  return true;
}

namespace {

Degree parse_degree(std::string_view s) {
  Degree k = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), k);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("invalid degree '" + std::string(s) + "' in constraint");
  }
  return k;
}

LinearFunctional functional_from_json(const Json& f, const std::string& where) {
  if (f.is_string()) {
    const auto s = f.get<std::string>();
    if (s == "mean") return LinearFunctional::mean();
    if (s.starts_with("pmf@")) return LinearFunctional::pmf_at(parse_degree(std::string_view(s).substr(4)));
    throw ParseError(where + ": unknown functional shorthand '" + s + "'");
  }
  if (!f.is_object()) throw ParseError(where + ": 'f' must be a string or an object");
  LinearFunctional out;
  for (const auto& [k, v] : f.items()) {
    if (!v.is_number()) throw ParseError(where + ": coefficient of '" + k + "' is not a number");
    if (k == "mean") {
      out.slope = v.get<double>();
    } else {
      out.points[parse_degree(k)] = v.get<double>();
    }
  }
  return out;
}

std::vector<LinearConstraint> constraints_from_json(const Json& j, const char* field) {
  std::vector<LinearConstraint> out;
  if (!j.contains(field)) return out;
  const auto& arr = j[field];
  if (!arr.is_array()) throw ParseError(std::string("constraint field '") + field + "' must be an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = std::string(field) + "[" + std::to_string(i) + "]";
    const auto& c = arr[i];
    if (!c.is_object() || !c.contains("f") || !c.contains("r") || !c["r"].is_number()) {
      throw ParseError(where + ": expected {\"f\": ..., \"r\": number}");
    }
    out.push_back({functional_from_json(c["f"], where), c["r"].get<double>()});
  }
  return out;
}

Json functional_to_json(const LinearFunctional& f) {
  if (f.slope == 1.0 && f.points.empty()) return "mean";
  if (f.slope == 0.0 && f.points.size() == 1 && f.points.begin()->second == 1.0) {
    return "pmf@" + std::to_string(f.points.begin()->first);
  }
  Json o = Json::object();
  if (f.slope != 0.0) o["mean"] = f.slope;
  for (const auto& [k, v] : f.points) o[std::to_string(k)] = v;
  return o;
}

}  // namespace

ConstraintSet constraint_set_from_json(const Json& j, std::optional<std::size_t> default_K) {
  if (!j.is_object()) throw ParseError("constraint set must be a JSON object");
  ConstraintSet cons;
  if (j.contains("K")) {
    if (!j["K"].is_number_unsigned()) throw ParseError("constraint field 'K' must be a positive integer");
    cons.K = j["K"].get<std::size_t>();
  } else if (default_K) {
    cons.K = *default_K;
  } else {
    throw ParseError("constraint field 'K' is missing");
  }
  if (cons.K < 1) throw ParseError("constraint field 'K' must be at least 1");
  cons.equalities = constraints_from_json(j, "eq");
  cons.inequalities = constraints_from_json(j, "ge");
  return cons;
}

Json to_json(const ConstraintSet& cons) {
  Json j;
  j["K"] = cons.K;
  auto list = [](const std::vector<LinearConstraint>& cs) {
    Json arr = Json::array();
    for (const auto& c : cs) arr.push_back(Json{{"f", functional_to_json(c.f)}, {"r", c.r}});
    return arr;
  };
  j["eq"] = list(cons.equalities);
  j["ge"] = list(cons.inequalities);
  return j;
}

Json to_json(const Optimum& opt) {
  Json j;
  j["value"] = opt.value;
  Json m = Json::object();
  for (const auto& [k, w] : opt.minimizer) m[std::to_string(k)] = w;
  j["minimizer"] = std::move(m);
  j["eq_multipliers"] = opt.certificate.eq_multipliers;
  j["ge_multipliers"] = opt.certificate.ge_multipliers;
  j["log_partition"] = opt.certificate.log_partition;
  j["kkt_residual"] = opt.certificate.kkt_residual;
  j["iterations"] = opt.certificate.iterations;
  j["forced_zero"] = opt.certificate.forced_zero;
  return j;
}

namespace {

constexpr std::size_t kMaxIterations = 100000;
constexpr double kStopResidual = 1e-12;

double log_sum_exp(const Eigen::VectorXd& s) {
  const double m = s.maxCoeff();
  return m + std::log((s.array() - m).exp().sum());
}

// The dual of min H(p||q) over the Gibbs family on the support.
struct Dual {
  Eigen::VectorXd log_q;   // on support
  Eigen::MatrixXd F;       // constraints x support
  Eigen::VectorXd r;
  std::size_t n_eq;

  struct Eval {
    Eigen::VectorXd p;
    double log_z;
    double value;          // lambda.r - log Z
    Eigen::VectorXd grad;  // r - F p
  };

  Eval eval(const Eigen::VectorXd& lambda) const {
    Eval e;
    const Eigen::VectorXd s = log_q + F.transpose() * lambda;
    e.log_z = log_sum_exp(s);
    e.p = (s.array() - e.log_z).exp().matrix();
    e.value = lambda.dot(r) - e.log_z;
    e.grad = r - F * e.p;
    return e;
  }

  void project(Eigen::VectorXd& lambda) const {
    for (Eigen::Index i = static_cast<Eigen::Index>(n_eq); i < lambda.size(); ++i) lambda[i] = std::max(0.0, lambda[i]);
  }

  // Primal infeasibility, complementary slackness; stationarity holds by construction.
  double residual(const Eigen::VectorXd& lambda, const Eval& e) const {
    double res = 0.0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      const double slack = -e.grad[i];  // F p - r
      if (i < static_cast<Eigen::Index>(n_eq)) {
        res = std::max(res, std::abs(slack));
      } else {
        res = std::max({res, std::max(0.0, -slack), std::abs(lambda[i] * slack)});
      }
    }
    return res;
  }
};

}  // namespace

Optimum minimize_relative_entropy(std::span<const double> q_ref, const ConstraintSet& cons) {
  const std::size_t K = cons.K;
  if (K < 1) throw PreconditionError("support cap K must be at least 1");
  if (q_ref.size() != K + 1) throw PreconditionError("q_ref must have K+1 entries");
  for (std::size_t k = 0; k <= K; ++k) {
    if (!(q_ref[k] > 0.0) || !std::isfinite(q_ref[k])) {
      throw PreconditionError("q_ref must be strictly positive on {0..K}; q_ref(" + std::to_string(k) + ") = " +
                              format_weight(q_ref[k]));
    }
  }
  const std::size_t n_eq = cons.equalities.size();
  const std::size_t n_ge = cons.inequalities.size();
  std::vector<std::vector<double>> rows;  // dense functionals on {0..K}
  std::vector<double> rhs;
  for (const auto& c : cons.equalities) {
    rows.push_back(c.f.dense(K));
    rhs.push_back(c.r);
  }
  for (const auto& c : cons.inequalities) {
    rows.push_back(c.f.dense(K));
    rhs.push_back(c.r);
  }

  // Phase 1 on p (K+1 columns) plus one surplus column per inequality.
  const std::size_t nvar = K + 1 + n_ge;
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  A.emplace_back(nvar, 0.0);
  std::fill(A.back().begin(), A.back().begin() + static_cast<std::ptrdiff_t>(K + 1), 1.0);
  b.push_back(1.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<double> row(nvar, 0.0);
    std::copy(rows[i].begin(), rows[i].end(), row.begin());
    if (i >= n_eq) row[K + 1 + (i - n_eq)] = -1.0;
    A.push_back(std::move(row));
    b.push_back(rhs[i]);
  }
  const auto phase1 = detail::solve_lp(A, b, std::vector<double>(nvar, 0.0));
  if (phase1.status == detail::LpResult::Status::infeasible) {
    throw InfeasibleConstraints(
        "constraint set is infeasible: phase-1 minimal total violation " + format_weight(phase1.infeasibility),
        phase1.infeasibility);
  }

  // Points that some feasible law charges; the average of those laws is a relative-interior point.
  std::vector<bool> positive(K + 1, false);
  std::vector<std::vector<double>> witnesses{phase1.x};
  auto mark = [&](const std::vector<double>& x) {
    for (std::size_t k = 0; k <= K; ++k) {
      if (x[k] > 1e-12) positive[k] = true;
    }
  };
  mark(phase1.x);
  for (std::size_t k = 0; k <= K; ++k) {
    if (positive[k]) continue;
    std::vector<double> c(nvar, 0.0);
    c[k] = -1.0;
    const auto lp = detail::solve_lp(A, b, c);
    if (lp.status == detail::LpResult::Status::optimal) mark(lp.x);
  }
  std::vector<Degree> support;
  Certificate cert;
  for (std::size_t k = 0; k <= K; ++k) {
    if (positive[k]) {
      support.push_back(static_cast<Degree>(k));
    } else {
      cert.forced_zero.push_back(static_cast<Degree>(k));
    }
  }

  const auto m = static_cast<Eigen::Index>(rows.size());
  const auto s = static_cast<Eigen::Index>(support.size());
  Dual dual;
  dual.n_eq = n_eq;
  dual.log_q.resize(s);
  dual.F.resize(m, s);
  dual.r.resize(m);
  double q_mass = 0.0;
  for (double w : q_ref) q_mass += w;
  const double log_mass = std::log(q_mass);
  for (Eigen::Index j = 0; j < s; ++j) {
    dual.log_q[j] = std::log(q_ref[support[j]]) - log_mass;
    for (Eigen::Index i = 0; i < m; ++i) dual.F(i, j) = rows[i][support[j]];
  }
  for (Eigen::Index i = 0; i < m; ++i) dual.r[i] = rhs[i];

  // Projected Newton ascent on the concave dual.
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  auto cur = dual.eval(lambda);
  std::size_t iter = 0;
  for (; iter < kMaxIterations; ++iter) {
    if (dual.residual(lambda, cur) <= kStopResidual) break;
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < m; ++i) {
      const bool at_bound = i >= static_cast<Eigen::Index>(n_eq) && lambda[i] <= 1e-14 && cur.grad[i] < 0.0;
      if (!at_bound) free.push_back(i);
    }
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(m);
    if (!free.empty()) {
      const Eigen::VectorXd fp = dual.F * cur.p;
      const Eigen::MatrixXd cov = dual.F * cur.p.asDiagonal() * dual.F.transpose() - fp * fp.transpose();
      const auto nf = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd H(nf, nf);
      Eigen::VectorXd g(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        g[a] = cur.grad[free[a]];
        for (Eigen::Index c = 0; c < nf; ++c) H(a, c) = cov(free[a], free[c]);
      }
      const double ridge = 1e-13 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
      H.diagonal().array() += ridge;
      const Eigen::VectorXd d = H.ldlt().solve(g);
      for (Eigen::Index a = 0; a < nf; ++a) dir[free[a]] = d[a];
    }
    const double res = dual.residual(lambda, cur);
    auto try_direction = [&](const Eigen::VectorXd& d) {
      for (double t = 1.0; t > 1e-12; t *= 0.5) {
        Eigen::VectorXd cand = lambda + t * d;
        dual.project(cand);
        auto e = dual.eval(cand);
        const bool progress = e.value > cur.value || dual.residual(cand, e) < res;
        if (progress && e.value >= cur.value + 1e-4 * cur.grad.dot(cand - lambda) && e.value >= cur.value) {
          lambda = std::move(cand);
          cur = std::move(e);
          return true;
        }
      }
      return false;
    };
    if (!try_direction(dir) && !try_direction(cur.grad)) break;
  }

  cert.iterations = iter;
  cert.log_partition = cur.log_z;
  cert.eq_multipliers.assign(lambda.data(), lambda.data() + n_eq);
  cert.ge_multipliers.assign(lambda.data() + n_eq, lambda.data() + m);

  std::map<Degree, double> pm;
  double value = 0.0;
  for (Eigen::Index j = 0; j < s; ++j) {
    const double pj = cur.p[j];
    if (pj > 0.0) {
      pm.emplace(support[j], pj);
      value += pj * (std::log(pj) - dual.log_q[j]);
    }
  }
  // Stationarity: log(p/q) + 1 - lambda.F must be constant on the support.
  double stat = 0.0;
  {
    const Eigen::VectorXd lin = dual.F.transpose() * lambda;
    double ref = 0.0;
    bool first = true;
    for (Eigen::Index j = 0; j < s; ++j) {
      if (!(cur.p[j] > 0.0)) continue;
      const double g = std::log(cur.p[j]) - dual.log_q[j] - lin[j];
      if (first) {
        ref = g;
        first = false;
      }
      stat = std::max(stat, std::abs(g - ref));
    }
  }
  cert.kkt_residual = std::max(dual.residual(lambda, cur), stat);

  // Renormalize against rounding so the minimizer is a valid ProbMeasure.
  double total = 0.0;
  for (const auto& [k, w] : pm) total += w;
  for (auto& [k, w] : pm) w /= total;
  return Optimum{ProbMeasure<Degree>(std::move(pm)), std::max(0.0, value), std::move(cert)};
}

ProbMeasure<Degree> tilted_family(std::span<const double> q_ref, double theta, std::size_t K) {
  if (q_ref.size() < K + 1) throw PreconditionError("q_ref must cover {0..K}");
  Eigen::VectorXd s(static_cast<Eigen::Index>(K + 1));
  for (std::size_t k = 0; k <= K; ++k) {
    if (!(q_ref[k] > 0.0)) throw PreconditionError("q_ref must be positive on {0..K}");
    s[static_cast<Eigen::Index>(k)] = std::log(q_ref[k]) + theta * static_cast<double>(k);
  }
  const double lz = log_sum_exp(s);
  std::map<Degree, double> out;
  double total = 0.0;
  for (std::size_t k = 0; k <= K; ++k) {
    const double w = std::exp(s[static_cast<Eigen::Index>(k)] - lz);
    if (w > 0.0) {
      out.emplace(static_cast<Degree>(k), w);
      total += w;
    }
  }
  for (auto& [k, w] : out) w /= total;
  return ProbMeasure<Degree>(std::move(out));
}

std::vector<double> poisson_reference(double c, std::size_t K) {
  if (!(c > 0.0)) throw PreconditionError("Poisson reference needs c > 0");
  std::vector<double> q(K + 1);
  for (std::size_t k = 0; k <= K; ++k) q[k] = poisson_pmf(c, static_cast<std::uint32_t>(k));
  return q;
}

std::size_t default_support_cap(double c) {
  return std::max<std::size_t>(50, static_cast<std::size_t>(std::ceil(10.0 * c)));
}

Optimum rate_infimum_for_event(double c, const ConstraintSet& cons) {
  auto with_mean = cons;
  with_mean.equalities.push_back({LinearFunctional::mean(), c});
  const auto q = poisson_reference(c, cons.K);
  return minimize_relative_entropy(q, with_mean);
}

}  // namespace typedld
