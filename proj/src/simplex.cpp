#include "simplex.hpp"

#include <cmath>
#include <limits>

namespace typedld::detail {

namespace {

constexpr double kEps = 1e-11;

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), t_((rows + 1) * (cols + 1), 0.0), basis_(rows) {}

  double& at(std::size_t r, std::size_t c) { return t_[r * (n_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, n_); }
  double& cost(std::size_t c) { return at(m_, c); }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  std::vector<std::size_t>& basis() { return basis_; }

  void pivot(std::size_t r, std::size_t c) {
    const double p = at(r, c);
    for (std::size_t j = 0; j <= n_; ++j) at(r, j) /= p;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n_; ++j) at(i, j) -= f * at(r, j);
    }
    basis_[r] = c;
  }

  // Minimizes the cost row over columns [0, allowed); false when unbounded.
  bool optimize(std::size_t allowed) {
    while (true) {
      std::size_t enter = allowed;
      for (std::size_t j = 0; j < allowed; ++j) {
        if (cost(j) < -kEps) {
          enter = j;
          break;
        }
      }
      if (enter == allowed) return true;
      std::size_t leave = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        if (at(i, enter) > kEps) {
          const double ratio = rhs(i) / at(i, enter);
          if (leave == m_ || ratio < best - kEps ||
              (std::abs(ratio - best) <= kEps && basis_[i] < basis_[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
    }
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
};

}  // namespace

LpResult solve_lp(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                  const std::vector<double>& c) {
  const std::size_t m = A.size();
  const std::size_t n = c.size();
  Tableau t(m, n + m);
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) t.at(i, j) = sign * A[i][j];
    t.at(i, n + i) = 1.0;
    t.rhs(i) = sign * b[i];
    t.basis()[i] = n + i;
  }
  // Phase 1: minimize the sum of artificials, expressed in non-basic terms.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t.cost(j) -= t.at(i, j);
    t.rhs(m) -= t.rhs(i);
  }
  t.optimize(n + m);

  LpResult res;
  res.infeasibility = std::max(0.0, -t.rhs(m));
  if (res.infeasibility > 1e-9) {
    res.status = LpResult::Status::infeasible;
    return res;
  }
  // Drive remaining artificials out of the basis; rows with no pivot are redundant.
  std::vector<bool> redundant(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    if (t.basis()[i] < n) continue;
    std::size_t col = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(t.at(i, j)) > 1e-9) {
        col = j;
        break;
      }
    }
    if (col == n) {
      redundant[i] = true;
    } else {
      t.pivot(i, col);
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!redundant[i]) continue;
    for (std::size_t j = 0; j <= n + m; ++j) t.at(i, j) = 0.0;
    t.basis()[i] = n + m;  // never selected as a leaving row: its column entries are zero
  }
  // Phase 2 over the original columns only.
  for (std::size_t j = 0; j <= n + m; ++j) t.cost(j) = 0.0;
  for (std::size_t j = 0; j < n; ++j) t.cost(j) = c[j];
  for (std::size_t i = 0; i < m; ++i) {
    const auto bi = t.basis()[i];
    if (bi >= n) continue;
    const double cb = t.cost(bi);
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j <= n + m; ++j) t.cost(j) -= cb * t.at(i, j);
  }
  if (!t.optimize(n)) {
    res.status = LpResult::Status::unbounded;
    return res;
  }
  res.status = LpResult::Status::optimal;
  res.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (t.basis()[i] < n) res.x[t.basis()[i]] = std::max(0.0, t.rhs(i));
  }
  res.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
  return res;
}

}  // namespace typedld::detail
