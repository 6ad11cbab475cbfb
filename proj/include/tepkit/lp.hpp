#pragma once

// Continuous linear programs with bounded variables and a self-contained
// two-phase primal simplex solver (dense basis inverse, product-form updates).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tepkit::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RowSense { kLessEqual, kEqual, kGreaterEqual };

struct Term {
  int var;
  double coef;
};

struct Variable {
  double lower = 0.0;
  double upper = kInfinity;
  double cost = 0.0;
  std::string name;
};

struct Constraint {
  std::vector<Term> terms;
  RowSense sense = RowSense::kLessEqual;
  double rhs = 0.0;
  std::string name;
};

/// Minimization problem `min c'x + offset` over rows `a'x (<=,=,>=) rhs` and
/// variable bounds `lower <= x <= upper` (either side may be infinite).
class LinearProgram {
 public:
  int add_variable(double lower, double upper, double cost, std::string name = {}) {
    variables_.push_back({lower, upper, cost, std::move(name)});
    return static_cast<int>(variables_.size()) - 1;
  }

  int add_constraint(std::vector<Term> terms, RowSense sense, double rhs, std::string name = {}) {
    constraints_.push_back({std::move(terms), sense, rhs, std::move(name)});
    return static_cast<int>(constraints_.size()) - 1;
  }

  void set_bounds(int var, double lower, double upper) {
    variables_.at(var).lower = lower;
    variables_.at(var).upper = upper;
  }
  void set_cost(int var, double cost) { variables_.at(var).cost = cost; }
  void set_objective_offset(double offset) { offset_ = offset; }
  void add_objective_offset(double delta) { offset_ += delta; }

  [[nodiscard]] const std::vector<Variable>& variables() const { return variables_; }
  [[nodiscard]] const std::vector<Constraint>& constraints() const { return constraints_; }
  [[nodiscard]] const Variable& variable(int j) const { return variables_.at(j); }
  [[nodiscard]] const Constraint& constraint(int r) const { return constraints_.at(r); }
  [[nodiscard]] int num_variables() const { return static_cast<int>(variables_.size()); }
  [[nodiscard]] int num_constraints() const { return static_cast<int>(constraints_.size()); }
  [[nodiscard]] double objective_offset() const { return offset_; }

  [[nodiscard]] double objective_value(std::span<const double> x) const {
    double value = offset_;
    for (std::size_t j = 0; j < variables_.size(); ++j) value += variables_[j].cost * x[j];
    return value;
  }

  [[nodiscard]] double row_activity(int r, std::span<const double> x) const {
    double act = 0.0;
    for (const Term& t : constraints_.at(r).terms) act += t.coef * x[t.var];
    return act;
  }

  /// Throws std::invalid_argument on crossed bounds, NaN data or a row term
  /// that references an undeclared variable.
  void validate() const {
    for (std::size_t j = 0; j < variables_.size(); ++j) {
      const Variable& v = variables_[j];
      if (std::isnan(v.lower) || std::isnan(v.upper) || !std::isfinite(v.cost))
        throw std::invalid_argument("variable " + std::to_string(j) + " has non-numeric data");
      if (v.lower > v.upper)
        throw std::invalid_argument("variable " + std::to_string(j) + " has lower > upper");
    }
    const int n = num_variables();
    for (std::size_t r = 0; r < constraints_.size(); ++r) {
      const Constraint& c = constraints_[r];
      if (!std::isfinite(c.rhs))
        throw std::invalid_argument("constraint " + std::to_string(r) + " has non-finite rhs");
      for (const Term& t : c.terms) {
        if (t.var < 0 || t.var >= n)
          throw std::invalid_argument("constraint " + std::to_string(r) +
                                      " references undeclared variable");
        if (!std::isfinite(t.coef))
          throw std::invalid_argument("constraint " + std::to_string(r) +
                                      " has non-finite coefficient");
      }
    }
  }

 private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  double offset_ = 0.0;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kNumericFailure, kIterationLimit };

inline std::string_view to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kNumericFailure: return "numeric-failure";
    case LpStatus::kIterationLimit: return "iteration-limit";
  }
  return "unknown";
}

struct LpSolution {
  LpStatus status = LpStatus::kNumericFailure;
  std::vector<double> primal;
  /// Row duals, d(objective)/d(rhs): >= 0 on active >= rows, <= 0 on active <= rows.
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  double objective = 0.0;
  /// Infeasibility certificate: phase-1 optimum (sum of residual artificials)
  /// and the rows whose artificials stayed positive.
  double phase1_objective = 0.0;
  std::vector<int> infeasible_rows;
  long iterations = 0;
  std::string message;

  [[nodiscard]] bool optimal() const { return status == LpStatus::kOptimal; }
};

struct SolverOptions {
  double feas_tol = 1e-7;
  double opt_tol = 1e-7;
  double pivot_tol = 1e-9;
  int refactor_interval = 100;
  /// Consecutive degenerate pivots before pricing falls back to Bland's rule.
  int degenerate_streak_limit = 50;
  long max_iterations = 0;  // 0: automatic
};

struct BoundOverride {
  int var;
  double lower;
  double upper;
};

namespace detail {

class BoundedSimplex {
 public:
  BoundedSimplex(const LinearProgram& lp, const SolverOptions& opt,
                 std::span<const BoundOverride> overrides)
      : lp_(lp), opt_(opt), n_(lp.num_variables()), m_(lp.num_constraints()) {
    build_columns();
    lower_.resize(n_ + m_);
    upper_.resize(n_ + m_);
    for (int j = 0; j < n_; ++j) {
      lower_[j] = lp.variable(j).lower;
      upper_[j] = lp.variable(j).upper;
    }
    for (const BoundOverride& o : overrides) {
      lower_.at(o.var) = o.lower;
      upper_.at(o.var) = o.upper;
    }
    for (int r = 0; r < m_; ++r) {
      const Constraint& c = lp.constraint(r);
      lower_[n_ + r] = c.sense == RowSense::kLessEqual ? -kInfinity : c.rhs;
      upper_[n_ + r] = c.sense == RowSense::kGreaterEqual ? kInfinity : c.rhs;
    }
    cost_scale_ = 0.0;
    for (int j = 0; j < n_; ++j) cost_scale_ = std::max(cost_scale_, std::abs(lp.variable(j).cost));
    if (cost_scale_ == 0.0) cost_scale_ = 1.0;
  }

  LpSolution run() {
    LpSolution sol;
    for (int j = 0; j < n_; ++j) {
      if (lower_[j] > upper_[j]) {
        sol.status = LpStatus::kInfeasible;
        sol.message = "variable " + std::to_string(j) + " has crossed bounds";
        return sol;
      }
    }
    const long limit = opt_.max_iterations > 0 ? opt_.max_iterations
                                               : 20L * (n_ + 2L * m_) + 10000L;
    initial_basis();

    // Phase 1: minimize the sum of artificials.
    std::vector<double> cost(total(), 0.0);
    for (int k = 0; k < num_art(); ++k) cost[n_ + m_ + k] = 1.0;
    LpStatus st = iterate(cost, limit, /*phase_one=*/true);
    sol.iterations = iterations_;
    if (st != LpStatus::kOptimal) {
      sol.status = st == LpStatus::kUnbounded ? LpStatus::kNumericFailure : st;
      sol.message = "phase 1 did not finish";
      return sol;
    }
    double phase1 = 0.0;
    for (int k = 0; k < num_art(); ++k) {
      const int col = n_ + m_ + k;
      const double v = std::max(0.0, x_[col]);
      phase1 += v;
      const int r = art_row_[k];
      if (v > opt_.feas_tol * (1.0 + std::abs(lp_.constraint(r).rhs)))
        sol.infeasible_rows.push_back(r);
    }
    sol.phase1_objective = phase1;
    if (!sol.infeasible_rows.empty()) {
      std::sort(sol.infeasible_rows.begin(), sol.infeasible_rows.end());
      sol.status = LpStatus::kInfeasible;
      sol.message = "phase 1 optimum is positive";
      return sol;
    }
    for (int k = 0; k < num_art(); ++k) {
      const int col = n_ + m_ + k;
      lower_[col] = upper_[col] = 0.0;
      if (pos_[col] < 0) x_[col] = 0.0;
    }

    // Phase 2: original (scaled) costs.
    std::fill(cost.begin(), cost.end(), 0.0);
    for (int j = 0; j < n_; ++j) cost[j] = lp_.variable(j).cost / cost_scale_;
    st = iterate(cost, limit, /*phase_one=*/false);
    sol.iterations = iterations_;
    if (st != LpStatus::kOptimal) {
      sol.status = st;
      return sol;
    }
    if (!refactor()) {
      sol.status = LpStatus::kNumericFailure;
      sol.message = "singular basis at final refactorization";
      return sol;
    }

    sol.primal.assign(x_.begin(), x_.begin() + n_);
    // Snap nonbasic/basic values that sit within tolerance of a bound.
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lower_[j]) && std::abs(sol.primal[j] - lower_[j]) <= 1e-12 * (1 + std::abs(lower_[j])))
        sol.primal[j] = lower_[j];
      if (std::isfinite(upper_[j]) && std::abs(sol.primal[j] - upper_[j]) <= 1e-12 * (1 + std::abs(upper_[j])))
        sol.primal[j] = upper_[j];
    }
    std::vector<double> y = duals(cost);
    sol.duals.resize(m_);
    for (int r = 0; r < m_; ++r) sol.duals[r] = y[r] * cost_scale_;
    sol.reduced_costs.resize(n_);
    for (int j = 0; j < n_; ++j) sol.reduced_costs[j] = reduced_cost(j, cost, y) * cost_scale_;
    sol.objective = lp_.objective_value(sol.primal);

    if (!primal_feasible()) {
      sol.status = LpStatus::kNumericFailure;
      sol.message = "final primal residual above tolerance";
      return sol;
    }
    sol.status = LpStatus::kOptimal;
    return sol;
  }

 private:
  enum class NonbasicState : unsigned char { kLower, kUpper, kFree, kFixed };

  [[nodiscard]] int num_art() const { return static_cast<int>(art_row_.size()); }
  [[nodiscard]] int total() const { return n_ + m_ + num_art(); }

  void build_columns() {
    std::vector<std::vector<std::pair<int, double>>> cols(n_);
    for (int r = 0; r < m_; ++r) {
      for (const Term& t : lp_.constraint(r).terms) {
        auto& col = cols[t.var];
        if (!col.empty() && col.back().first == r)
          col.back().second += t.coef;
        else
          col.emplace_back(r, t.coef);
      }
    }
    col_start_.assign(n_ + 1, 0);
    for (int j = 0; j < n_; ++j) {
      for (auto [r, v] : cols[j]) {
        if (v == 0.0) continue;
        col_row_.push_back(r);
        col_val_.push_back(v);
      }
      col_start_[j + 1] = static_cast<int>(col_row_.size());
    }
  }

  template <typename F>
  void for_column(int j, F&& f) const {
    if (j < n_) {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) f(col_row_[k], col_val_[k]);
    } else if (j < n_ + m_) {
      f(j - n_, -1.0);
    } else {
      const int k = j - n_ - m_;
      f(art_row_[k], art_sign_[k]);
    }
  }

  void initial_basis() {
    x_.assign(n_ + m_, 0.0);
    state_.assign(n_ + m_, NonbasicState::kLower);
    for (int j = 0; j < n_; ++j) set_nonbasic_at_bound(j);
    std::vector<double> act(m_, 0.0);
    for (int j = 0; j < n_; ++j) {
      if (x_[j] == 0.0) continue;
      for_column(j, [&](int r, double v) { act[r] += v * x_[j]; });
    }
    basis_.assign(m_, -1);
    pos_.assign(n_ + m_, -1);
    for (int r = 0; r < m_; ++r) {
      const int s = n_ + r;
      const double lo = lower_[s], hi = upper_[s];
      if (act[r] >= lo - opt_.feas_tol && act[r] <= hi + opt_.feas_tol) {
        x_[s] = act[r];
        basis_[r] = s;
        pos_[s] = r;
        continue;
      }
      // Logical rests at its violated bound; artificial absorbs the residual.
      const double target = act[r] < lo ? lo : hi;
      x_[s] = target;
      state_[s] = lo == hi ? NonbasicState::kFixed
                           : (act[r] < lo ? NonbasicState::kLower : NonbasicState::kUpper);
      const double sign = target - act[r] > 0 ? 1.0 : -1.0;
      art_row_.push_back(r);
      art_sign_.push_back(sign);
      const int col = static_cast<int>(x_.size());
      x_.push_back(std::abs(target - act[r]));
      lower_.push_back(0.0);
      upper_.push_back(kInfinity);
      state_.push_back(NonbasicState::kLower);
      pos_.push_back(r);
      basis_[r] = col;
    }
    // Basis is diagonal: -1 for logicals, sign for artificials.
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int r = 0; r < m_; ++r) {
      double d = 0.0;
      for_column(basis_[r], [&](int, double v) { d = v; });
      binv_[idx(r, r)] = 1.0 / d;
    }
    pivots_since_refactor_ = 0;
  }

  void set_nonbasic_at_bound(int j) {
    const double lo = lower_[j], hi = upper_[j];
    if (lo == hi) {
      state_[j] = NonbasicState::kFixed;
      x_[j] = lo;
    } else if (std::isfinite(lo)) {
      state_[j] = NonbasicState::kLower;
      x_[j] = lo;
    } else if (std::isfinite(hi)) {
      state_[j] = NonbasicState::kUpper;
      x_[j] = hi;
    } else {
      state_[j] = NonbasicState::kFree;
      x_[j] = 0.0;
    }
  }

  [[nodiscard]] std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * m_ + j;
  }

  std::vector<double> duals(const std::vector<double>& cost) const {
    std::vector<double> y(m_, 0.0);
    for (int i = 0; i < m_; ++i) {
      const double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &binv_[idx(i, 0)];
      for (int r = 0; r < m_; ++r) y[r] += cb * row[r];
    }
    return y;
  }

  double reduced_cost(int j, const std::vector<double>& cost, const std::vector<double>& y) const {
    double d = cost[j];
    for_column(j, [&](int r, double v) { d -= y[r] * v; });
    return d;
  }

  void ftran(int j, std::vector<double>& alpha) const {
    alpha.assign(m_, 0.0);
    for_column(j, [&](int r, double v) {
      for (int i = 0; i < m_; ++i) alpha[i] += binv_[idx(i, r)] * v;
    });
  }

  // Rebuilds the basis inverse by Gauss-Jordan elimination with partial
  // pivoting and recomputes the basic values from the nonbasic ones.
  bool refactor() {
    std::vector<double> b(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i)
      for_column(basis_[i], [&](int r, double v) { b[idx(r, i)] = v; });
    std::vector<double> inv(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) inv[idx(i, i)] = 1.0;
    for (int c = 0; c < m_; ++c) {
      int piv = -1;
      double best = 0.0;
      for (int r = c; r < m_; ++r) {
        if (std::abs(b[idx(r, c)]) > best) {
          best = std::abs(b[idx(r, c)]);
          piv = r;
        }
      }
      if (piv < 0 || best < 1e-12) return false;
      if (piv != c) {
        for (int k = 0; k < m_; ++k) {
          std::swap(b[idx(piv, k)], b[idx(c, k)]);
          std::swap(inv[idx(piv, k)], inv[idx(c, k)]);
        }
      }
      const double p = b[idx(c, c)];
      for (int k = 0; k < m_; ++k) {
        b[idx(c, k)] /= p;
        inv[idx(c, k)] /= p;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == c) continue;
        const double f = b[idx(r, c)];
        if (f == 0.0) continue;
        for (int k = 0; k < m_; ++k) {
          b[idx(r, k)] -= f * b[idx(c, k)];
          inv[idx(r, k)] -= f * inv[idx(c, k)];
        }
      }
    }
    binv_ = std::move(inv);
    pivots_since_refactor_ = 0;
    recompute_basic_values();
    return true;
  }

  void recompute_basic_values() {
    std::vector<double> rhs(m_, 0.0);
    for (int j = 0; j < total(); ++j) {
      if (pos_[j] >= 0 || x_[j] == 0.0) continue;
      for_column(j, [&](int r, double v) { rhs[r] -= v * x_[j]; });
    }
    for (int i = 0; i < m_; ++i) {
      double v = 0.0;
      const double* row = &binv_[idx(i, 0)];
      for (int r = 0; r < m_; ++r) v += row[r] * rhs[r];
      x_[basis_[i]] = v;
    }
  }

  [[nodiscard]] bool primal_feasible() const {
    for (int j = 0; j < n_; ++j) {
      const double tol = 10 * opt_.feas_tol * (1.0 + std::abs(x_[j]));
      if (x_[j] < lower_[j] - tol || x_[j] > upper_[j] + tol) return false;
    }
    for (int r = 0; r < m_; ++r) {
      const double act = lp_.row_activity(r, std::span<const double>(x_.data(), n_));
      const double tol = 10 * opt_.feas_tol * (1.0 + std::abs(act));
      if (act < lower_[n_ + r] - tol || act > upper_[n_ + r] + tol) return false;
    }
    return true;
  }

  LpStatus iterate(const std::vector<double>& cost, long limit, bool phase_one) {
    std::vector<double> alpha;
    int degenerate_streak = 0;
    bool bland = false;
    while (true) {
      if (iterations_ >= limit) return LpStatus::kIterationLimit;
      if (pivots_since_refactor_ >= opt_.refactor_interval) {
        if (!refactor()) return LpStatus::kNumericFailure;
      }
      const std::vector<double> y = duals(cost);

      // Pricing.
      int q = -1;
      int dir = 0;
      double best = 0.0;
      for (int j = 0; j < total(); ++j) {
        if (pos_[j] >= 0) continue;
        const NonbasicState s = state_[j];
        if (s == NonbasicState::kFixed) continue;
        const double d = reduced_cost(j, cost, y);
        int jdir = 0;
        if (s == NonbasicState::kLower && d < -opt_.opt_tol) jdir = 1;
        else if (s == NonbasicState::kUpper && d > opt_.opt_tol) jdir = -1;
        else if (s == NonbasicState::kFree && std::abs(d) > opt_.opt_tol) jdir = d < 0 ? 1 : -1;
        if (jdir == 0) continue;
        if (bland) {
          q = j;
          dir = jdir;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          q = j;
          dir = jdir;
        }
      }
      if (q < 0) return LpStatus::kOptimal;

      ftran(q, alpha);

      // Harris two-pass ratio test; Bland mode takes the lowest column index
      // among exact minimum ratios.
      const double ftol = opt_.feas_tol;
      double relaxed = kInfinity;
      for (int i = 0; i < m_; ++i) {
        if (std::abs(alpha[i]) <= opt_.pivot_tol) continue;
        const int b = basis_[i];
        const double delta = -dir * alpha[i];
        double ratio = kInfinity;
        if (delta < 0 && std::isfinite(lower_[b]))
          ratio = (x_[b] - lower_[b] + ftol) / -delta;
        else if (delta > 0 && std::isfinite(upper_[b]))
          ratio = (upper_[b] + ftol - x_[b]) / delta;
        relaxed = std::min(relaxed, ratio);
      }
      int leave = -1;
      double step = kInfinity;
      double best_alpha = 0.0;
      if (std::isfinite(relaxed)) {
        double exact_min = kInfinity;
        for (int i = 0; i < m_; ++i) {
          if (std::abs(alpha[i]) <= opt_.pivot_tol) continue;
          const int b = basis_[i];
          const double delta = -dir * alpha[i];
          double ratio = kInfinity;
          if (delta < 0 && std::isfinite(lower_[b]))
            ratio = (x_[b] - lower_[b]) / -delta;
          else if (delta > 0 && std::isfinite(upper_[b]))
            ratio = (upper_[b] - x_[b]) / delta;
          if (ratio > relaxed) continue;
          ratio = std::max(ratio, 0.0);
          if (bland) {
            if (ratio < exact_min - 1e-12 ||
                (ratio <= exact_min + 1e-12 && (leave < 0 || b < basis_[leave]))) {
              exact_min = std::min(exact_min, ratio);
              leave = i;
            }
          } else if (std::abs(alpha[i]) > best_alpha) {
            best_alpha = std::abs(alpha[i]);
            leave = i;
            exact_min = ratio;
          }
        }
        step = exact_min;
      }

      const double range = upper_[q] - lower_[q];
      const bool flip = std::isfinite(range) && range <= step;
      if (!flip && leave < 0) {
        return phase_one ? LpStatus::kNumericFailure : LpStatus::kUnbounded;
      }
      if (flip) step = range;

      ++iterations_;
      if (step <= 1e-12) {
        if (++degenerate_streak >= opt_.degenerate_streak_limit) bland = true;
      } else {
        degenerate_streak = 0;
        bland = false;
      }

      x_[q] += dir * step;
      for (int i = 0; i < m_; ++i) {
        if (alpha[i] != 0.0) x_[basis_[i]] -= dir * step * alpha[i];
      }
      if (flip) {
        state_[q] = dir > 0 ? NonbasicState::kUpper : NonbasicState::kLower;
        x_[q] = dir > 0 ? upper_[q] : lower_[q];
        continue;
      }

      const int out = basis_[leave];
      const double delta = -dir * alpha[leave];
      if (delta < 0) {
        x_[out] = lower_[out];
        state_[out] = lower_[out] == upper_[out] ? NonbasicState::kFixed : NonbasicState::kLower;
      } else {
        x_[out] = upper_[out];
        state_[out] = lower_[out] == upper_[out] ? NonbasicState::kFixed : NonbasicState::kUpper;
      }
      if (phase_one && out >= n_ + m_) {
        // A departed artificial never re-enters.
        lower_[out] = upper_[out] = 0.0;
        x_[out] = 0.0;
        state_[out] = NonbasicState::kFixed;
      }
      pos_[out] = -1;
      basis_[leave] = q;
      pos_[q] = leave;

      const double piv = alpha[leave];
      double* prow = &binv_[idx(leave, 0)];
      for (int r = 0; r < m_; ++r) prow[r] /= piv;
      for (int i = 0; i < m_; ++i) {
        if (i == leave || alpha[i] == 0.0) continue;
        const double f = alpha[i];
        double* row = &binv_[idx(i, 0)];
        for (int r = 0; r < m_; ++r) row[r] -= f * prow[r];
      }
      ++pivots_since_refactor_;
    }
  }

  const LinearProgram& lp_;
  SolverOptions opt_;
  int n_;
  int m_;
  double cost_scale_ = 1.0;

  std::vector<int> col_start_;
  std::vector<int> col_row_;
  std::vector<double> col_val_;
  std::vector<int> art_row_;
  std::vector<double> art_sign_;

  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> x_;
  std::vector<NonbasicState> state_;
  std::vector<int> basis_;
  std::vector<int> pos_;
  std::vector<double> binv_;
  int pivots_since_refactor_ = 0;
  long iterations_ = 0;
};

}  // namespace detail

/// Solves `lp` with the two-phase bounded primal simplex. `overrides`
/// replaces variable bounds for this solve only (used by branch and bound).
inline LpSolution solve_lp(const LinearProgram& lp, const SolverOptions& options = {},
                           std::span<const BoundOverride> overrides = {}) {
  lp.validate();
  detail::BoundedSimplex simplex(lp, options, overrides);
  return simplex.run();
}

/// Largest absolute bound or row violation of `x`.
inline double primal_violation(const LinearProgram& lp, std::span<const double> x) {
  double worst = 0.0;
  for (int j = 0; j < lp.num_variables(); ++j) {
    const Variable& v = lp.variable(j);
    worst = std::max({worst, v.lower - x[j], x[j] - v.upper});
  }
  for (int r = 0; r < lp.num_constraints(); ++r) {
    const Constraint& c = lp.constraint(r);
    const double act = lp.row_activity(r, x);
    if (c.sense != RowSense::kLessEqual) worst = std::max(worst, c.rhs - act);
    if (c.sense != RowSense::kGreaterEqual) worst = std::max(worst, act - c.rhs);
  }
  return worst;
}

namespace detail {

inline std::string lp_name(const std::string& name, char prefix, int index) {
  std::string out;
  if (name.empty()) return std::string(1, prefix) + std::to_string(index);
  for (char ch : name) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '_' || ch == '.';
    out.push_back(ok ? ch : '_');
  }
  if (out.front() >= '0' && out.front() <= '9') out.insert(out.begin(), prefix);
  return out + "_" + std::to_string(index);
}

inline std::string lp_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Renders `lp` in CPLEX LP text format. `binaries` lists variables for the
/// Binaries section.
inline std::string to_lp_format(const LinearProgram& lp, std::span<const int> binaries = {}) {
  std::ostringstream out;
  std::vector<std::string> names(lp.num_variables());
  for (int j = 0; j < lp.num_variables(); ++j) names[j] = detail::lp_name(lp.variable(j).name, 'x', j);

  auto write_terms = [&](const std::vector<std::pair<int, double>>& terms) {
    bool first = true;
    for (auto [j, c] : terms) {
      if (c == 0.0) continue;
      out << (c < 0 ? " - " : (first ? " " : " + ")) << detail::lp_number(std::abs(c)) << ' '
          << names[j];
      first = false;
    }
    if (first && !names.empty()) out << " 0 " << names[0];
  };

  out << "\\ objective offset " << detail::lp_number(lp.objective_offset()) << "\nMinimize\n obj:";
  std::vector<std::pair<int, double>> obj;
  for (int j = 0; j < lp.num_variables(); ++j) obj.emplace_back(j, lp.variable(j).cost);
  write_terms(obj);
  out << "\nSubject To\n";
  for (int r = 0; r < lp.num_constraints(); ++r) {
    const Constraint& c = lp.constraint(r);
    out << ' ' << detail::lp_name(c.name, 'c', r) << ':';
    std::vector<std::pair<int, double>> terms;
    for (const Term& t : c.terms) terms.emplace_back(t.var, t.coef);
    write_terms(terms);
    out << (c.sense == RowSense::kLessEqual ? " <= " : c.sense == RowSense::kEqual ? " = " : " >= ")
        << detail::lp_number(c.rhs) << '\n';
  }
  out << "Bounds\n";
  for (int j = 0; j < lp.num_variables(); ++j) {
    const Variable& v = lp.variable(j);
    if (!std::isfinite(v.lower) && !std::isfinite(v.upper)) {
      out << ' ' << names[j] << " free\n";
    } else {
      out << ' ' << (std::isfinite(v.lower) ? detail::lp_number(v.lower) : "-inf") << " <= " << names[j]
          << " <= " << (std::isfinite(v.upper) ? detail::lp_number(v.upper) : "+inf") << '\n';
    }
  }
  if (!binaries.empty()) {
    out << "Binaries\n";
    for (int j : binaries) out << ' ' << names.at(j) << '\n';
  }
  out << "End\n";
  return out.str();
}

}  // namespace tepkit::lp
