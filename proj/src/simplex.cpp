#include "flexsat/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace flexsat {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-7;

// Dense tableau: m rows plus one cost row, columns for structural,
// slack/surplus and artificial variables plus the rhs.
class Tableau {
 public:
  Tableau(const LinearProgram& lp) {
    m_ = static_cast<int>(lp.rows.size());
    n_struct_ = lp.num_vars;

    // One slack/surplus per inequality, one artificial per >=/= row.
    // Rows with negative rhs are negated first so every rhs is >= 0.
    n_total_ = n_struct_;
    std::vector<int> slack_col(m_, -1), art_col(m_, -1);
    sense_.resize(m_);
    for (int r = 0; r < m_; ++r) {
      RowSense sense = lp.rows[r].sense;
      if (lp.rows[r].rhs < 0.0) {
        if (sense == RowSense::kLe) sense = RowSense::kGe;
        else if (sense == RowSense::kGe) sense = RowSense::kLe;
      }
      sense_[r] = sense;
      if (sense_[r] != RowSense::kEq) slack_col[r] = n_total_++;
    }
    first_artificial_ = n_total_;
    for (int r = 0; r < m_; ++r) {
      if (sense_[r] != RowSense::kLe) art_col[r] = n_total_++;
    }

    width_ = n_total_ + 1;
    a_.assign(static_cast<size_t>(m_) * width_, 0.0);
    basis_.assign(m_, -1);

    for (int r = 0; r < m_; ++r) {
      const LpRow& row = lp.rows[r];
      double sgn = lp.rows[r].rhs < 0.0 ? -1.0 : 1.0;
      for (const auto& [col, coef] : row.coeffs) {
        if (col < 0 || col >= n_struct_) {
          throw std::invalid_argument("simplex: coefficient index out of range");
        }
        at(r, col) += sgn * coef;
      }
      at(r, n_total_) = sgn * row.rhs;
      if (slack_col[r] >= 0) {
        at(r, slack_col[r]) = sense_[r] == RowSense::kLe ? 1.0 : -1.0;
      }
      if (art_col[r] >= 0) {
        at(r, art_col[r]) = 1.0;
        basis_[r] = art_col[r];
      } else {
        basis_[r] = slack_col[r];
      }
    }
  }

  // Phase 1: minimize the sum of artificials. kOptimal means a feasible
  // basis was found.
  LpStatus feasible(long long* work) {
    if (first_artificial_ == n_total_) return LpStatus::kOptimal;
    cost_.assign(width_, 0.0);
    for (int c = first_artificial_; c < n_total_; ++c) cost_[c] = 1.0;
    price_out();
    LpStatus st = iterate(work);
    if (st == LpStatus::kAborted) return st;
    double phase1 = -cost_[n_total_];
    if (phase1 > kFeasTol) return LpStatus::kInfeasible;
    expel_artificials();
    return LpStatus::kOptimal;
  }

  // Phase 2 over the original objective; artificials stay out.
  LpStatus optimize(const std::vector<double>& objective, long long* work) {
    cost_.assign(width_, 0.0);
    for (int c = 0; c < n_struct_ && c < static_cast<int>(objective.size()); ++c) {
      cost_[c] = objective[c];
    }
    price_out();
    return iterate(work);
  }

  std::vector<double> solution() const {
    std::vector<double> x(n_struct_, 0.0);
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] >= 0 && basis_[r] < n_struct_) x[basis_[r]] = at(r, n_total_);
    }
    return x;
  }

  double objective_value() const { return -cost_[n_total_]; }

 private:
  double& at(int r, int c) { return a_[static_cast<size_t>(r) * width_ + c]; }
  double at(int r, int c) const { return a_[static_cast<size_t>(r) * width_ + c]; }

  // Reduced costs for the current basis: c_j - c_B B^-1 a_j.
  void price_out() {
    for (int r = 0; r < m_; ++r) {
      double cb = cost_[basis_[r]];
      if (cb == 0.0) continue;
      for (int c = 0; c <= n_total_; ++c) {
        cost_[c] -= cb * at(r, c);
      }
    }
  }

  void pivot(int pr, int pc) {
    double pv = at(pr, pc);
    double inv = 1.0 / pv;
    for (int c = 0; c <= n_total_; ++c) at(pr, c) *= inv;
    at(pr, pc) = 1.0;
    for (int r = 0; r < m_; ++r) {
      if (r == pr) continue;
      double f = at(r, pc);
      if (f == 0.0) continue;
      for (int c = 0; c <= n_total_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
    double f = cost_[pc];
    if (f != 0.0) {
      for (int c = 0; c <= n_total_; ++c) cost_[c] -= f * at(pr, c);
      cost_[pc] = 0.0;
    }
    basis_[pr] = pc;
  }

  // Artificial columns never re-enter the basis; they begin basic and
  // only leave, which keeps phase 2 clean without column removal.
  LpStatus iterate(long long* work) {
    long long pivot_cost = static_cast<long long>(m_ + 1) * width_;
    // Dantzig pricing normally; after a degenerate stall switch to
    // Bland's rule, whose termination guarantee breaks any cycle, and
    // re-arm fast pricing on the next real improvement.
    const int stall_limit = m_ + 16;
    int stalled = 0;
    double last_obj = objective_value();
    for (;;) {
      if (work != nullptr) {
        *work -= pivot_cost;
        if (*work <= 0) return LpStatus::kAborted;
      }
      int pc = -1;
      if (stalled < stall_limit) {
        // Most negative reduced cost, lowest index on ties.
        double most = -kPivotTol;
        for (int c = 0; c < first_artificial_; ++c) {
          if (cost_[c] < most) {
            most = cost_[c];
            pc = c;
          }
        }
      } else {
        // Bland: lowest-index column with a negative reduced cost.
        for (int c = 0; c < first_artificial_; ++c) {
          if (cost_[c] < -kPivotTol) {
            pc = c;
            break;
          }
        }
      }
      if (pc < 0) return LpStatus::kOptimal;

      // Ratio test; ties go to the smallest basis variable (Bland).
      int pr = -1;
      double best = 0.0;
      for (int r = 0; r < m_; ++r) {
        double arc = at(r, pc);
        if (arc <= kPivotTol) continue;
        double ratio = at(r, n_total_) / arc;
        if (pr < 0 || ratio < best - kPivotTol ||
            (std::abs(ratio - best) <= kPivotTol && basis_[r] < basis_[pr])) {
          pr = r;
          best = ratio;
        }
      }
      if (pr < 0) return LpStatus::kUnbounded;
      pivot(pr, pc);
      double obj = objective_value();
      if (obj < last_obj - kPivotTol * std::max(1.0, std::abs(last_obj))) {
        stalled = 0;
        last_obj = obj;
      } else {
        ++stalled;
      }
    }
  }

  // After phase 1, pivot any artificial still basic (at zero) onto a
  // structural/slack column, or leave the redundant row inert.
  void expel_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < first_artificial_) continue;
      int pc = -1;
      for (int c = 0; c < first_artificial_; ++c) {
        if (std::abs(at(r, c)) > kPivotTol) {
          pc = c;
          break;
        }
      }
      if (pc >= 0) pivot(r, pc);
    }
  }

  int m_ = 0;
  int n_struct_ = 0;
  int n_total_ = 0;
  int first_artificial_ = 0;
  int width_ = 0;
  std::vector<double> a_;
  std::vector<double> cost_;
  std::vector<int> basis_;
  std::vector<RowSense> sense_;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, long long* work) {
  if (lp.num_vars <= 0) {
    // Degenerate: only constants. Feasible iff every row holds at x = 0.
    LpResult res;
    for (const LpRow& row : lp.rows) {
      bool ok = true;
      switch (row.sense) {
        case RowSense::kLe: ok = 0.0 <= row.rhs + kFeasTol; break;
        case RowSense::kGe: ok = 0.0 >= row.rhs - kFeasTol; break;
        case RowSense::kEq: ok = std::abs(row.rhs) <= kFeasTol; break;
      }
      if (!ok) return res;
    }
    res.status = LpStatus::kOptimal;
    res.objective = 0.0;
    return res;
  }

  Tableau tab(lp);
  LpResult res;
  LpStatus feas = tab.feasible(work);
  if (feas != LpStatus::kOptimal) {
    res.status = feas;
    return res;
  }
  LpStatus st = tab.optimize(lp.objective, work);
  res.status = st;
  if (st == LpStatus::kOptimal) {
    res.x = tab.solution();
    res.objective = tab.objective_value();
  }
  return res;
}

}  // namespace flexsat
