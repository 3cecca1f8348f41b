#pragma once

#include <utility>
#include <vector>

namespace flexsat {

enum class RowSense { kLe, kGe, kEq };

struct LpRow {
  std::vector<std::pair<int, double>> coeffs;  // (variable index, coefficient)
  RowSense sense = RowSense::kLe;
  double rhs = 0.0;
};

// min c'x  s.t. rows, x >= 0. Upper bounds are expressed as rows by the
// caller. Dense two-phase tableau simplex with Bland's rule throughout,
// so the pivot sequence is deterministic and cycling-free.
struct LinearProgram {
  int num_vars = 0;
  std::vector<double> objective;
  std::vector<LpRow> rows;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kAborted };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  double objective = 0.0;
  std::vector<double> x;
};

// `work` is an optional effort budget in tableau-cell updates, shared
// across calls and decremented as the solve proceeds. When it runs out
// the solve stops with kAborted, so a caller with a budget is never
// stuck inside one long LP. Effort accounting is deterministic: the
// same inputs and budget always abort at the same pivot.
LpResult solve_lp(const LinearProgram& lp, long long* work = nullptr);

}  // namespace flexsat
