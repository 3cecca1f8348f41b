#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "flexsat/linkstate.hpp"

namespace flexsat {

// One directed arc of the optimization graph. Arcs come in reverse
// pairs; pair_index identifies the undirected link for shared-capacity
// accounting.
struct MilpArc {
  NodeId from = 0;
  NodeId to = 0;
  double delay_ms = 0.0;
  double capacity_mbps = 0.0;
  double reliability = 1.0;
  double neg_log_rely = 0.0;  // min(-log(max(R, 1e-13)), 30)
  int pair_index = 0;
};

struct MilpDemand {
  int id = 0;
  NodeId src = 0;
  NodeId dst = 0;
  double bandwidth_mbps = 0.0;
};

struct MilpWeights {
  double alpha = 1.0;
  double beta = 0.0;
  double gamma = 0.0;
};

struct MilpLimits {
  double p_lim = 100.0;
  double t_node_ms = 10.0;
  // Capacity shared across the two directions of a link (default), or
  // enforced per direction.
  bool shared_capacity = true;
  // Among objective-optimal assignments, prefer the one with the lowest
  // total latency (keeps zero-cost ties deterministic and SPF-like).
  bool latency_tie_break = true;
};

// Objective: alpha * sum p_i z_i
//          + beta  * sum_(i,j) [-log R_ij] sum_k x_ij^k
//          + gamma * (sum_(i,j) d_ij sum_k x_ij^k + T_node sum_i sum_k y_i^k)
// subject to flow conservation, degree <= 4 per satellite per demand,
// link capacity, peak power, x <= y coupling and z >= y activation.
struct MilpInstance {
  int node_count = 0;
  int satellite_count = 0;           // ids below this are satellites
  std::vector<double> node_power;    // p_i; 0 for ground stations
  std::vector<MilpArc> arcs;         // sorted by (from, to)
  std::vector<MilpDemand> demands;
  MilpWeights weights;
  MilpLimits limits;

  int arc_count() const { return static_cast<int>(arcs.size()); }
  int demand_count() const { return static_cast<int>(demands.size()); }
  // x variables, then y, then z.
  int variable_count() const {
    return demand_count() * arc_count() +
           demand_count() * satellite_count + satellite_count;
  }
};

enum class MilpStatus { kOptimal, kIncumbent, kInfeasible };

struct MilpSolution {
  MilpStatus status = MilpStatus::kInfeasible;
  double objective = 0.0;
  double best_bound = 0.0;
  double solve_time_s = 0.0;
  std::vector<std::vector<char>> x;  // [demand][arc]
  std::vector<std::vector<char>> y;  // [demand][satellite]
  std::vector<char> z;               // [satellite]
};

// Assembles the instance from a snapshot: every snapshot link becomes an
// arc, reliability read from the link-state table (floored at 1e-13).
// Demand endpoints must be ground stations present in the snapshot.
MilpInstance build_model(const TopologySnapshot& snapshot,
                         const LinkStateTable& states,
                         const std::vector<MilpDemand>& demands,
                         MilpWeights weights,
                         const std::vector<double>& node_powers,
                         int satellite_count, MilpLimits limits = {});

// Exact solve: corridor preprocessing (safe per-demand arc fixing from
// Dijkstra bounds and a greedy sequential-routing incumbent), then
// branch-and-bound over the LP relaxation (Bland simplex, most-fractional
// branching, best-bound selection). Deterministic apart from
// solve_time_s. Throws on non-positive budget.
MilpSolution solve(const MilpInstance& inst, double time_budget_s = 5.0);

// Exhaustive verification oracle: enumerates all combinations of simple
// paths per demand and checks every constraint family directly. Refuses
// instances above 12 nodes or 3 demands.
MilpSolution oracle_solve(const MilpInstance& inst);

// Objective value of a complete assignment; throws if x/y/z dimensions
// do not match the instance.
double evaluate_objective(const MilpInstance& inst, const MilpSolution& sol);

// Independent constraint audit (flow, degree, capacity, power, coupling,
// activation, binariness). Returns human-readable violations; empty means
// the assignment is feasible.
std::vector<std::string> audit_solution(const MilpInstance& inst,
                                        const MilpSolution& sol);

// Node sequence src..dst of demand k under the solution's x. Throws if x
// does not describe a simple path for that demand.
std::vector<NodeId> solution_path(const MilpInstance& inst,
                                  const MilpSolution& sol, int k);

// LP-format text export (CPLEX dialect) of the full model.
void write_lp(const MilpInstance& inst, std::ostream& os);

}  // namespace flexsat
