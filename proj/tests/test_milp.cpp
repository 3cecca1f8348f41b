#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "flexsat/constellation.hpp"
#include "flexsat/milp.hpp"
#include "test_util.hpp"

using namespace flexsat;
using testutil::Edge;
using testutil::make_snapshot;

namespace {

// Satellites 0..1, grounds 2 (src) and 3 (dst); two disjoint one-hop
// relay paths.
struct Diamond {
  TopologySnapshot snap;
  LinkStateTable states;
  std::vector<double> powers{5.0, 3.0, 0.0, 0.0};

  Diamond() {
    snap = make_snapshot(4, {{2, 0, 10.0}, {0, 3, 10.0}, {2, 1, 15.0}, {1, 3, 15.0}});
  }

  MilpInstance model(MilpWeights w, MilpLimits lim = {}) const {
    return build_model(snap, states, {{0, 2, 3, 5.0}}, w, powers, 2, lim);
  }
};

}  // namespace

TEST_CASE("build_model basics") {
  SUBCASE("perfect link contributes nothing under (0,1,0)") {
    Diamond d;
    MilpInstance inst = d.model({0.0, 1.0, 0.0});
    for (const MilpArc& a : inst.arcs) {
      CHECK(a.reliability == doctest::Approx(1.0));
      CHECK(a.neg_log_rely == doctest::Approx(0.0));
    }
    MilpSolution sol = solve(inst);
    REQUIRE(sol.status == MilpStatus::kOptimal);
    CHECK(sol.objective == doctest::Approx(0.0));
  }
  SUBCASE("two ground nodes, direct link: 2 arc vars, no satellite vars") {
    TopologySnapshot snap = make_snapshot(2, {{0, 1, 4.0}});
    LinkStateTable states;
    MilpInstance inst = build_model(snap, states, {{0, 0, 1, 5.0}}, {0.0, 0.0, 1.0},
                                    {0.0, 0.0}, 0);
    CHECK(inst.arc_count() == 2);
    CHECK(inst.satellite_count == 0);
    CHECK(inst.variable_count() == 2);
    MilpSolution sol = solve(inst);
    REQUIRE(sol.status == MilpStatus::kOptimal);
    CHECK(sol.objective == doctest::Approx(4.0));  // no node delay anywhere
    CHECK(solution_path(inst, sol, 0) == std::vector<NodeId>{0, 1});
  }
  SUBCASE("demand endpoints must be ground stations in range") {
    Diamond d;
    CHECK_THROWS_AS(build_model(d.snap, d.states, {{0, 0, 3, 5.0}}, {1.0, 0.0, 0.0},
                                d.powers, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_model(d.snap, d.states, {{0, 2, 9, 5.0}}, {1.0, 0.0, 0.0},
                                d.powers, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_model(d.snap, d.states, {{0, 2, 2, 5.0}}, {1.0, 0.0, 0.0},
                                d.powers, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_model(d.snap, d.states, {{0, 2, 3, -1.0}}, {1.0, 0.0, 0.0},
                                d.powers, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_model(d.snap, d.states, {{0, 2, 3, 5.0}}, {0.0, 0.0, 0.0},
                                d.powers, 2),
                    std::invalid_argument);
  }
}

TEST_CASE("variable count on the full constellation") {
  Constellation c = Constellation::build(lightspeed_shells(), default_stations());
  TopologySnapshot snap = c.propagate(0, 10.0);
  LinkStateTable states;
  NodeId ott = c.station_id("ottawa"), van = c.station_id("vancouver");
  std::vector<double> powers(c.node_count(), 2.0);
  MilpInstance inst = build_model(snap, states, {{0, ott, van, 20.0}},
                                  {1.0, 0.0, 0.0}, powers, c.satellite_count());
  int undirected = static_cast<int>(snap.links.size()) / 2;
  CHECK(inst.arc_count() == 2 * undirected);
  CHECK(inst.variable_count() == 2 * undirected * 1 + 198 * 1 + 198);
}

TEST_CASE("diamond, latency weights: picks the 20 ms side") {
  Diamond d;
  MilpInstance inst = d.model({0.0, 0.0, 1.0});
  MilpSolution sol = solve(inst);
  REQUIRE(sol.status == MilpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(30.0));  // 20 ms links + one T_node
  CHECK(solution_path(inst, sol, 0) == std::vector<NodeId>{2, 0, 3});
  CHECK(audit_solution(inst, sol).empty());

  MilpSolution ora = oracle_solve(inst);
  REQUIRE(ora.status == MilpStatus::kOptimal);
  CHECK(ora.objective == doctest::Approx(sol.objective));
}

TEST_CASE("diamond, energy weights: picks the 3 W satellite") {
  Diamond d;
  MilpInstance inst = d.model({1.0, 0.0, 0.0});
  MilpSolution sol = solve(inst);
  REQUIRE(sol.status == MilpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(3.0));
  CHECK(solution_path(inst, sol, 0) == std::vector<NodeId>{2, 1, 3});
  CHECK(evaluate_objective(inst, sol) == doctest::Approx(sol.objective));
  MilpSolution ora = oracle_solve(inst);
  CHECK(ora.objective == doctest::Approx(3.0));
}

TEST_CASE("oversized demand against 20 Mbps links is infeasible") {
  Diamond d;
  for (bool shared : {true, false}) {
    MilpLimits lim;
    lim.shared_capacity = shared;
    MilpInstance inst = build_model(d.snap, d.states, {{0, 2, 3, 30.0}},
                                    {0.0, 0.0, 1.0}, d.powers, 2, lim);
    CHECK(solve(inst).status == MilpStatus::kInfeasible);
    CHECK(oracle_solve(inst).status == MilpStatus::kInfeasible);
  }
}

TEST_CASE("shared vs per-direction capacity semantics") {
  // One chain, two opposite demands of 15 Mbps on 20 Mbps links: the
  // shared reading overloads every pair, the per-direction reading fits.
  TopologySnapshot snap = make_snapshot(4, {{2, 0, 10.0}, {0, 1, 10.0}, {1, 3, 10.0}});
  LinkStateTable states;
  std::vector<double> powers{2.0, 2.0, 0.0, 0.0};
  std::vector<MilpDemand> demands{{0, 2, 3, 15.0}, {1, 3, 2, 15.0}};

  MilpLimits shared;
  MilpInstance is = build_model(snap, states, demands, {0.0, 0.0, 1.0}, powers, 2,
                                shared);
  CHECK(solve(is).status == MilpStatus::kInfeasible);
  CHECK(oracle_solve(is).status == MilpStatus::kInfeasible);

  MilpLimits perdir;
  perdir.shared_capacity = false;
  MilpInstance ip = build_model(snap, states, demands, {0.0, 0.0, 1.0}, powers, 2,
                                perdir);
  MilpSolution sol = solve(ip);
  REQUIRE(sol.status == MilpStatus::kOptimal);
  CHECK(audit_solution(ip, sol).empty());
  CHECK(oracle_solve(ip).objective == doctest::Approx(sol.objective));
}

TEST_CASE("oracle scope and trivial cases") {
  Diamond d;
  SUBCASE("empty demand set is optimal at zero") {
    MilpInstance inst = build_model(d.snap, d.states, {}, {1.0, 0.0, 0.0}, d.powers, 2);
    MilpSolution sol = solve(inst);
    CHECK(sol.status == MilpStatus::kOptimal);
    CHECK(sol.objective == doctest::Approx(0.0));
    MilpSolution ora = oracle_solve(inst);
    CHECK(ora.status == MilpStatus::kOptimal);
    CHECK(ora.objective == doctest::Approx(0.0));
  }
  SUBCASE("single simple path returned by both") {
    TopologySnapshot snap = make_snapshot(4, {{2, 0, 5.0}, {0, 1, 5.0}, {1, 3, 5.0}});
    LinkStateTable states;
    MilpInstance inst = build_model(snap, states, {{0, 2, 3, 5.0}}, {0.0, 0.0, 1.0},
                                    {2.0, 2.0, 0.0, 0.0}, 2);
    MilpSolution sol = solve(inst);
    MilpSolution ora = oracle_solve(inst);
    REQUIRE(sol.status == MilpStatus::kOptimal);
    REQUIRE(ora.status == MilpStatus::kOptimal);
    CHECK(solution_path(inst, sol, 0) == std::vector<NodeId>{2, 0, 1, 3});
    CHECK(solution_path(inst, ora, 0) == std::vector<NodeId>{2, 0, 1, 3});
  }
  SUBCASE("oracle refuses oversized instances") {
    Constellation c = Constellation::build(lightspeed_shells(), default_stations());
    TopologySnapshot snap = c.propagate(0, 10.0);
    LinkStateTable states;
    std::vector<double> powers(c.node_count(), 2.0);
    MilpInstance inst =
        build_model(snap, states, {{0, c.station_id("ottawa"),
                                    c.station_id("vancouver"), 20.0}},
                    {1.0, 0.0, 0.0}, powers, c.satellite_count());
    CHECK_THROWS_AS(oracle_solve(inst), std::invalid_argument);
  }
}

TEST_CASE("solve validation") {
  Diamond d;
  MilpInstance inst = d.model({1.0, 0.0, 0.0});
  CHECK_THROWS_AS(solve(inst, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(solve(inst, -3.0), std::invalid_argument);
}

TEST_CASE("evaluate_objective") {
  SUBCASE("all-zero assignment scores zero") {
    Diamond d;
    MilpInstance inst = d.model({1.0, 1.0, 1.0});
    MilpSolution zero;
    zero.x.assign(1, std::vector<char>(inst.arc_count(), 0));
    zero.y.assign(1, std::vector<char>(2, 0));
    zero.z.assign(2, 0);
    CHECK(evaluate_objective(inst, zero) == doctest::Approx(0.0));
  }
  SUBCASE("two 5 ms links through one satellite cost 20 under (0,0,1)") {
    TopologySnapshot snap = make_snapshot(3, {{1, 0, 5.0}, {0, 2, 5.0}});
    LinkStateTable states;
    MilpInstance inst = build_model(snap, states, {{0, 1, 2, 5.0}}, {0.0, 0.0, 1.0},
                                    {2.0, 0.0, 0.0}, 1);
    MilpSolution sol = solve(inst);
    REQUIRE(sol.status == MilpStatus::kOptimal);
    CHECK(sol.objective == doctest::Approx(20.0));
    CHECK(evaluate_objective(inst, sol) == doctest::Approx(20.0));
  }
  SUBCASE("incomplete assignment rejected") {
    Diamond d;
    MilpInstance inst = d.model({1.0, 0.0, 0.0});
    MilpSolution bad;
    CHECK_THROWS_AS(evaluate_objective(inst, bad), std::invalid_argument);
  }
}

TEST_CASE("scaling all weights leaves the argmin unchanged") {
  Diamond d;
  MilpInstance base = d.model({0.4, 0.25, 0.35});
  MilpSolution ref = solve(base);
  REQUIRE(ref.status == MilpStatus::kOptimal);
  for (double lambda : {0.5, 8.0}) {
    MilpInstance scaled = d.model(
        {0.4 * lambda, 0.25 * lambda, 0.35 * lambda});
    MilpSolution sol = solve(scaled);
    REQUIRE(sol.status == MilpStatus::kOptimal);
    CHECK(sol.x == ref.x);
    CHECK(sol.y == ref.y);
    CHECK(sol.z == ref.z);
    CHECK(sol.objective == doctest::Approx(lambda * ref.objective));
  }
}

TEST_CASE("raising the power cap never worsens the optimum") {
  // Fast side uses the 5 W satellite. Capping at 4 W forces the slow
  // side; lifting the cap recovers the faster objective.
  Diamond d;
  MilpLimits tight;
  tight.p_lim = 4.0;
  MilpSolution capped = solve(d.model({0.0, 0.0, 1.0}, tight));
  REQUIRE(capped.status == MilpStatus::kOptimal);
  CHECK(capped.objective == doctest::Approx(40.0));
  MilpSolution open = solve(d.model({0.0, 0.0, 1.0}));
  REQUIRE(open.status == MilpStatus::kOptimal);
  CHECK(open.objective == doctest::Approx(30.0));
  CHECK(open.objective <= capped.objective);

  MilpLimits dead;
  dead.p_lim = 2.0;  // both relays over the cap: nothing can route
  CHECK(solve(d.model({0.0, 0.0, 1.0}, dead)).status == MilpStatus::kInfeasible);
}

TEST_CASE("weight rows recover the slice SPF paths") {
  // 3x4 satellite mesh with ground 12 at node 0 and ground 13 at node
  // 11; perturbed delays keep optima unique.
  std::vector<Edge> edges;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      NodeId n = r * 4 + c;
      if (c + 1 < 4) edges.push_back({n, n + 1, 1.0 + 0.07 * (2 * n + 1)});
      if (r + 1 < 3) edges.push_back({n, n + 4, 1.0 + 0.07 * (2 * n + 4)});
    }
  }
  edges.push_back({12, 0, 3.0});
  edges.push_back({11, 13, 3.0});
  TopologySnapshot snap = make_snapshot(14, edges);
  LinkStateTable states;
  // Mild distinct utilizations so -log R varies per link; 1-2 congested.
  states.update(1, 2, 20.0, 20.0, 12.0);
  states.update(5, 6, 20.0, 3.0, 3.0);
  states.update(6, 7, 20.0, 2.0, 2.0);
  states.update(2, 6, 20.0, 1.0, 1.0);
  std::vector<double> powers(14, 2.0);
  powers[13] = powers[12] = 0.0;

  SUBCASE("(0,0,1) equals the Algo-128 path") {
    auto tree = compute_slice_tree(snap, states, slice_delay_128(), 12, powers, 12);
    REQUIRE(tree.count(13) == 1);
    MilpInstance inst = build_model(snap, states, {{0, 12, 13, 5.0}},
                                    {0.0, 0.0, 1.0}, powers, 12);
    MilpSolution sol = solve(inst);
    REQUIRE(sol.status == MilpStatus::kOptimal);
    CHECK(solution_path(inst, sol, 0) == tree.at(13).node_sequence);
  }
  SUBCASE("(0,1,0) equals the Algo-129 path when the optimum avoids tags") {
    auto tree = compute_slice_tree(snap, states, slice_reliability_129(), 12,
                                   powers, 12);
    REQUIRE(tree.count(13) == 1);
    MilpInstance inst = build_model(snap, states, {{0, 12, 13, 5.0}},
                                    {0.0, 1.0, 0.0}, powers, 12);
    MilpSolution sol = solve(inst);
    REQUIRE(sol.status == MilpStatus::kOptimal);
    std::vector<NodeId> path = solution_path(inst, sol, 0);
    // The optimum dodges the saturated link, so the argmin sets agree.
    for (size_t i = 0; i + 1 < path.size(); ++i) {
      CHECK_FALSE(states.get(path[i], path[i + 1]).has_tag(kTagLowRely));
    }
    CHECK(path == tree.at(13).node_sequence);
  }
}

TEST_CASE("lp export shape") {
  Diamond d;
  MilpInstance inst = d.model({1.0, 0.5, 2.0});
  std::ostringstream a, b;
  write_lp(inst, a);
  write_lp(inst, b);
  std::string text = a.str();
  CHECK(text == b.str());  // deterministic
  for (const char* bit :
       {"Minimize", "Subject To", "Binary", "End", "fl_k0_n2:", "cap_p", "pow_s0",
        "cpl_k0", "act_k0_s1", "x_k0_2_0", "y_k0_s0", "z_s1", "5 x_k0"}) {
    INFO(bit);
    CHECK(text.find(bit) != std::string::npos);
  }
}

TEST_CASE("solver is deterministic") {
  Diamond d;
  MilpInstance inst = d.model({0.3, 0.3, 0.4});
  MilpSolution s1 = solve(inst);
  MilpSolution s2 = solve(inst);
  CHECK(s1.status == s2.status);
  CHECK(s1.objective == s2.objective);
  CHECK(s1.x == s2.x);
  CHECK(s1.y == s2.y);
  CHECK(s1.z == s2.z);
}

TEST_CASE("200 random instances agree with the exhaustive oracle") {
  std::mt19937 rng(42);
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto pick = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };

  int solved = 0, infeasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    int sats = pick(2, 7);
    int grounds = pick(2, 3);
    int n = sats + grounds;

    // Random spanning tree plus a few chords.
    std::vector<Edge> edges;
    std::vector<NodeId> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    auto add_edge = [&](NodeId a, NodeId b) {
      for (const Edge& e : edges) {
        if ((e.a == a && e.b == b) || (e.a == b && e.b == a)) return;
      }
      double caps[] = {15.0, 25.0, 40.0};
      edges.push_back({a, b, uni(1.0, 20.0), caps[pick(0, 2)]});
    };
    for (int i = 1; i < n; ++i) add_edge(order[i], order[pick(0, i - 1)]);
    int chords = pick(0, 3);
    for (int i = 0; i < chords; ++i) {
      NodeId a = pick(0, n - 1), b = pick(0, n - 1);
      if (a != b) add_edge(a, b);
    }
    TopologySnapshot snap = make_snapshot(n, edges);

    LinkStateTable states;
    for (const Edge& e : edges) {
      if (uni(0.0, 1.0) < 0.5) {
        double offered = uni(0.0, e.capacity_mbps);
        double delivered = offered * uni(0.7, 1.0);
        states.update(e.a, e.b, e.capacity_mbps, offered, delivered);
      }
    }

    std::vector<double> powers(n, 0.0);
    for (int s = 0; s < sats; ++s) powers[s] = uni(2.0, 50.0);
    MilpLimits lim;
    lim.p_lim = uni(0.0, 1.0) < 0.3 ? 35.0 : 100.0;
    lim.shared_capacity = trial % 2 == 0;

    MilpWeights w{uni(0.0, 1.0), uni(0.0, 1.0), uni(0.0, 1.0)};
    if (w.alpha + w.beta + w.gamma < 1e-3) w.alpha = 1.0;

    int K = pick(1, 3);
    std::vector<MilpDemand> demands;
    for (int k = 0; k < K; ++k) {
      NodeId src = sats + pick(0, grounds - 1);
      NodeId dst = sats + pick(0, grounds - 1);
      if (src == dst) dst = sats + (dst - sats + 1) % grounds;
      demands.push_back({k, src, dst, uni(2.0, 12.0)});
    }

    MilpInstance inst = build_model(snap, states, demands, w, powers, sats, lim);
    MilpSolution sol = solve(inst, 10.0);
    MilpSolution ora = oracle_solve(inst);

    INFO("trial ", trial);
    REQUIRE(sol.status != MilpStatus::kIncumbent);
    REQUIRE(sol.status == ora.status);
    if (sol.status == MilpStatus::kOptimal) {
      ++solved;
      double tol = 1e-6 * std::max(1.0, std::abs(ora.objective));
      REQUIRE(std::abs(sol.objective - ora.objective) <= tol);
      REQUIRE(audit_solution(inst, sol).empty());
      REQUIRE(audit_solution(inst, ora).empty());
    } else {
      ++infeasible;
    }
  }
  CHECK(solved > 100);       // the generator must mostly produce solvable cases
  CHECK(solved + infeasible == 200);
}

TEST_CASE("full-constellation solve stays quick and sane") {
  Constellation c = Constellation::build(lightspeed_shells(), default_stations());
  LinkStateTable states;
  NodeId ott = c.station_id("ottawa"), van = c.station_id("vancouver");
  std::vector<double> powers(c.node_count(), 2.0);

  int slot = -1;
  TopologySnapshot snap;
  for (int s = 0; s < 50 && slot < 0; ++s) {
    snap = c.propagate(s, 10.0);
    bool ott_up = false, van_up = false;
    for (const Link& l : snap.links) {
      if (l.a == ott) ott_up = true;
      if (l.a == van) van_up = true;
    }
    if (ott_up && van_up) slot = s;
  }
  REQUIRE(slot >= 0);

  for (MilpWeights w : {MilpWeights{1.0, 0.0, 0.0}, MilpWeights{0.0, 0.0, 1.0}}) {
    MilpInstance inst = build_model(snap, states, {{0, ott, van, 20.0}}, w, powers,
                                    c.satellite_count());
    MilpSolution sol = solve(inst, 5.0);
    REQUIRE(sol.status == MilpStatus::kOptimal);
    std::vector<NodeId> path = solution_path(inst, sol, 0);
    CHECK(path.front() == ott);
    CHECK(path.back() == van);
    CHECK(audit_solution(inst, sol).empty());
  }
}
