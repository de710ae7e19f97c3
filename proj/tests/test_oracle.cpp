#include "marlshape/oracle.hpp"

#include <cmath>

#include "doctest.h"
#include "marlshape/rng.hpp"
#include "test_util.hpp"

using namespace marlshape;
using namespace marlshape::oracle;
using gridworld::Cell;

namespace {

// Two labeled cells in a row; moving east from the first succeeds with the
// slip probability and otherwise stays (all other directions are blocked).
GridSpec two_cell_world() {
  GridSpec spec(2, 1, 0.9);
  spec.set_labels({0, 0}, {"a"});
  spec.set_labels({1, 0}, {"b"});
  spec.add_start({0, 0});
  return spec;
}

const char* kTwoRegions =
    "HOA: v1\n"
    "States: 4\n"
    "Start: 0\n"
    "AP: 3 \"a\" \"b\" \"__eps__\"\n"
    "Acceptance: 1 Inf(0)\n"
    "--BODY--\n"
    "State: 0\n"
    "[t] 0\n"
    "[2] 1\n"
    "[2] 2\n"
    "State: 1\n"
    "[0] 1 {0}\n"
    "[!0] 3\n"
    "State: 2\n"
    "[1] 2 {0}\n"
    "[!1] 3\n"
    "State: 3\n"
    "[t] 3\n"
    "--END--\n";

automaton::Ldba load_text(const char* text) {
  return automaton::Ldba::load(hoa::parse_hoa(text));
}

automaton::Ldba load_fixture(const std::string& rel) {
  return automaton::Ldba::load(hoa::parse_hoa(read_fixture(rel)));
}

std::vector<std::mt19937_64> streams(int n, std::uint64_t seed = 5) {
  std::vector<std::mt19937_64> out;
  for (int i = 0; i < n; ++i) out.push_back(make_stream(seed, 200 + i));
  return out;
}

}  // namespace

TEST_CASE("one agent on two cells with a four-state automaton gives 8 product states") {
  const auto ldba = load_text(kTwoRegions);
  const ProductMdp m = build_product(ldba, {two_cell_world()});
  CHECK(m.num_states() == 8);
  CHECK(m.initial_state() == m.state_id(std::vector<Cell>{{0, 0}}, 0));
}

TEST_CASE("accepting product states are the stable-region pairs") {
  const auto ldba = load_text(kTwoRegions);
  const ProductMdp m = build_product(ldba, {two_cell_world()});
  std::vector<long> expected{
      m.state_id(std::vector<Cell>{{0, 0}}, 1), m.state_id(std::vector<Cell>{{0, 0}}, 2),
      m.state_id(std::vector<Cell>{{1, 0}}, 1), m.state_id(std::vector<Cell>{{1, 0}}, 2)};
  std::sort(expected.begin(), expected.end());
  CHECK(m.accepting_states() == expected);
}

TEST_CASE("a wrong epsilon guess falls into the non-accepting sink") {
  const auto ldba = load_text(kTwoRegions);
  const ProductMdp m = build_product(ldba, {two_cell_world()});
  auto rngs = streams(1);
  Params params;
  // second epsilon move (into the b-region) taken while reading label a
  const std::vector<int> actions{gridworld::epsilon_action(1)};
  const auto rec = simulate_step(m, m.initial_state(), actions, rngs, params);
  CHECK(rec.state == m.state_id(std::vector<Cell>{{0, 0}}, 3));
  CHECK(rec.trapped);
  CHECK(rec.reward == params.trap_reward);
}

TEST_CASE("the same guess from the other cell enters the accepting region") {
  const auto ldba = load_text(kTwoRegions);
  const ProductMdp m = build_product(ldba, {two_cell_world()});
  auto rngs = streams(1);
  Params params;
  const long from = m.state_id(std::vector<Cell>{{1, 0}}, 0);
  const std::vector<int> actions{gridworld::epsilon_action(1)};
  const auto rec = simulate_step(m, from, actions, rngs, params);
  CHECK(rec.state == m.state_id(std::vector<Cell>{{1, 0}}, 2));
  CHECK(rec.accepting);
  CHECK(rec.reward == 1.0 - params.gamma_b);
}

TEST_CASE("empty action sequence yields a trace of the initial state only") {
  const auto ldba = load_text(kTwoRegions);
  const ProductMdp m = build_product(ldba, {two_cell_world()});
  auto rngs = streams(1);
  const auto trace = simulate_product(m, {}, rngs, {});
  REQUIRE(trace.size() == 1);
  CHECK(trace[0].state == m.initial_state());
}

TEST_CASE("two agents on 3x3 grids with a 3-state automaton give 243 states") {
  const auto ldba = load_text(
      "HOA: v1\nStates: 3\nStart: 0\nAP: 2 \"a\" \"b\"\nAcceptance: 1 Inf(0)\n"
      "--BODY--\nState: 0\n[!0 | !1] 0\n[0 & 1] 1\nState: 1\n[t] 1 {0}\n"
      "State: 2\n[t] 2\n--END--\n");
  GridSpec g(3, 3, 0.8);
  g.add_start({0, 0});
  const ProductMdp m = build_product(ldba, {g, g});
  CHECK(m.num_states() == 243);
}

TEST_CASE("the state cap is enforced") {
  const auto ldba = load_fixture("automata/rendezvous.hoa");
  GridSpec g(10, 10, 0.8);
  g.add_start({0, 0});
  CHECK_THROWS_AS(build_product(ldba, {g, g, g}, 100000), ProductStateCapExceeded);
}

TEST_CASE("enumerated transition distributions sum to one") {
  const auto ldba = load_fixture("automata/motivating_phi3.hoa");
  const auto grid = gridworld::parse_grid(read_fixture("grids/buttons_mini.grid"));
  const ProductMdp m = build_product(ldba, per_agent_views(grid));
  auto rng = make_stream(60, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const long state = static_cast<long>(rng() % m.num_states());
    std::vector<int> actions;
    for (int i = 0; i < m.num_agents(); ++i) {
      const auto legal = m.available_actions(state, i);
      actions.push_back(legal[rng() % legal.size()]);
    }
    const auto dist = m.transition_distribution(state, actions);
    double total = 0.0;
    for (const auto& [next, p] : dist) {
      CHECK(p > 0.0);
      CHECK(next >= 0);
      CHECK(next < m.num_states());
      total += p;
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("the shaping runtime matches the explicit product on the mini worlds") {
  const struct {
    const char* grid;
    const char* aut;
  } instances[] = {
      {"grids/buttons_mini.grid", "automata/motivating_phi3.hoa"},
      {"grids/flags_mini.grid", "automata/flags.hoa"},
      {"grids/rendezvous_mini.grid", "automata/rendezvous.hoa"},
  };
  for (const auto& inst : instances) {
    const auto ldba = load_fixture(inst.aut);
    const auto grid = gridworld::parse_grid(read_fixture(inst.grid));
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto report = check_equivalence(ldba, per_agent_views(grid), {}, 3000, seed);
      INFO(inst.grid, " seed ", seed, ": ", report.detail);
      CHECK_FALSE(report.diverged);
      CHECK(report.steps_checked == 3000);
    }
  }
}

TEST_CASE("a trivial all-accepting automaton pays every step in both systems") {
  GridSpec g(1, 1, 0.8);
  g.add_start({0, 0});
  const auto ldba = load_text(
      "HOA: v1\nStates: 1\nStart: 0\nAP: 0\nAcceptance: 1 Inf(0)\n"
      "--BODY--\nState: 0\n[t] 0 {0}\n--END--\n");
  Params params;
  auto rngs = streams(1);
  const ProductMdp m = build_product(ldba, {g});
  std::vector<std::vector<int>> seq(100, std::vector<int>{gridworld::kStay});
  const auto trace = simulate_product(m, seq, rngs, params);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    CHECK(trace[i].reward == 1.0 - params.gamma_b);
    CHECK(trace[i].accepting);
  }
  const auto report = check_equivalence(ldba, {g}, params, 500, 9);
  CHECK_FALSE(report.diverged);
}

TEST_CASE("a mis-ordered automaton update is caught as a divergence") {
  // Mutant semantics: label transition applied before the epsilon move.
  const auto ldba = load_fixture("automata/motivating_phi3.hoa");
  const auto grid = gridworld::parse_grid(read_fixture("grids/buttons_mini.grid"));
  auto ldba_ptr = std::shared_ptr<const automaton::Ldba>(&ldba, [](const automaton::Ldba*) {});
  const shaping::ShapingConfig cfg(grid, ldba_ptr, {});

  auto truth_rngs = streams(2, 11);
  auto mutant_rngs = streams(2, 11);
  auto action_rng = make_stream(11, 7);

  auto truth = shaping::reset(cfg);
  struct MutantState {
    std::vector<gridworld::AgentState> agents;
    int q;
  } mutant{truth.agents, truth.q};

  bool diverged = false;
  long divergence_step = -1;
  for (long step = 0; step < 5000 && !diverged; ++step) {
    std::vector<int> actions;
    for (int i = 0; i < cfg.num_agents(); ++i) {
      const auto legal = shaping::augmented_actions(cfg, truth, i);
      std::size_t k = static_cast<std::size_t>(uniform_unit(action_rng) * legal.size());
      if (k >= legal.size()) k = legal.size() - 1;
      actions.push_back(legal[k]);
    }

    const auto out = shaping::joint_step(truth, actions, cfg, truth_rngs);

    // mutant step with the same coupled randomness
    std::optional<int> eps;
    for (int i = 0; i < cfg.num_agents(); ++i)
      if (gridworld::is_epsilon_action(actions[i]) && !eps)
        eps = gridworld::epsilon_id_of(actions[i]);
    std::vector<gridworld::AgentState> next(cfg.num_agents());
    for (int i = 0; i < cfg.num_agents(); ++i) {
      next[i] = gridworld::is_epsilon_action(actions[i])
                    ? mutant.agents[i]
                    : gridworld::env_step(cfg.grid(), mutant.agents[i], actions[i],
                                          mutant_rngs[i]);
    }
    hoa::LabelMask labels = 0;
    for (const auto& a : next) labels |= cfg.cell_labels(a.cell);
    int mq = cfg.ldba().step_label(mutant.q, labels).next_state;  // label first (wrong)
    if (eps) mq = cfg.ldba().step_epsilon(mq, *eps).next_state;

    if (mq != out.next.q) {
      diverged = true;
      divergence_step = step;
      break;
    }
    if (out.next.terminated) {
      truth = shaping::reset(cfg);
      mutant.agents = truth.agents;
      mutant.q = truth.q;
    } else {
      truth = out.next;
      mutant.agents = next;
      mutant.q = mq;
    }
  }
  CHECK(diverged);
  CHECK(divergence_step >= 0);
}

TEST_CASE("per-agent views split a shared world") {
  const auto grid = gridworld::parse_grid(read_fixture("grids/buttons_mini.grid"));
  const auto views = per_agent_views(grid);
  REQUIRE(views.size() == 2);
  for (const auto& v : views) {
    CHECK(v.num_agents() == 1);
    CHECK(v.label_map() == grid.label_map());
    CHECK(v.wall_segments() == grid.wall_segments());
  }
  CHECK(views[0].starts()[0] == grid.starts()[0]);
  CHECK(views[1].starts()[0] == grid.starts()[1]);
}
