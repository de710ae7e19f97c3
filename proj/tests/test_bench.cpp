#include "marlshape/bench.hpp"

#include <sstream>

#include "doctest.h"
#include "marlshape/rng.hpp"
#include "test_util.hpp"

using namespace marlshape;
using namespace marlshape::bench;
using gridworld::AgentState;
using gridworld::Cell;

namespace {

std::shared_ptr<const automaton::Ldba> load_ldba(const std::string& rel) {
  return std::make_shared<automaton::Ldba>(
      automaton::Ldba::load(hoa::parse_hoa(read_fixture(rel))));
}

TrainSpec tiny_shaped_spec(long episodes = 50) {
  TrainSpec spec;
  spec.grid = gridworld::parse_grid(read_fixture("grids/rendezvous_mini.grid"));
  spec.ldba = load_ldba("automata/rendezvous.hoa");
  spec.mode = Mode::Shaped;
  spec.explore = {1.0, 0.1, episodes, learner::ScheduleKind::Linear};
  spec.learning_rate = {1.0, 0.01, episodes, learner::ScheduleKind::Linear};
  spec.episodes = episodes;
  spec.episode_length = 25;
  return spec;
}

}  // namespace

TEST_CASE("the catalog knows the three benchmarks") {
  CHECK(find_benchmark("buttons") != nullptr);
  CHECK(find_benchmark("flags") != nullptr);
  CHECK(find_benchmark("rendezvous") != nullptr);
  CHECK(find_benchmark("nonesuch") == nullptr);
  CHECK(find_benchmark("buttons")->episodes == 100000);
  CHECK(find_benchmark("flags")->episodes == 150000);
}

TEST_CASE("buttons baseline: simultaneous presence on a and b pays each agent once") {
  const auto grid = gridworld::parse_grid(read_fixture("grids/buttons.grid"));
  BaselineRewardRule rule{BaselineRuleId::Buttons, 2.0, 10.0};
  BaselineEpisodeMemory memory;
  memory.reset(2);

  const std::vector<AgentState> off{{{0, 2}, false}, {{4, 1}, false}};
  const std::vector<AgentState> on{{{0, 1}, false}, {{4, 1}, false}};

  auto r = baseline_reward(rule, grid, off, on, memory);
  CHECK(r == std::vector<double>{2.0, 2.0});
  // staying put does not pay again
  r = baseline_reward(rule, grid, on, on, memory);
  CHECK(r == std::vector<double>{0.0, 0.0});
}

TEST_CASE("flags baseline: each flag pays its collector once per episode") {
  const auto grid = gridworld::parse_grid(read_fixture("grids/flags.grid"));
  BaselineRewardRule rule{BaselineRuleId::Flags, 2.0, 10.0};
  BaselineEpisodeMemory memory;
  memory.reset(2);

  const std::vector<AgentState> start{{{0, 0}, false}, {{5, 0}, false}};
  const std::vector<AgentState> on_a{{{2, 2}, false}, {{5, 0}, false}};

  auto r = baseline_reward(rule, grid, start, on_a, memory);
  CHECK(r == std::vector<double>{2.0, 0.0});
  r = baseline_reward(rule, grid, on_a, on_a, memory);
  CHECK(r == std::vector<double>{0.0, 0.0});

  // the other flag still pays, to its collector
  const std::vector<AgentState> on_b{{{2, 2}, false}, {{3, 4}, false}};
  r = baseline_reward(rule, grid, on_a, on_b, memory);
  CHECK(r == std::vector<double>{0.0, 2.0});
}

TEST_CASE("each goal pays its first claimant once per episode") {
  const auto grid = gridworld::parse_grid(read_fixture("grids/rendezvous.grid"));
  BaselineRewardRule rule{BaselineRuleId::Rendezvous, 2.0, 10.0};
  BaselineEpisodeMemory memory;
  memory.reset(2);

  const std::vector<AgentState> before{{{0, 5}, false}, {{6, 0}, false}};
  const std::vector<AgentState> arrived{{{0, 6}, true}, {{6, 0}, false}};
  auto r = baseline_reward(rule, grid, before, arrived, memory);
  CHECK(r == std::vector<double>{10.0, 0.0});
  // absorbed agents trigger nothing further
  r = baseline_reward(rule, grid, arrived, arrived, memory);
  CHECK(r == std::vector<double>{0.0, 0.0});

  // a second arrival at the claimed goal pays nothing; the other goal pays
  BaselineEpisodeMemory memory2;
  memory2.reset(2);
  const std::vector<AgentState> both_near{{{0, 5}, false}, {{1, 6}, false}};
  const std::vector<AgentState> same_goal{{{0, 6}, true}, {{0, 6}, true}};
  r = baseline_reward(rule, grid, both_near, same_goal, memory2);
  CHECK(r == std::vector<double>{10.0, 0.0});
  BaselineEpisodeMemory memory3;
  memory3.reset(2);
  const std::vector<AgentState> split{{{0, 6}, true}, {{6, 6}, true}};
  const std::vector<AgentState> near_split{{{0, 5}, false}, {{6, 5}, false}};
  r = baseline_reward(rule, grid, near_split, split, memory3);
  CHECK(r == std::vector<double>{10.0, 10.0});
}

TEST_CASE("steps without events pay nothing") {
  const auto grid = gridworld::parse_grid(read_fixture("grids/rendezvous.grid"));
  BaselineRewardRule rule{BaselineRuleId::Rendezvous, 2.0, 10.0};
  BaselineEpisodeMemory memory;
  memory.reset(2);
  const std::vector<AgentState> s{{{1, 1}, false}, {{5, 1}, false}};
  CHECK(baseline_reward(rule, grid, s, s, memory) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("normalize rescales by the observed extremes") {
  const std::vector<double> raw{5.0, 10.0, 10.0};
  const auto r = metrics::normalize(raw, 5.0, 10.0);
  CHECK_FALSE(r.constant_input);
  CHECK(r.values == std::vector<double>{0.0, 1.0, 1.0});
}

TEST_CASE("constant curves pin to one half with a warning flag") {
  const std::vector<double> raw{3.0, 3.0, 3.0};
  const auto r = metrics::normalize(raw, 3.0, 3.0);
  CHECK(r.constant_input);
  CHECK(r.values == std::vector<double>{0.5, 0.5, 0.5});
}

TEST_CASE("a window larger than the series gives cumulative means") {
  const std::vector<double> raw{1.0, 2.0, 3.0};
  const auto smoothed = metrics::rolling_mean(raw, 10);
  CHECK(smoothed[0] == doctest::Approx(1.0));
  CHECK(smoothed[1] == doctest::Approx(1.5));
  CHECK(smoothed[2] == doctest::Approx(2.0));
  CHECK(smoothed.size() == raw.size());
}

TEST_CASE("rolling std matches a direct computation") {
  const std::vector<double> raw{1.0, 3.0, 1.0, 3.0};
  const auto dev = metrics::rolling_std(raw, 2);
  CHECK(dev[0] == doctest::Approx(0.0));
  CHECK(dev[1] == doctest::Approx(1.0));
  CHECK(dev[2] == doctest::Approx(1.0));
}

TEST_CASE("normalization is monotone: the argmax episode is preserved") {
  auto rng = make_stream(70, 0);
  std::vector<double> raw;
  for (int i = 0; i < 200; ++i) raw.push_back(uniform_unit(rng) * 20.0 - 5.0);
  const auto norm = metrics::normalize(raw, -5.0, 15.0).values;
  const auto argmax = [](const std::vector<double>& v) {
    return std::distance(v.begin(), std::max_element(v.begin(), v.end()));
  };
  CHECK(argmax(raw) == argmax(norm));
}

TEST_CASE("shaped runs hand every agent the same reward") {
  const auto result = train_single(tiny_shaped_spec(), 21);
  REQUIRE(result.returns.size() == 2);
  CHECK(result.returns[0] == result.returns[1]);
}

TEST_CASE("zero episodes yield an empty curve") {
  auto spec = tiny_shaped_spec(0);
  const std::uint64_t seeds[] = {1};
  const auto result = run_experiment(spec, seeds, 1);
  CHECK(result.curves.mean_normalized.empty());
  CHECK(result.runs.size() == 1);
  CHECK(result.runs[0].returns[0].empty());
}

TEST_CASE("identical seeds and configs give bitwise-identical tables") {
  // The buttons task traps under random play, so returns are nonzero
  // from the first episodes and seed differences are visible.
  TrainSpec spec;
  spec.grid = gridworld::parse_grid(read_fixture("grids/buttons_mini.grid"));
  spec.ldba = load_ldba("automata/motivating_phi3.hoa");
  spec.mode = Mode::Shaped;
  spec.episodes = 60;
  spec.episode_length = 25;
  spec.explore = {1.0, 0.1, spec.episodes, learner::ScheduleKind::Linear};
  spec.learning_rate = {1.0, 0.01, spec.episodes, learner::ScheduleKind::Linear};

  const auto a = train_single(spec, 77);
  const auto b = train_single(spec, 77);
  CHECK(a.returns == b.returns);
  CHECK(a.q_tables == b.q_tables);
  const auto c = train_single(spec, 78);
  CHECK(a.returns != c.returns);
}

TEST_CASE("the worker pool merges results in seed order") {
  const auto spec = tiny_shaped_spec();
  const std::uint64_t seeds[] = {5, 6, 7, 8};
  const auto parallel = run_experiment(spec, seeds, 4);
  const auto serial = run_experiment(spec, seeds, 1);
  REQUIRE(parallel.runs.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(parallel.runs[i].seed == seeds[i]);
    CHECK(parallel.runs[i].returns == serial.runs[i].returns);
  }
  CHECK(parallel.curves.mean_normalized == serial.curves.mean_normalized);
}

TEST_CASE("csv output carries the schema header and is deterministic") {
  const auto spec = tiny_shaped_spec(20);
  const std::uint64_t seeds[] = {3, 4};
  const auto result = run_experiment(spec, seeds, 2, 5);
  std::ostringstream a, b;
  write_csv(a, result, 5);
  write_csv(b, result, 5);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("episode,seed,agent,raw_return,normalized,smoothed,rolling_std\n", 0) == 0);
  // one row per (seed, agent, episode) plus the header
  std::size_t rows = 0;
  for (char ch : a.str())
    if (ch == '\n') ++rows;
  CHECK(rows == 1 + 2 * 2 * 20);
}

TEST_CASE("baseline training learns the mini rendezvous goals") {
  TrainSpec spec;
  spec.grid = gridworld::parse_grid(read_fixture("grids/rendezvous_mini.grid"));
  spec.mode = Mode::Baseline;
  spec.rule = {BaselineRuleId::Rendezvous, 2.0, 10.0};
  spec.episodes = 4000;
  spec.episode_length = 20;
  spec.explore = {1.0, 0.05, spec.episodes, learner::ScheduleKind::Linear};
  spec.learning_rate = {1.0, 0.01, spec.episodes, learner::ScheduleKind::Linear};
  const auto result = train_single(spec, 9);
  double tail = 0.0;
  const int tail_len = 500;
  for (int agent = 0; agent < 2; ++agent)
    for (long ep = spec.episodes - tail_len; ep < spec.episodes; ++ep)
      tail += result.returns[agent][ep];
  tail /= 2 * tail_len;
  CHECK(tail > 5.0);  // goals are two steps away; well above chance
}
