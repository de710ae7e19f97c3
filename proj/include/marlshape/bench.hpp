#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "marlshape/learner.hpp"
#include "marlshape/metrics.hpp"
#include "marlshape/shaping.hpp"

// The shipped benchmarks and the training harness: independent Q-learning
// over either the shaped runtime (shared automaton state, common reward)
// or the plain environment with a hand-written per-benchmark reward rule.

namespace marlshape::bench {

enum class Mode { Shaped, Baseline };

enum class BaselineRuleId { Buttons, Flags, Rendezvous };

struct BaselineRewardRule {
  BaselineRuleId id = BaselineRuleId::Buttons;
  double sync_reward = 2.0;
  double goal_reward = 10.0;
};

// Benchmark catalog entry; file paths are relative to a fixture root.
struct BenchmarkDef {
  std::string name;
  std::string grid_file;
  std::string automaton_file;
  BaselineRuleId rule;
  long episodes;
  int episode_length;
  int agents = 2;
};

const BenchmarkDef* find_benchmark(std::string_view name);
std::span<const BenchmarkDef> benchmark_catalog();

// Per-episode bookkeeping for the one-time baseline rewards.
struct BaselineEpisodeMemory {
  bool sync_done = false;
  std::vector<std::string> flags_taken;
  std::vector<gridworld::Cell> goals_claimed;

  void reset(int n_agents);
};

// Rewards for one environment transition under the given rule:
//   buttons / rendezvous: sync_reward to every agent on the first step where
//     one agent stands on an 'a' cell and another on a 'b' cell;
//   flags: sync_reward to each agent standing on a flag cell the first time
//     that flag is collected in the episode;
//   all rules: goal_reward on arrival at a goal cell, once per goal per
//     episode, paid to the first agent to claim it.
std::vector<double> baseline_reward(const BaselineRewardRule& rule,
                                    const gridworld::GridSpec& grid,
                                    std::span<const gridworld::AgentState> before,
                                    std::span<const gridworld::AgentState> after,
                                    BaselineEpisodeMemory& memory);

struct TrainSpec {
  gridworld::GridSpec grid;
  std::shared_ptr<const automaton::Ldba> ldba;  // required in shaped mode
  Mode mode = Mode::Shaped;
  BaselineRewardRule rule;
  shaping::Params params;
  learner::Schedule explore;
  learner::Schedule learning_rate;
  long episodes = 0;
  int episode_length = 100;
};

struct RunResult {
  std::uint64_t seed = 0;
  metrics::RunReturns returns;  // [agent][episode]
  std::vector<learner::QTable> q_tables;
};

RunResult train_single(const TrainSpec& spec, std::uint64_t seed);

struct ExperimentResult {
  std::vector<RunResult> runs;  // ordered as the seeds argument
  metrics::MethodCurves curves;
};

// Fans seeds out over a worker pool; results merge deterministically in
// seed order.
ExperimentResult run_experiment(const TrainSpec& spec, std::span<const std::uint64_t> seeds,
                                int n_threads = 0, int window = metrics::kDefaultWindow);

// CSV schema: episode,seed,agent,raw_return,normalized,smoothed,rolling_std.
// Rows are grouped by (seed, agent) with episodes ascending.
void write_csv(std::ostream& out, const ExperimentResult& result,
               int window = metrics::kDefaultWindow);

}  // namespace marlshape::bench
