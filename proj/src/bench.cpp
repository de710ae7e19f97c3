#include "marlshape/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "marlshape/rng.hpp"

namespace marlshape::bench {

namespace {

const BenchmarkDef kCatalog[] = {
    {"buttons", "grids/buttons.grid", "automata/motivating_phi3.hoa", BaselineRuleId::Buttons,
     100000, 200, 2},
    {"flags", "grids/flags.grid", "automata/flags.hoa", BaselineRuleId::Flags, 150000, 100, 2},
    {"rendezvous", "grids/rendezvous.grid", "automata/rendezvous.hoa", BaselineRuleId::Rendezvous,
     200000, 300, 2},
};

bool has_ap(const std::vector<std::string>& aps, std::string_view name) {
  return std::find(aps.begin(), aps.end(), name) != aps.end();
}

}  // namespace

const BenchmarkDef* find_benchmark(std::string_view name) {
  for (const auto& def : kCatalog)
    if (def.name == name) return &def;
  return nullptr;
}

std::span<const BenchmarkDef> benchmark_catalog() {
  return kCatalog;
}

void BaselineEpisodeMemory::reset(int) {
  sync_done = false;
  flags_taken.clear();
  goals_claimed.clear();
}

std::vector<double> baseline_reward(const BaselineRewardRule& rule,
                                    const gridworld::GridSpec& grid,
                                    std::span<const gridworld::AgentState> before,
                                    std::span<const gridworld::AgentState> after,
                                    BaselineEpisodeMemory& memory) {
  const int n = static_cast<int>(after.size());
  std::vector<double> rewards(n, 0.0);

  if (rule.id == BaselineRuleId::Buttons || rule.id == BaselineRuleId::Rendezvous) {
    if (!memory.sync_done) {
      bool on_a = false, on_b = false;
      for (int i = 0; i < n; ++i) {
        const auto& aps = grid.labels_at(after[i].cell);
        // An agent standing on a cell labeled both a and b counts for one side only.
        if (has_ap(aps, "a") && !on_a)
          on_a = true;
        else if (has_ap(aps, "b"))
          on_b = true;
      }
      if (on_a && on_b) {
        memory.sync_done = true;
        for (int i = 0; i < n; ++i) rewards[i] += rule.sync_reward;
      }
    }
  } else {  // flags
    for (const auto& flag : {std::string("a"), std::string("b")}) {
      if (std::find(memory.flags_taken.begin(), memory.flags_taken.end(), flag) !=
          memory.flags_taken.end())
        continue;
      bool collected = false;
      for (int i = 0; i < n; ++i) {
        if (has_ap(grid.labels_at(after[i].cell), flag)) {
          rewards[i] += rule.sync_reward;
          collected = true;
        }
      }
      if (collected) memory.flags_taken.push_back(flag);
    }
  }

  for (int i = 0; i < n; ++i) {
    if (before[i].absorbed || !after[i].absorbed) continue;
    const auto claimed = std::find(memory.goals_claimed.begin(), memory.goals_claimed.end(),
                                   after[i].cell);
    if (claimed == memory.goals_claimed.end()) {
      rewards[i] += rule.goal_reward;
      memory.goals_claimed.push_back(after[i].cell);
    }
  }
  return rewards;
}

namespace {

RunResult train_shaped(const TrainSpec& spec, std::uint64_t seed) {
  const shaping::ShapingConfig cfg(spec.grid, spec.ldba, spec.params);
  const int n = cfg.num_agents();
  const int n_cells = spec.grid.num_cells();
  const int n_q = cfg.ldba().num_states();
  const int n_actions = gridworld::kNumEnvActions + cfg.ldba().total_epsilon_actions();

  RunResult result;
  result.seed = seed;
  result.returns.assign(n, std::vector<double>(spec.episodes, 0.0));
  for (int i = 0; i < n; ++i) result.q_tables.emplace_back(n_cells, n_q, n_actions);

  std::vector<std::mt19937_64> policy_rngs, env_rngs;
  for (int i = 0; i < n; ++i) {
    policy_rngs.push_back(make_stream(seed, 100 + i));
    env_rngs.push_back(make_stream(seed, 200 + i));
  }

  std::vector<int> actions(n);
  std::vector<std::vector<int>> legal(n), legal_next(n);
  std::vector<int> pre_cell(n);
  const std::vector<int> kNoActions;
  for (long ep = 0; ep < spec.episodes; ++ep) {
    const double explore = learner::schedule_value(spec.explore, ep);
    const double alpha = learner::schedule_value(spec.learning_rate, ep);
    auto state = shaping::reset(cfg);
    for (int t = 0; t < spec.episode_length; ++t) {
      for (int i = 0; i < n; ++i) {
        shaping::augmented_actions_into(cfg, state, i, legal[i]);
        pre_cell[i] = spec.grid.cell_index(state.agents[i].cell);
        actions[i] = learner::select_action(result.q_tables[i], pre_cell[i], state.q, legal[i],
                                            explore, policy_rngs[i]);
      }
      const int pre_q = state.q;
      auto out = shaping::joint_step(state, actions, cfg, env_rngs);
      const bool terminal = out.next.terminated || t == spec.episode_length - 1;
      for (int i = 0; i < n; ++i) {
        const int next_cell = spec.grid.cell_index(out.next.agents[i].cell);
        if (!terminal) shaping::augmented_actions_into(cfg, out.next, i, legal_next[i]);
        learner::q_update(result.q_tables[i], pre_cell[i], pre_q, actions[i], out.reward,
                          out.gamma_used, next_cell, out.next.q,
                          terminal ? kNoActions : legal_next[i], alpha, terminal);
        result.returns[i][ep] += out.reward;
      }
      state = std::move(out.next);
      if (state.terminated) break;
    }
  }
  return result;
}

RunResult train_baseline(const TrainSpec& spec, std::uint64_t seed) {
  const auto& grid = spec.grid;
  const int n = grid.num_agents();
  const int n_cells = grid.num_cells();

  RunResult result;
  result.seed = seed;
  result.returns.assign(n, std::vector<double>(spec.episodes, 0.0));
  for (int i = 0; i < n; ++i)
    result.q_tables.emplace_back(n_cells, 1, gridworld::kNumEnvActions);

  std::vector<std::mt19937_64> policy_rngs, env_rngs;
  for (int i = 0; i < n; ++i) {
    policy_rngs.push_back(make_stream(seed, 100 + i));
    env_rngs.push_back(make_stream(seed, 200 + i));
  }

  static const std::vector<int> kAllEnv = {0, 1, 2, 3, 4};
  static const std::vector<int> kStayOnly = {gridworld::kStay};
  static const std::vector<int> kNoActions;

  std::vector<gridworld::AgentState> state(n), next(n);
  std::vector<int> actions(n);
  BaselineEpisodeMemory memory;
  for (long ep = 0; ep < spec.episodes; ++ep) {
    const double explore = learner::schedule_value(spec.explore, ep);
    const double alpha = learner::schedule_value(spec.learning_rate, ep);
    for (int i = 0; i < n; ++i) state[i] = {grid.starts()[i], grid.is_goal(grid.starts()[i])};
    memory.reset(n);
    for (int t = 0; t < spec.episode_length; ++t) {
      for (int i = 0; i < n; ++i) {
        const auto& legal = state[i].absorbed ? kStayOnly : kAllEnv;
        actions[i] = learner::select_action(result.q_tables[i],
                                            grid.cell_index(state[i].cell), 0, legal, explore,
                                            policy_rngs[i]);
        next[i] = gridworld::env_step(grid, state[i], actions[i], env_rngs[i]);
      }
      const auto rewards = baseline_reward(spec.rule, grid, state, next, memory);
      const bool terminal = t == spec.episode_length - 1;
      for (int i = 0; i < n; ++i) {
        const auto& legal_next =
            terminal ? kNoActions : (next[i].absorbed ? kStayOnly : kAllEnv);
        learner::q_update(result.q_tables[i], grid.cell_index(state[i].cell), 0, actions[i],
                          rewards[i], spec.params.gamma, grid.cell_index(next[i].cell), 0,
                          legal_next, alpha, terminal);
        result.returns[i][ep] += rewards[i];
      }
      state = next;
    }
  }
  return result;
}

}  // namespace

RunResult train_single(const TrainSpec& spec, std::uint64_t seed) {
  if (spec.episodes < 0) throw std::invalid_argument("episode count must be non-negative");
  if (spec.mode == Mode::Shaped) {
    if (!spec.ldba) throw std::invalid_argument("shaped mode requires an automaton");
    return train_shaped(spec, seed);
  }
  return train_baseline(spec, seed);
}

ExperimentResult run_experiment(const TrainSpec& spec, std::span<const std::uint64_t> seeds,
                                int n_threads, int window) {
  ExperimentResult result;
  result.runs.resize(seeds.size());
  if (n_threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    n_threads = hw == 0 ? 2 : static_cast<int>(hw);
  }
  n_threads = std::min<int>(n_threads, static_cast<int>(seeds.size()));

  if (n_threads <= 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) result.runs[i] = train_single(spec, seeds[i]);
  } else {
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (int w = 0; w < n_threads; ++w) {
      workers.emplace_back([&] {
        for (;;) {
          const std::size_t i = cursor.fetch_add(1);
          if (i >= seeds.size()) return;
          result.runs[i] = train_single(spec, seeds[i]);
        }
      });
    }
    for (auto& worker : workers) worker.join();
  }

  std::vector<metrics::RunReturns> all;
  all.reserve(result.runs.size());
  for (const auto& run : result.runs) all.push_back(run.returns);
  if (!all.empty() && spec.episodes > 0) result.curves = metrics::aggregate(all, window);
  return result;
}

void write_csv(std::ostream& out, const ExperimentResult& result, int window) {
  out << "episode,seed,agent,raw_return,normalized,smoothed,rolling_std\n";
  char buf[4][32];
  for (const auto& run : result.runs) {
    for (std::size_t agent = 0; agent < run.returns.size(); ++agent) {
      const auto& raw = run.returns[agent];
      if (raw.empty()) continue;
      const auto norm =
          metrics::normalize(raw, result.curves.raw_min, result.curves.raw_max).values;
      const auto smoothed = metrics::rolling_mean(norm, window);
      const auto dev = metrics::rolling_std(norm, window);
      for (std::size_t ep = 0; ep < raw.size(); ++ep) {
        std::snprintf(buf[0], sizeof buf[0], "%.10g", raw[ep]);
        std::snprintf(buf[1], sizeof buf[1], "%.10g", norm[ep]);
        std::snprintf(buf[2], sizeof buf[2], "%.10g", smoothed[ep]);
        std::snprintf(buf[3], sizeof buf[3], "%.10g", dev[ep]);
        out << ep << "," << run.seed << "," << agent << "," << buf[0] << "," << buf[1] << ","
            << buf[2] << "," << buf[3] << "\n";
      }
    }
  }
}

}  // namespace marlshape::bench
