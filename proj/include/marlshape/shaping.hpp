#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "marlshape/automaton.hpp"
#include "marlshape/gridworld.hpp"

// Semi-centralized shaping step. All agents share one synchronized
// automaton state. Each joint step, in order:
//
//   1. actions split into epsilon actions and environment actions;
//   2. if several agents chose an epsilon action, the lowest-indexed
//      agent's choice is applied and the rest are discarded; every agent
//      that chose an epsilon action keeps its cell this step;
//   3. the remaining agents take their environment step;
//   4. the step's label set is the union of every agent's new cell labels;
//   5. the automaton applies the resolved epsilon move first, then the
//      label transition (the label transition happens every step);
//   6. if either automaton move was accepting, every agent receives
//      reward 1 - gamma_b with discount gamma_b, otherwise reward 0 with
//      discount gamma; entering the trap yields trap_reward instead and
//      terminates the episode.

namespace marlshape::shaping {

using automaton::Ldba;
using gridworld::AgentState;
using gridworld::GridSpec;
using hoa::LabelMask;

struct Params {
  double gamma = 0.999;
  double gamma_b = 0.99;
  double trap_reward = -1.0;
};

class ShapingConfig {
 public:
  // Validates that the grid's labels all exist in the automaton alphabet
  // and precomputes per-cell label masks. Throws std::invalid_argument.
  ShapingConfig(GridSpec grid, std::shared_ptr<const Ldba> ldba, Params params = {});

  const GridSpec& grid() const { return grid_; }
  const Ldba& ldba() const { return *ldba_; }
  const Params& params() const { return params_; }
  int num_agents() const { return grid_.num_agents(); }
  LabelMask cell_labels(gridworld::Cell c) const { return cell_masks_[grid_.cell_index(c)]; }

 private:
  GridSpec grid_;
  std::shared_ptr<const Ldba> ldba_;
  Params params_;
  std::vector<LabelMask> cell_masks_;
};

struct JointShapingState {
  std::vector<AgentState> agents;
  int q = 0;
  bool terminated = false;
  int step = 0;
};

struct JointStepOutcome {
  JointShapingState next;
  double reward = 0.0;
  double gamma_used = 0.0;
  bool accepting = false;
  bool trapped = false;
  std::optional<int> resolved_epsilon;
  LabelMask labels = 0;
};

JointShapingState reset(const ShapingConfig& cfg);

// One action per agent; epsilon actions must be available at the current
// automaton state. Throws std::invalid_argument on an action-count
// mismatch and std::logic_error when called on a terminated state.
JointStepOutcome joint_step(const JointShapingState& state, std::span<const int> actions,
                            const ShapingConfig& cfg, std::span<std::mt19937_64> agent_rngs);

// Environment actions (Stay only once absorbed) plus the epsilon actions
// available at the shared automaton state.
std::vector<int> augmented_actions(const ShapingConfig& cfg, const JointShapingState& state,
                                   int agent);

// Allocation-free variant for training loops; clears and refills `out`.
void augmented_actions_into(const ShapingConfig& cfg, const JointShapingState& state, int agent,
                            std::vector<int>& out);

}  // namespace marlshape::shaping
