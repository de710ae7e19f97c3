#include "marlshape/shaping.hpp"

#include <stdexcept>

namespace marlshape::shaping {

ShapingConfig::ShapingConfig(GridSpec grid, std::shared_ptr<const Ldba> ldba, Params params)
    : grid_(std::move(grid)), ldba_(std::move(ldba)), params_(params) {
  grid_.validate();
  if (!ldba_) throw std::invalid_argument("shaping config requires an automaton");
  if (!(params_.gamma_b > 0.0 && params_.gamma_b <= params_.gamma && params_.gamma < 1.0))
    throw std::invalid_argument("discounts must satisfy 0 < gamma_b <= gamma < 1");
  if (grid_.num_agents() == 0) throw std::invalid_argument("grid declares no agent starts");

  cell_masks_.assign(grid_.num_cells(), 0);
  for (const auto& [cell, aps] : grid_.label_map()) {
    LabelMask mask = 0;
    for (const auto& ap : aps) {
      const auto idx = ldba_->ap_index(ap);
      if (!idx)
        throw std::invalid_argument("grid label \"" + ap + "\" is not in the automaton alphabet");
      mask |= LabelMask{1} << *idx;
    }
    cell_masks_[grid_.cell_index(cell)] = mask;
  }
}

JointShapingState reset(const ShapingConfig& cfg) {
  JointShapingState st;
  st.agents.reserve(cfg.num_agents());
  for (const auto& start : cfg.grid().starts())
    st.agents.push_back({start, cfg.grid().is_goal(start)});
  st.q = cfg.ldba().initial_state();
  st.terminated = false;
  st.step = 0;
  return st;
}

JointStepOutcome joint_step(const JointShapingState& state, std::span<const int> actions,
                            const ShapingConfig& cfg, std::span<std::mt19937_64> agent_rngs) {
  const int n = cfg.num_agents();
  if (state.terminated) throw std::logic_error("joint_step called on a terminated episode");
  if (static_cast<int>(actions.size()) != n)
    throw std::invalid_argument("expected one action per agent");
  if (static_cast<int>(agent_rngs.size()) != n)
    throw std::invalid_argument("expected one random stream per agent");

  JointStepOutcome out;
  out.next.agents.resize(n);

  // Epsilon partition and conflict resolution: lowest agent index wins,
  // and every epsilon chooser forfeits its environment move.
  for (int i = 0; i < n; ++i) {
    if (!gridworld::is_epsilon_action(actions[i])) continue;
    const int eps = gridworld::epsilon_id_of(actions[i]);
    bool available = false;
    for (const auto& m : cfg.ldba().epsilon_moves(state.q)) available |= (m.id == eps);
    if (!available)
      throw std::invalid_argument("epsilon action not available at the current automaton state");
    if (!out.resolved_epsilon) out.resolved_epsilon = eps;
  }

  for (int i = 0; i < n; ++i) {
    if (gridworld::is_epsilon_action(actions[i])) {
      out.next.agents[i] = state.agents[i];
    } else {
      out.next.agents[i] = gridworld::env_step(cfg.grid(), state.agents[i], actions[i],
                                               agent_rngs[i]);
    }
  }

  for (int i = 0; i < n; ++i) out.labels |= cfg.cell_labels(out.next.agents[i].cell);

  int q = state.q;
  bool accepting = false;
  if (out.resolved_epsilon) {
    const auto r = cfg.ldba().step_epsilon(q, *out.resolved_epsilon);
    q = r.next_state;
    accepting |= r.accepting;
  }
  const auto r = cfg.ldba().step_label(q, out.labels);
  q = r.next_state;
  accepting |= r.accepting;

  out.next.q = q;
  out.next.step = state.step + 1;
  out.accepting = accepting;
  out.trapped = r.trapped;
  const auto& p = cfg.params();
  if (out.trapped) {
    out.reward = p.trap_reward;
    out.gamma_used = p.gamma;
    out.next.terminated = true;
  } else if (accepting) {
    out.reward = 1.0 - p.gamma_b;
    out.gamma_used = p.gamma_b;
  } else {
    out.reward = 0.0;
    out.gamma_used = p.gamma;
  }
  return out;
}

std::vector<int> augmented_actions(const ShapingConfig& cfg, const JointShapingState& state,
                                   int agent) {
  std::vector<int> out;
  augmented_actions_into(cfg, state, agent, out);
  return out;
}

void augmented_actions_into(const ShapingConfig& cfg, const JointShapingState& state, int agent,
                            std::vector<int>& out) {
  out.clear();
  if (state.agents[agent].absorbed) {
    out.push_back(gridworld::kStay);
  } else {
    for (int a = 0; a < gridworld::kNumEnvActions; ++a) out.push_back(a);
  }
  for (const auto& m : cfg.ldba().epsilon_moves(state.q))
    out.push_back(gridworld::epsilon_action(m.id));
}

}  // namespace marlshape::shaping
