#include "marlshape/oracle.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "marlshape/rng.hpp"

namespace marlshape::oracle {

namespace {

constexpr int kDx[4] = {0, 0, 1, -1};  // N, S, E, W
constexpr int kDy[4] = {-1, 1, 0, 0};

gridworld::Cell step_dir(const GridSpec& spec, gridworld::Cell c, int dir) {
  const gridworld::Cell t{c.x + kDx[dir], c.y + kDy[dir]};
  if (!spec.in_bounds(t) || spec.blocked(c, t)) return c;
  return t;
}

}  // namespace

ProductMdp::ProductMdp(const Ldba& ldba, std::vector<GridSpec> per_agent_specs,
                       std::size_t state_cap)
    : ldba_(&ldba), specs_(std::move(per_agent_specs)) {
  if (specs_.empty()) throw std::invalid_argument("product needs at least one agent");
  long size = ldba.num_states();
  cell_strides_.resize(specs_.size());
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    specs_[i].validate();
    if (specs_[i].num_agents() != 1)
      throw std::invalid_argument("each per-agent spec must declare exactly one start");
    cell_strides_[i] = size;
    size *= specs_[i].num_cells();
    if (size > static_cast<long>(state_cap))
      throw ProductStateCapExceeded("product state count exceeds the cap of " +
                                    std::to_string(state_cap));
  }
  num_states_ = size;

  cell_masks_.resize(specs_.size());
  slots_.resize(specs_.size());
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const auto& spec = specs_[i];
    cell_masks_[i].assign(spec.num_cells(), 0);
    for (const auto& [cell, aps] : spec.label_map()) {
      LabelMask mask = 0;
      for (const auto& ap : aps) {
        const auto idx = ldba.ap_index(ap);
        if (!idx)
          throw std::invalid_argument("grid label \"" + ap +
                                      "\" is not in the automaton alphabet");
        mask |= LabelMask{1} << *idx;
      }
      cell_masks_[i][spec.cell_index(cell)] = mask;
    }

    slots_[i].resize(static_cast<std::size_t>(spec.num_cells()) * gridworld::kNumEnvActions);
    for (int y = 0; y < spec.height(); ++y) {
      for (int x = 0; x < spec.width(); ++x) {
        const gridworld::Cell c{x, y};
        for (int a = 0; a < gridworld::kNumEnvActions; ++a) {
          auto& slot = slots_[i][spec.cell_index(c) * gridworld::kNumEnvActions + a];
          slot.push_back(a == gridworld::kStay ? c : step_dir(spec, c, a));
          for (int d = 0; d < 4; ++d)
            if (d != a) slot.push_back(step_dir(spec, c, d));
        }
      }
    }
  }

  std::vector<gridworld::Cell> start_cells;
  for (const auto& spec : specs_) start_cells.push_back(spec.starts()[0]);
  initial_ = state_id(start_cells, ldba.initial_state());
}

long ProductMdp::state_id(std::span<const gridworld::Cell> cells, int q) const {
  long id = q;
  for (std::size_t i = 0; i < specs_.size(); ++i)
    id += cell_strides_[i] * specs_[i].cell_index(cells[i]);
  return id;
}

void ProductMdp::decode(long state, std::vector<gridworld::Cell>& cells, int& q) const {
  cells.resize(specs_.size());
  for (int i = static_cast<int>(specs_.size()) - 1; i >= 0; --i) {
    const long c = state / cell_strides_[i];
    state -= c * cell_strides_[i];
    cells[i] = {static_cast<int>(c) % specs_[i].width(),
                static_cast<int>(c) / specs_[i].width()};
  }
  q = static_cast<int>(state);
}

int ProductMdp::automaton_component(long state) const {
  return static_cast<int>(state % ldba_->num_states());
}

bool ProductMdp::is_trap_state(long state) const {
  const auto trap = ldba_->trap_state();
  return trap && automaton_component(state) == *trap;
}

std::vector<long> ProductMdp::accepting_states() const {
  std::vector<bool> q_accepting(ldba_->num_states(), false);
  for (int q = 0; q < ldba_->num_states(); ++q) {
    for (const auto& e : ldba_->edges(q)) q_accepting[q] = q_accepting[q] || e.accepting;
    for (const auto& m : ldba_->epsilon_moves(q)) q_accepting[q] = q_accepting[q] || m.accepting;
  }
  std::vector<long> out;
  for (long s = 0; s < num_states_; ++s)
    if (q_accepting[automaton_component(s)]) out.push_back(s);
  return out;
}

bool ProductMdp::transition_accepting(int q, std::optional<int> eps, LabelMask labels) const {
  bool accepting = false;
  int cur = q;
  if (eps) {
    const auto r = ldba_->step_epsilon(cur, *eps);
    accepting |= r.accepting;
    cur = r.next_state;
  }
  accepting |= ldba_->step_label(cur, labels).accepting;
  return accepting;
}

std::vector<int> ProductMdp::available_actions(long state, int agent) const {
  std::vector<gridworld::Cell> cells;
  int q;
  decode(state, cells, q);
  std::vector<int> out;
  if (specs_[agent].is_goal(cells[agent])) {
    out.push_back(gridworld::kStay);
  } else {
    for (int a = 0; a < gridworld::kNumEnvActions; ++a) out.push_back(a);
  }
  for (int id : ldba_->available_epsilons(q)) out.push_back(gridworld::epsilon_action(id));
  return out;
}

const std::vector<gridworld::Cell>& ProductMdp::outcome_slots(int agent, gridworld::Cell c,
                                                              int action) const {
  return slots_[agent][specs_[agent].cell_index(c) * gridworld::kNumEnvActions + action];
}

namespace {

struct ResolvedStep {
  std::optional<int> eps;
  // Agents that keep their cell this step: epsilon choosers and absorbed agents.
  std::vector<bool> holds;
};

ResolvedStep resolve_actions(const ProductMdp& m, std::span<const gridworld::Cell> cells, int q,
                             std::span<const int> actions) {
  ResolvedStep r;
  r.holds.assign(m.num_agents(), false);
  for (int i = 0; i < m.num_agents(); ++i) {
    if (gridworld::is_epsilon_action(actions[i])) {
      const int eps = gridworld::epsilon_id_of(actions[i]);
      bool available = false;
      for (int id : m.ldba().available_epsilons(q)) available |= (id == eps);
      if (!available) throw std::invalid_argument("epsilon action not available in product state");
      if (!r.eps) r.eps = eps;
      r.holds[i] = true;
    } else if (m.spec(i).is_goal(cells[i])) {
      r.holds[i] = true;
    }
  }
  return r;
}

}  // namespace

std::vector<std::pair<long, double>> ProductMdp::transition_distribution(
    long state, std::span<const int> actions) const {
  std::vector<gridworld::Cell> cells;
  int q;
  decode(state, cells, q);
  const auto resolved = resolve_actions(*this, cells, q, actions);

  std::vector<std::pair<long, double>> dist;
  std::vector<gridworld::Cell> next(cells.size());
  const int n = num_agents();
  long combos = 1;
  std::vector<const std::vector<gridworld::Cell>*> agent_slots(n, nullptr);
  for (int i = 0; i < n; ++i) {
    if (!resolved.holds[i]) {
      agent_slots[i] = &outcome_slots(i, cells[i], actions[i]);
      combos *= static_cast<long>(agent_slots[i]->size());
    }
  }
  for (long combo = 0; combo < combos; ++combo) {
    long rem = combo;
    double prob = 1.0;
    for (int i = 0; i < n; ++i) {
      if (!agent_slots[i]) {
        next[i] = cells[i];
        continue;
      }
      const auto& slot = *agent_slots[i];
      const int k = static_cast<int>(rem % slot.size());
      rem /= static_cast<long>(slot.size());
      next[i] = slot[k];
      const double p = specs_[i].slip_p();
      prob *= (k == 0) ? p : (1.0 - p) / static_cast<double>(slot.size() - 1);
    }
    if (prob == 0.0) continue;
    LabelMask labels = 0;
    for (int i = 0; i < n; ++i) labels |= cell_masks_[i][specs_[i].cell_index(next[i])];
    int nq = q;
    if (resolved.eps) nq = ldba_->step_epsilon(nq, *resolved.eps).next_state;
    nq = ldba_->step_label(nq, labels).next_state;
    const long id = state_id(next, nq);
    bool found = false;
    for (auto& [s, pr] : dist) {
      if (s == id) {
        pr += prob;
        found = true;
        break;
      }
    }
    if (!found) dist.emplace_back(id, prob);
  }
  std::sort(dist.begin(), dist.end());
  return dist;
}

ProductMdp build_product(const Ldba& ldba, const std::vector<GridSpec>& per_agent_specs,
                         std::size_t state_cap) {
  return ProductMdp(ldba, per_agent_specs, state_cap);
}

ProductStepRecord simulate_step(const ProductMdp& m, long state, std::span<const int> actions,
                                std::span<std::mt19937_64> agent_rngs, const Params& params) {
  const int n = m.num_agents();
  if (static_cast<int>(actions.size()) != n)
    throw std::invalid_argument("expected one action per agent");
  std::vector<gridworld::Cell> cells;
  int q;
  m.decode(state, cells, q);
  const auto resolved = resolve_actions(m, cells, q, actions);

  std::vector<gridworld::Cell> next(n);
  for (int i = 0; i < n; ++i) {
    if (resolved.holds[i]) {
      next[i] = cells[i];
      continue;
    }
    const auto& slot = m.outcome_slots(i, cells[i], actions[i]);
    const double p = m.spec(i).slip_p();
    const double u = uniform_unit(agent_rngs[i]);
    if (u < p) {
      next[i] = slot[0];
    } else {
      const int alts = static_cast<int>(slot.size()) - 1;
      const double v = (p < 1.0) ? (u - p) / (1.0 - p) : 0.0;
      int k = static_cast<int>(v * alts);
      if (k >= alts) k = alts - 1;
      next[i] = slot[1 + k];
    }
  }

  ProductStepRecord rec;
  for (int i = 0; i < n; ++i) rec.labels |= m.cell_labels(i, next[i]);

  int nq = q;
  bool accepting = false;
  bool trapped = false;
  if (resolved.eps) {
    const auto r = m.ldba().step_epsilon(nq, *resolved.eps);
    nq = r.next_state;
    accepting |= r.accepting;
  }
  {
    const auto r = m.ldba().step_label(nq, rec.labels);
    nq = r.next_state;
    accepting |= r.accepting;
    trapped = r.trapped;
  }

  rec.state = m.state_id(next, nq);
  rec.accepting = accepting;
  rec.trapped = trapped;
  if (trapped) {
    rec.reward = params.trap_reward;
    rec.discount = params.gamma;
  } else if (accepting) {
    rec.reward = 1.0 - params.gamma_b;
    rec.discount = params.gamma_b;
  } else {
    rec.reward = 0.0;
    rec.discount = params.gamma;
  }
  return rec;
}

std::vector<ProductStepRecord> simulate_product(const ProductMdp& m,
                                                std::span<const std::vector<int>> action_seq,
                                                std::span<std::mt19937_64> agent_rngs,
                                                const Params& params) {
  std::vector<ProductStepRecord> trace;
  trace.push_back({m.initial_state(), 0.0, 0.0, false, false, 0});
  long state = m.initial_state();
  for (const auto& actions : action_seq) {
    const auto rec = simulate_step(m, state, actions, agent_rngs, params);
    trace.push_back(rec);
    state = rec.state;
    if (rec.trapped) break;
  }
  return trace;
}

std::vector<GridSpec> per_agent_views(const GridSpec& shared) {
  std::vector<GridSpec> out;
  for (int i = 0; i < shared.num_agents(); ++i) {
    GridSpec view(shared.width(), shared.height(), shared.slip_p());
    for (const auto& w : shared.wall_segments()) view.add_wall(w);
    for (const auto& [cell, aps] : shared.label_map()) view.set_labels(cell, aps);
    view.add_start(shared.starts()[i]);
    out.push_back(std::move(view));
  }
  return out;
}

namespace {

GridSpec merge_views(const std::vector<GridSpec>& views) {
  GridSpec merged(views[0].width(), views[0].height(), views[0].slip_p());
  for (const auto& w : views[0].wall_segments()) merged.add_wall(w);
  for (const auto& [cell, aps] : views[0].label_map()) merged.set_labels(cell, aps);
  for (const auto& v : views) {
    if (v.width() != merged.width() || v.height() != merged.height() ||
        v.slip_p() != merged.slip_p() || !(v.wall_segments() == merged.wall_segments()) ||
        !(v.label_map() == merged.label_map()))
      throw std::invalid_argument("equivalence check requires agents to share one world");
    merged.add_start(v.starts()[0]);
  }
  return merged;
}

std::string describe_state(std::span<const gridworld::Cell> cells, int q) {
  std::ostringstream out;
  for (const auto& c : cells) out << "(" << c.x << "," << c.y << ") ";
  out << "q=" << q;
  return out.str();
}

}  // namespace

EquivalenceReport check_equivalence(const Ldba& ldba, const std::vector<GridSpec>& per_agent_specs,
                                    const Params& params, long n_steps, std::uint64_t seed,
                                    std::size_t state_cap) {
  const ProductMdp product(ldba, per_agent_specs, state_cap);
  auto ldba_ptr = std::shared_ptr<const Ldba>(&ldba, [](const Ldba*) {});
  const shaping::ShapingConfig cfg(merge_views(per_agent_specs), ldba_ptr, params);
  const int n = cfg.num_agents();

  std::vector<std::mt19937_64> shaping_rngs, oracle_rngs;
  for (int i = 0; i < n; ++i) {
    shaping_rngs.push_back(make_stream(seed, 200 + i));
    oracle_rngs.push_back(make_stream(seed, 200 + i));
  }
  auto action_rng = make_stream(seed, 7);

  EquivalenceReport report;
  auto shaping_state = shaping::reset(cfg);
  long product_state = product.initial_state();
  std::vector<gridworld::Cell> cells;
  int q;

  auto fail = [&](long step, const std::string& what) {
    report.diverged = true;
    report.divergence_step = step;
    product.decode(product_state, cells, q);
    report.detail = what + "; shaping q=" + std::to_string(shaping_state.q) +
                    ", product " + describe_state(cells, q);
    return report;
  };

  for (long step = 0; step < n_steps; ++step) {
    // State embedding must agree before each step.
    std::vector<gridworld::Cell> shaping_cells;
    for (const auto& a : shaping_state.agents) shaping_cells.push_back(a.cell);
    if (product.state_id(shaping_cells, shaping_state.q) != product_state)
      return fail(step, "state embedding mismatch");

    std::vector<int> actions(n);
    for (int i = 0; i < n; ++i) {
      const auto legal_shaping = shaping::augmented_actions(cfg, shaping_state, i);
      const auto legal_product = product.available_actions(product_state, i);
      if (legal_shaping != legal_product)
        return fail(step, "available action sets differ for agent " + std::to_string(i));
      std::size_t k =
          static_cast<std::size_t>(uniform_unit(action_rng) * legal_shaping.size());
      if (k >= legal_shaping.size()) k = legal_shaping.size() - 1;
      actions[i] = legal_shaping[k];
    }

    const auto out = shaping::joint_step(shaping_state, actions, cfg, shaping_rngs);
    const auto rec = simulate_step(product, product_state, actions, oracle_rngs, params);

    std::vector<gridworld::Cell> next_cells;
    for (const auto& a : out.next.agents) next_cells.push_back(a.cell);
    if (product.state_id(next_cells, out.next.q) != rec.state)
      return fail(step, "next state mismatch");
    for (int i = 0; i < n; ++i) {
      if (out.next.agents[i].absorbed != product.spec(i).is_goal(next_cells[i]))
        return fail(step, "absorption mismatch for agent " + std::to_string(i));
    }
    if (out.labels != rec.labels) return fail(step, "label set mismatch");
    if (out.reward != rec.reward) return fail(step, "reward mismatch");
    if (out.gamma_used != rec.discount) return fail(step, "discount mismatch");
    if (out.accepting != rec.accepting) return fail(step, "accepting flag mismatch");
    if (out.trapped != rec.trapped) return fail(step, "trapped flag mismatch");

    ++report.steps_checked;
    if (out.next.terminated) {
      ++report.episodes;
      shaping_state = shaping::reset(cfg);
      product_state = product.initial_state();
    } else {
      shaping_state = out.next;
      product_state = rec.state;
    }
  }
  return report;
}

}  // namespace marlshape::oracle
