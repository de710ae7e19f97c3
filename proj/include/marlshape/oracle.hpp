#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "marlshape/shaping.hpp"

// Brute-force explicit product of the automaton with every agent's MDP,
// for small instances. Used to machine-check that the implicit shaping
// runtime behaves exactly like the explicit product: same states, labels,
// rewards and discounts at every step under coupled randomness.
//
// The product deliberately re-encodes the step composition and the reward
// rule instead of calling into the shaping module, so a bug shared by both
// encodings would have to be written twice.

namespace marlshape::oracle {

using automaton::Ldba;
using gridworld::GridSpec;
using hoa::LabelMask;
using shaping::Params;

struct ProductStateCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ProductMdp {
 public:
  ProductMdp(const Ldba& ldba, std::vector<GridSpec> per_agent_specs, std::size_t state_cap);

  int num_agents() const { return static_cast<int>(specs_.size()); }
  long num_states() const { return num_states_; }
  long initial_state() const { return initial_; }
  const Ldba& ldba() const { return *ldba_; }
  const GridSpec& spec(int agent) const { return specs_[agent]; }

  long state_id(std::span<const gridworld::Cell> cells, int q) const;
  void decode(long state, std::vector<gridworld::Cell>& cells, int& q) const;
  int automaton_component(long state) const;

  bool is_trap_state(long state) const;
  // Product states whose automaton component owns an accepting outgoing edge.
  std::vector<long> accepting_states() const;
  // Whether the product transition (q, resolved epsilon, labels) is accepting.
  bool transition_accepting(int q, std::optional<int> eps, LabelMask labels) const;

  std::vector<int> available_actions(long state, int agent) const;

  // Fully enumerated next-state distribution for one joint action.
  std::vector<std::pair<long, double>> transition_distribution(
      long state, std::span<const int> actions) const;

  // Per-agent slip outcome slots used both for enumeration and for coupled
  // sampling: slot 0 is the commanded outcome with probability slip_p, the
  // remaining slots split 1 - slip_p uniformly.
  const std::vector<gridworld::Cell>& outcome_slots(int agent, gridworld::Cell c,
                                                    int action) const;

  LabelMask cell_labels(int agent, gridworld::Cell c) const {
    return cell_masks_[agent][specs_[agent].cell_index(c)];
  }

 private:
  const Ldba* ldba_;
  std::vector<GridSpec> specs_;
  std::vector<long> cell_strides_;
  long num_states_ = 0;
  long initial_ = 0;
  std::vector<std::vector<LabelMask>> cell_masks_;                  // [agent][cell]
  std::vector<std::vector<std::vector<gridworld::Cell>>> slots_;    // [agent][cell*5+action]
};

ProductMdp build_product(const Ldba& ldba, const std::vector<GridSpec>& per_agent_specs,
                         std::size_t state_cap = 1'000'000);

struct ProductStepRecord {
  long state = 0;
  double reward = 0.0;
  double discount = 0.0;
  bool accepting = false;
  bool trapped = false;
  LabelMask labels = 0;
};

// One joint step with one uniform draw per stepping agent, mirroring the
// environment's draw discipline so runs couple stream-for-stream.
ProductStepRecord simulate_step(const ProductMdp& m, long state, std::span<const int> actions,
                                std::span<std::mt19937_64> agent_rngs, const Params& params);

// Trace starts with the initial state; one record per action vector.
std::vector<ProductStepRecord> simulate_product(const ProductMdp& m,
                                                std::span<const std::vector<int>> action_seq,
                                                std::span<std::mt19937_64> agent_rngs,
                                                const Params& params);

// Splits a shared multi-start grid into one single-start view per agent.
std::vector<GridSpec> per_agent_views(const GridSpec& shared);

struct EquivalenceReport {
  bool diverged = false;
  long steps_checked = 0;
  long episodes = 0;
  long divergence_step = -1;
  std::string detail;
};

// Drives the shaping runtime and the explicit product side by side with
// identical action choices and identically seeded per-agent streams, and
// reports the first step where any observable differs.
EquivalenceReport check_equivalence(const Ldba& ldba, const std::vector<GridSpec>& per_agent_specs,
                                    const Params& params, long n_steps, std::uint64_t seed,
                                    std::size_t state_cap = 1'000'000);

}  // namespace marlshape::oracle
