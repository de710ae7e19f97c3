#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "marlshape/hoa.hpp"

// Runtime semantics of a limit-deterministic Buchi automaton with
// transition-based acceptance: deterministic label-driven stepping,
// epsilon moves, accepting-edge detection and trap detection.

namespace marlshape::automaton {

using hoa::LabelMask;

struct LabeledEdge {
  hoa::GuardPtr guard;
  int target = 0;
  bool accepting = false;
};

struct EpsilonMove {
  int id = 0;  // globally unique over the whole automaton
  int target = 0;
  bool accepting = false;
};

struct StepResult {
  int next_state = 0;
  bool accepting = false;
  bool trapped = false;
};

struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Ldba {
 public:
  // Builds the runtime automaton from a parsed document. Strips the
  // epsilon pseudo-AP from the alphabet, checks label-determinism by
  // enumerating every label set, and completes partial states with an
  // edge to a trap state (reusing a declared trap when one exists).
  static Ldba load(const hoa::HoaDocument& doc);

  int num_states() const { return static_cast<int>(label_edges_.size()); }
  int initial_state() const { return initial_; }
  const std::vector<std::string>& alphabet() const { return alphabet_; }
  int num_aps() const { return static_cast<int>(alphabet_.size()); }
  std::optional<int> trap_state() const { return trap_; }
  int total_epsilon_actions() const { return total_eps_; }

  // Labeled accepting edges plus accepting epsilon moves.
  int accepting_transition_count() const;

  StepResult step_label(int state, LabelMask labels) const;
  // Throws std::invalid_argument if eps_id is not available at state.
  StepResult step_epsilon(int state, int eps_id) const;
  std::vector<int> available_epsilons(int state) const;

  const std::vector<LabeledEdge>& edges(int state) const { return label_edges_[state]; }
  const std::vector<EpsilonMove>& epsilon_moves(int state) const { return eps_moves_[state]; }

  // AP index in the stripped alphabet, if present.
  std::optional<int> ap_index(std::string_view name) const;

 private:
  int initial_ = 0;
  std::vector<std::string> alphabet_;
  std::vector<std::vector<LabeledEdge>> label_edges_;
  std::vector<std::vector<EpsilonMove>> eps_moves_;
  // Per state, the unique applicable edge for each of the 2^|AP| label sets.
  std::vector<std::vector<int>> edge_table_;
  std::optional<int> trap_;
  int total_eps_ = 0;
};

}  // namespace marlshape::automaton
