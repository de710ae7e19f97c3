#include "marlshape/automaton.hpp"

#include <algorithm>

namespace marlshape::automaton {

namespace {

bool is_bare_ap(const hoa::Guard& g, int ap) {
  return g.kind == hoa::GuardKind::Ap && g.ap == ap;
}

bool mentions_ap(const hoa::Guard& g, int ap) {
  switch (g.kind) {
    case hoa::GuardKind::True:
    case hoa::GuardKind::False:
      return false;
    case hoa::GuardKind::Ap:
      return g.ap == ap;
    case hoa::GuardKind::Not:
      return mentions_ap(*g.lhs, ap);
    case hoa::GuardKind::And:
    case hoa::GuardKind::Or:
      return mentions_ap(*g.lhs, ap) || mentions_ap(*g.rhs, ap);
  }
  return false;
}

}  // namespace

Ldba Ldba::load(const hoa::HoaDocument& doc) {
  Ldba a;
  a.initial_ = doc.start_state;

  int eps_ap = -1;
  for (int i = 0; i < doc.num_aps(); ++i) {
    if (doc.ap_names[i] == hoa::kEpsilonAp) {
      if (i != doc.num_aps() - 1)
        throw LoadError("epsilon pseudo-AP must be declared last");
      eps_ap = i;
    }
  }
  a.alphabet_.assign(doc.ap_names.begin(),
                     eps_ap >= 0 ? doc.ap_names.end() - 1 : doc.ap_names.end());

  const int n = doc.num_states;
  a.label_edges_.resize(n);
  a.eps_moves_.resize(n);
  int next_eps_id = 0;
  for (int s = 0; s < n; ++s) {
    for (const auto& t : doc.states[s].transitions) {
      if (eps_ap >= 0 && is_bare_ap(*t.guard, eps_ap)) {
        a.eps_moves_[s].push_back({next_eps_id++, t.target, t.in_buchi_set()});
        continue;
      }
      if (eps_ap >= 0 && mentions_ap(*t.guard, eps_ap))
        throw LoadError("epsilon pseudo-AP may only appear as a bare edge label");
      if (hoa::max_ap_index(*t.guard) >= static_cast<int>(a.alphabet_.size()))
        throw LoadError("guard references an AP outside the alphabet");
      a.label_edges_[s].push_back({t.guard, t.target, t.in_buchi_set()});
    }
  }
  a.total_eps_ = next_eps_id;

  // Determinism and completeness by enumeration over all label sets.
  const int n_masks = 1 << a.alphabet_.size();
  a.edge_table_.assign(n, std::vector<int>(n_masks, -1));
  bool any_incomplete = false;
  for (int s = 0; s < n; ++s) {
    for (int m = 0; m < n_masks; ++m) {
      int hit = -1;
      for (std::size_t e = 0; e < a.label_edges_[s].size(); ++e) {
        if (hoa::eval_guard(*a.label_edges_[s][e].guard, static_cast<LabelMask>(m))) {
          if (hit >= 0)
            throw LoadError("determinism violation at state " + std::to_string(s) +
                            ": two edges apply to the same label set");
          hit = static_cast<int>(e);
        }
      }
      a.edge_table_[s][m] = hit;
      if (hit < 0) any_incomplete = true;
    }
  }

  // Trap detection: a state whose only behavior is a non-accepting all-true
  // self-loop, with no epsilon moves and no incoming accepting edge.
  auto trap_shaped = [&](int s) {
    if (!a.eps_moves_[s].empty()) return false;
    for (int m = 0; m < n_masks; ++m) {
      const int e = a.edge_table_[s][m];
      if (e < 0) return false;
      if (a.label_edges_[s][e].target != s || a.label_edges_[s][e].accepting) return false;
    }
    for (int p = 0; p < n; ++p) {
      for (const auto& edge : a.label_edges_[p])
        if (edge.target == s && edge.accepting) return false;
      for (const auto& em : a.eps_moves_[p])
        if (em.target == s && em.accepting) return false;
    }
    return true;
  };
  std::vector<int> traps;
  for (int s = 0; s < n; ++s) {
    if (trap_shaped(s)) traps.push_back(s);
  }
  if (traps.size() == 1) a.trap_ = traps.front();

  if (any_incomplete) {
    int trap;
    if (a.trap_) {
      trap = *a.trap_;
    } else {
      trap = n;
      a.label_edges_.emplace_back();
      a.eps_moves_.emplace_back();
      a.edge_table_.emplace_back(n_masks, 0);
      a.label_edges_.back().push_back({hoa::guard_true(), trap, false});
      a.trap_ = trap;
    }
    for (int s = 0; s < n; ++s) {
      int completion_edge = -1;
      for (int m = 0; m < n_masks; ++m) {
        if (a.edge_table_[s][m] >= 0) continue;
        if (completion_edge < 0) {
          // One catch-all edge per state: the complement of the existing guards.
          hoa::GuardPtr covered = hoa::guard_false();
          for (const auto& e : a.label_edges_[s]) covered = hoa::guard_or(covered, e.guard);
          a.label_edges_[s].push_back({hoa::guard_not(covered), trap, false});
          completion_edge = static_cast<int>(a.label_edges_[s].size()) - 1;
        }
        a.edge_table_[s][m] = completion_edge;
      }
    }
  }

  return a;
}

int Ldba::accepting_transition_count() const {
  int count = 0;
  for (const auto& edges : label_edges_)
    for (const auto& e : edges)
      if (e.accepting) ++count;
  for (const auto& moves : eps_moves_)
    for (const auto& m : moves)
      if (m.accepting) ++count;
  return count;
}

StepResult Ldba::step_label(int state, LabelMask labels) const {
  const auto& edge = label_edges_[state][edge_table_[state][labels]];
  return {edge.target, edge.accepting, trap_ && edge.target == *trap_};
}

StepResult Ldba::step_epsilon(int state, int eps_id) const {
  for (const auto& m : eps_moves_[state]) {
    if (m.id == eps_id)
      return {m.target, m.accepting, trap_ && m.target == *trap_};
  }
  throw std::invalid_argument("epsilon action " + std::to_string(eps_id) +
                              " is not available at state " + std::to_string(state));
}

std::vector<int> Ldba::available_epsilons(int state) const {
  std::vector<int> out;
  out.reserve(eps_moves_[state].size());
  for (const auto& m : eps_moves_[state]) out.push_back(m.id);
  return out;
}

std::optional<int> Ldba::ap_index(std::string_view name) const {
  for (std::size_t i = 0; i < alphabet_.size(); ++i)
    if (alphabet_[i] == name) return static_cast<int>(i);
  return std::nullopt;
}

}  // namespace marlshape::automaton
