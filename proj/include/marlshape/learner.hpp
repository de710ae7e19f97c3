#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

// Tabular Q-learning over the augmented (cell, automaton state, action)
// space, with the two-discount update: the discount used by each update is
// the one attached to the transition by the shaping step.

namespace marlshape::learner {

class QTable {
 public:
  QTable() = default;
  QTable(int n_cells, int n_states, int n_actions, double initial = 0.0);

  int n_cells() const { return n_cells_; }
  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }

  double get(int cell, int state, int action) const { return values_[index(cell, state, action)]; }
  void set(int cell, int state, int action, double v) { values_[index(cell, state, action)] = v; }

  // One text line per nonzero entry: "<cell> <state> <action> <value>".
  void dump(std::ostream& out) const;
  static QTable load(std::istream& in, int n_cells, int n_states, int n_actions);

  bool operator==(const QTable&) const = default;

 private:
  int index(int cell, int state, int action) const {
    return (cell * n_states_ + state) * n_actions_ + action;
  }

  int n_cells_ = 0;
  int n_states_ = 0;
  int n_actions_ = 0;
  std::vector<double> values_;
};

// Epsilon-greedy over the legal action list: explores with probability
// explore_prob, otherwise picks the legal argmax, breaking ties toward the
// lowest action index. Throws std::invalid_argument on an empty list.
int select_action(const QTable& q, int cell, int state, std::span<const int> legal,
                  double explore_prob, std::mt19937_64& rng);

// Q(s,a) += alpha * (r + gamma_used * max_{a' in legal_next} Q(s',a') - Q(s,a));
// terminal transitions bootstrap with 0.
void q_update(QTable& q, int cell, int state, int action, double reward, double gamma_used,
              int next_cell, int next_state, std::span<const int> legal_next, double alpha,
              bool terminal);

enum class ScheduleKind { Linear, Exponential };

struct Schedule {
  double start = 1.0;
  double end = 1.0;
  long decay_steps = 1;
  ScheduleKind kind = ScheduleKind::Linear;
};

// Interpolates from start to end over decay_steps, clamped at the end value.
double schedule_value(const Schedule& s, long step);

}  // namespace marlshape::learner
