#include "marlshape/learner.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "marlshape/rng.hpp"

namespace marlshape::learner {

QTable::QTable(int n_cells, int n_states, int n_actions, double initial)
    : n_cells_(n_cells),
      n_states_(n_states),
      n_actions_(n_actions),
      values_(static_cast<std::size_t>(n_cells) * n_states * n_actions, initial) {}

void QTable::dump(std::ostream& out) const {
  char buf[64];
  for (int c = 0; c < n_cells_; ++c)
    for (int s = 0; s < n_states_; ++s)
      for (int a = 0; a < n_actions_; ++a) {
        const double v = get(c, s, a);
        if (v == 0.0) continue;
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << c << " " << s << " " << a << " " << buf << "\n";
      }
}

QTable QTable::load(std::istream& in, int n_cells, int n_states, int n_actions) {
  QTable q(n_cells, n_states, n_actions);
  int c, s, a;
  double v;
  while (in >> c >> s >> a >> v) {
    if (c < 0 || c >= n_cells || s < 0 || s >= n_states || a < 0 || a >= n_actions)
      throw std::invalid_argument("q-table entry out of range");
    q.set(c, s, a, v);
  }
  return q;
}

int select_action(const QTable& q, int cell, int state, std::span<const int> legal,
                  double explore_prob, std::mt19937_64& rng) {
  if (legal.empty()) throw std::invalid_argument("no legal actions");
  if (uniform_unit(rng) < explore_prob) {
    std::size_t k = static_cast<std::size_t>(uniform_unit(rng) * legal.size());
    if (k >= legal.size()) k = legal.size() - 1;
    return legal[k];
  }
  int best = legal[0];
  double best_v = q.get(cell, state, best);
  for (std::size_t i = 1; i < legal.size(); ++i) {
    const double v = q.get(cell, state, legal[i]);
    if (v > best_v) {
      best_v = v;
      best = legal[i];
    }
  }
  return best;
}

void q_update(QTable& q, int cell, int state, int action, double reward, double gamma_used,
              int next_cell, int next_state, std::span<const int> legal_next, double alpha,
              bool terminal) {
  double bootstrap = 0.0;
  if (!terminal) {
    bool first = true;
    for (int a : legal_next) {
      const double v = q.get(next_cell, next_state, a);
      if (first || v > bootstrap) bootstrap = v;
      first = false;
    }
  }
  const double old = q.get(cell, state, action);
  q.set(cell, state, action, old + alpha * (reward + gamma_used * bootstrap - old));
}

double schedule_value(const Schedule& s, long step) {
  if (step < 0) throw std::invalid_argument("schedule step must be non-negative");
  if (s.decay_steps <= 0 || step >= s.decay_steps) return s.end;
  const double t = static_cast<double>(step) / static_cast<double>(s.decay_steps);
  if (s.kind == ScheduleKind::Linear) return s.start + (s.end - s.start) * t;
  return s.start * std::pow(s.end / s.start, t);
}

}  // namespace marlshape::learner
