#pragma once

#include <compare>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Labeled stochastic gridworld. Movement actions succeed with probability
// `slip_p` and otherwise divert to one of the other movement directions,
// uniformly. Moves blocked by a wall or the boundary leave the agent in
// place. Cells whose label mentions a goal absorb the agent for the rest
// of the episode.

namespace marlshape::gridworld {

struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

// Environment action ids. Epsilon actions are appended after these when an
// automaton is attached (see shaping module).
inline constexpr int kNorth = 0;
inline constexpr int kSouth = 1;
inline constexpr int kEast = 2;
inline constexpr int kWest = 3;
inline constexpr int kStay = 4;
inline constexpr int kNumEnvActions = 5;

inline constexpr int epsilon_action(int eps_id) { return kNumEnvActions + eps_id; }
inline constexpr bool is_epsilon_action(int action) { return action >= kNumEnvActions; }
inline constexpr int epsilon_id_of(int action) { return action - kNumEnvActions; }

const char* action_name(int action);

// Axis-aligned wall along grid lines, from (x1,y1) to (x2,y2) in grid-point
// coordinates (cell corners). A vertical wall x=k blocks movement between
// cell columns k-1 and k over the covered rows; horizontal walls likewise.
struct WallSegment {
  int x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  auto operator<=>(const WallSegment&) const = default;
};

struct GridParseError : std::runtime_error {
  int line = 0;
  GridParseError(const std::string& msg, int line_);
};

class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(int width, int height, double slip_p);

  int width() const { return width_; }
  int height() const { return height_; }
  double slip_p() const { return slip_p_; }
  void set_slip_p(double p);

  int num_cells() const { return width_ * height_; }
  int cell_index(Cell c) const { return c.y * width_ + c.x; }
  bool in_bounds(Cell c) const;

  void add_wall(WallSegment seg);
  void set_labels(Cell c, std::vector<std::string> aps);
  void add_start(Cell c);

  const std::vector<WallSegment>& wall_segments() const { return walls_; }
  const std::map<Cell, std::vector<std::string>>& label_map() const { return labels_; }
  const std::vector<Cell>& starts() const { return starts_; }
  int num_agents() const { return static_cast<int>(starts_.size()); }

  const std::vector<std::string>& labels_at(Cell c) const;
  // A cell is absorbing when any of its label APs contains the letter 'g'.
  bool is_goal(Cell c) const;
  bool blocked(Cell a, Cell b) const;
  // Destination after moving one step in `dir` from `c`; `c` itself when the
  // move is blocked. `dir` must be a movement direction, not Stay.
  Cell move_target(Cell c, int dir) const;

  // Checks bounds of starts, labels and walls; throws std::invalid_argument.
  void validate() const;

  bool operator==(const GridSpec& other) const;

 private:
  int width_ = 0;
  int height_ = 0;
  double slip_p_ = 0.8;
  std::vector<WallSegment> walls_;
  std::map<Cell, std::vector<std::string>> labels_;
  std::vector<Cell> starts_;
  std::set<std::pair<int, int>> blocked_;  // normalized cell-index pairs

  void block_pair(Cell a, Cell b);
};

struct AgentState {
  Cell cell;
  bool absorbed = false;
  bool operator==(const AgentState&) const = default;
};

// One step of the slip dynamics. Consumes exactly one draw from `rng`
// unless the agent is absorbed (no draw). `action` must be an environment
// action.
AgentState env_step(const GridSpec& spec, const AgentState& s, int action, std::mt19937_64& rng);

const std::vector<std::string>& labels_of(const GridSpec& spec, const AgentState& s);

// Text format with an ASCII-art layout plus legend; see docs/formats.md.
GridSpec parse_grid(std::string_view text);
std::string serialize_grid(const GridSpec& spec);

}  // namespace marlshape::gridworld
