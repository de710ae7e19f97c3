#include "marlshape/gridworld.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include "marlshape/rng.hpp"

namespace marlshape::gridworld {

namespace {

constexpr int kDx[4] = {0, 0, 1, -1};  // N, S, E, W
constexpr int kDy[4] = {-1, 1, 0, 0};

const std::vector<std::string> kNoLabels;

}  // namespace

const char* action_name(int action) {
  switch (action) {
    case kNorth: return "north";
    case kSouth: return "south";
    case kEast: return "east";
    case kWest: return "west";
    case kStay: return "stay";
    default: return "eps";
  }
}

GridParseError::GridParseError(const std::string& msg, int line_)
    : std::runtime_error(msg + " (line " + std::to_string(line_) + ")"), line(line_) {}

GridSpec::GridSpec(int width, int height, double slip_p)
    : width_(width), height_(height), slip_p_(slip_p) {}

void GridSpec::set_slip_p(double p) {
  slip_p_ = p;
}

bool GridSpec::in_bounds(Cell c) const {
  return c.x >= 0 && c.x < width_ && c.y >= 0 && c.y < height_;
}

void GridSpec::block_pair(Cell a, Cell b) {
  int i = cell_index(a), j = cell_index(b);
  if (i > j) std::swap(i, j);
  blocked_.insert({i, j});
}

void GridSpec::add_wall(WallSegment seg) {
  walls_.push_back(seg);
  std::sort(walls_.begin(), walls_.end());
  if (seg.x1 == seg.x2) {
    const int x = seg.x1;
    for (int y = std::min(seg.y1, seg.y2); y < std::max(seg.y1, seg.y2); ++y) {
      if (x > 0 && x < width_)
        block_pair({x - 1, y}, {x, y});
    }
  } else {
    const int y = seg.y1;
    for (int x = std::min(seg.x1, seg.x2); x < std::max(seg.x1, seg.x2); ++x) {
      if (y > 0 && y < height_)
        block_pair({x, y - 1}, {x, y});
    }
  }
}

void GridSpec::set_labels(Cell c, std::vector<std::string> aps) {
  std::sort(aps.begin(), aps.end());
  aps.erase(std::unique(aps.begin(), aps.end()), aps.end());
  if (aps.empty())
    labels_.erase(c);
  else
    labels_[c] = std::move(aps);
}

void GridSpec::add_start(Cell c) {
  starts_.push_back(c);
}

const std::vector<std::string>& GridSpec::labels_at(Cell c) const {
  auto it = labels_.find(c);
  return it == labels_.end() ? kNoLabels : it->second;
}

bool GridSpec::is_goal(Cell c) const {
  for (const auto& ap : labels_at(c))
    if (ap.find('g') != std::string::npos) return true;
  return false;
}

bool GridSpec::blocked(Cell a, Cell b) const {
  int i = cell_index(a), j = cell_index(b);
  if (i > j) std::swap(i, j);
  return blocked_.count({i, j}) > 0;
}

Cell GridSpec::move_target(Cell c, int dir) const {
  const Cell t{c.x + kDx[dir], c.y + kDy[dir]};
  if (!in_bounds(t) || blocked(c, t)) return c;
  return t;
}

void GridSpec::validate() const {
  if (width_ <= 0 || height_ <= 0)
    throw std::invalid_argument("grid dimensions must be positive");
  if (slip_p_ < 0.0 || slip_p_ > 1.0)
    throw std::invalid_argument("slip probability must lie in [0, 1]");
  for (const auto& s : starts_)
    if (!in_bounds(s))
      throw std::invalid_argument("start cell out of bounds");
  for (const auto& [c, aps] : labels_) {
    if (!in_bounds(c)) throw std::invalid_argument("labeled cell out of bounds");
    if (aps.empty()) throw std::invalid_argument("empty label entry");
  }
  for (const auto& w : walls_) {
    if (w.x1 != w.x2 && w.y1 != w.y2)
      throw std::invalid_argument("wall segments must be axis-aligned");
    if (w.x1 == w.x2 && w.y1 == w.y2)
      throw std::invalid_argument("wall segment has zero length");
    const auto [xlo, xhi] = std::minmax(w.x1, w.x2);
    const auto [ylo, yhi] = std::minmax(w.y1, w.y2);
    if (xlo < 0 || xhi > width_ || ylo < 0 || yhi > height_)
      throw std::invalid_argument("wall segment out of bounds");
  }
}

bool GridSpec::operator==(const GridSpec& other) const {
  return width_ == other.width_ && height_ == other.height_ && slip_p_ == other.slip_p_ &&
         walls_ == other.walls_ && labels_ == other.labels_ && starts_ == other.starts_;
}

AgentState env_step(const GridSpec& spec, const AgentState& s, int action, std::mt19937_64& rng) {
  if (is_epsilon_action(action))
    throw std::logic_error("env_step expects an environment action");
  if (s.absorbed) return s;

  const double u = uniform_unit(rng);
  const double p = spec.slip_p();
  int moves[4];
  int dir;
  if (u < p) {
    dir = action;
  } else {
    int n = 0;
    for (int d = 0; d < 4; ++d)
      if (d != action) moves[n++] = d;
    const double v = (p < 1.0) ? (u - p) / (1.0 - p) : 0.0;
    int k = static_cast<int>(v * n);
    if (k >= n) k = n - 1;
    dir = moves[k];
  }

  const Cell target = (dir == kStay) ? s.cell : spec.move_target(s.cell, dir);
  return {target, spec.is_goal(target)};
}

const std::vector<std::string>& labels_of(const GridSpec& spec, const AgentState& s) {
  if (!spec.in_bounds(s.cell)) throw std::invalid_argument("agent cell out of bounds");
  return spec.labels_at(s.cell);
}

namespace {

std::string trim(std::string_view v) {
  std::size_t b = 0, e = v.size();
  while (b < e && std::isspace(static_cast<unsigned char>(v[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(v[e - 1]))) --e;
  return std::string(v.substr(b, e - b));
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

struct LegendEntry {
  std::vector<std::string> aps;
  std::vector<int> start_agents;
};

}  // namespace

GridSpec parse_grid(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::string buf;
    for (char c : text) {
      if (c == '\n') {
        lines.push_back(buf);
        buf.clear();
      } else {
        buf += c;
      }
    }
    lines.push_back(buf);
  }

  int width = -1, height = -1;
  double slip = -1.0;
  std::vector<std::string> layout_rows;
  std::vector<WallSegment> walls;
  std::map<char, LegendEntry> legend;
  int layout_line = 0;

  std::size_t i = 0;
  auto next_content_line = [&](std::size_t& idx) -> bool {
    while (idx < lines.size()) {
      const std::string t = trim(lines[idx]);
      if (!t.empty() && t[0] != '#') return true;
      ++idx;
    }
    return false;
  };

  while (next_content_line(i)) {
    const int lineno = static_cast<int>(i) + 1;
    const std::string line = trim(lines[i]);
    ++i;
    auto toks = split_ws(line);
    const std::string& kw = toks[0];
    if (kw == "grid") {
      if (toks.size() != 3) throw GridParseError("grid directive expects: grid <width> <height>", lineno);
      try {
        width = std::stoi(toks[1]);
        height = std::stoi(toks[2]);
      } catch (const std::exception&) {
        throw GridParseError("grid dimensions must be integers", lineno);
      }
      if (width <= 0 || height <= 0) throw GridParseError("grid dimensions must be positive", lineno);
    } else if (kw == "slip") {
      if (toks.size() != 2) throw GridParseError("slip directive expects: slip <p>", lineno);
      try {
        slip = std::stod(toks[1]);
      } catch (const std::exception&) {
        throw GridParseError("slip probability must be a number", lineno);
      }
      if (slip < 0.0 || slip > 1.0) throw GridParseError("slip probability must lie in [0, 1]", lineno);
    } else if (kw == "layout") {
      if (width < 0) throw GridParseError("layout must come after the grid directive", lineno);
      layout_line = lineno;
      for (int r = 0; r < height; ++r) {
        if (i >= lines.size()) throw GridParseError("layout ended early", static_cast<int>(i));
        // Layout rows are taken verbatim (no trimming of leading glyphs).
        std::string row = lines[i];
        while (!row.empty() && (row.back() == '\r' || row.back() == ' ')) row.pop_back();
        if (static_cast<int>(row.size()) != width)
          throw GridParseError("layout row has wrong width", static_cast<int>(i) + 1);
        layout_rows.push_back(row);
        ++i;
      }
      if (!next_content_line(i) || trim(lines[i]) != "end")
        throw GridParseError("layout section must close with 'end'", static_cast<int>(i) + 1);
      ++i;
    } else if (kw == "wall") {
      if (toks.size() != 5) throw GridParseError("wall directive expects: wall <x1> <y1> <x2> <y2>", lineno);
      WallSegment w;
      try {
        w.x1 = std::stoi(toks[1]);
        w.y1 = std::stoi(toks[2]);
        w.x2 = std::stoi(toks[3]);
        w.y2 = std::stoi(toks[4]);
      } catch (const std::exception&) {
        throw GridParseError("wall coordinates must be integers", lineno);
      }
      walls.push_back(w);
    } else if (kw == "legend") {
      while (next_content_line(i) && trim(lines[i]) != "end") {
        const int lln = static_cast<int>(i) + 1;
        const std::string entry = trim(lines[i]);
        ++i;
        const auto eq = entry.find('=');
        if (eq == std::string::npos) throw GridParseError("legend entry expects: <glyph> = ...", lln);
        const std::string glyph_part = trim(entry.substr(0, eq));
        if (glyph_part.size() != 1) throw GridParseError("legend glyph must be a single character", lln);
        const char glyph = glyph_part[0];
        if (legend.count(glyph)) throw GridParseError("duplicate legend glyph", lln);
        LegendEntry le;
        for (const auto& attr : split_ws(entry.substr(eq + 1))) {
          if (attr.rfind("start=", 0) == 0) {
            try {
              le.start_agents.push_back(std::stoi(attr.substr(6)));
            } catch (const std::exception&) {
              throw GridParseError("start attribute expects an agent index", lln);
            }
          } else {
            // comma-separated AP list
            std::string ap;
            std::istringstream aps(attr);
            while (std::getline(aps, ap, ',')) {
              if (ap.empty()) throw GridParseError("empty AP name in legend", lln);
              le.aps.push_back(ap);
            }
          }
        }
        legend[glyph] = std::move(le);
      }
      if (i >= lines.size() || trim(lines[i]) != "end")
        throw GridParseError("legend section must close with 'end'", static_cast<int>(i) + 1);
      ++i;
    } else {
      throw GridParseError("unknown directive '" + kw + "'", lineno);
    }
  }

  if (width < 0) throw GridParseError("missing grid directive", 1);
  if (slip < 0) throw GridParseError("missing slip directive", 1);
  if (layout_rows.empty()) throw GridParseError("missing layout section", 1);

  GridSpec spec(width, height, slip);
  std::map<int, Cell> starts;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const char glyph = layout_rows[y][x];
      if (glyph == '.') continue;
      auto it = legend.find(glyph);
      if (it == legend.end())
        throw GridParseError(std::string("glyph '") + glyph + "' not in legend",
                             layout_line + 1 + y);
      if (!it->second.aps.empty()) spec.set_labels({x, y}, it->second.aps);
      for (int agent : it->second.start_agents) {
        if (starts.count(agent))
          throw GridParseError("agent " + std::to_string(agent) + " has two start cells",
                               layout_line + 1 + y);
        starts[agent] = {x, y};
      }
    }
  }
  int expected = 0;
  for (const auto& [agent, cell] : starts) {
    if (agent != expected)
      throw GridParseError("agent start indices must be contiguous from 0", layout_line);
    spec.add_start(cell);
    ++expected;
  }
  for (const auto& w : walls) spec.add_wall(w);
  spec.validate();
  return spec;
}

std::string serialize_grid(const GridSpec& spec) {
  // Canonical glyph assignment: '.' for plain cells, then glyphs from a fixed
  // pool in row-major order of first use.
  static constexpr std::string_view kPool =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789@$%&*+=?";

  struct CellFeature {
    std::vector<std::string> aps;
    std::vector<int> start_agents;
    bool operator==(const CellFeature&) const = default;
    bool empty() const { return aps.empty() && start_agents.empty(); }
  };

  std::vector<CellFeature> features(spec.num_cells());
  for (const auto& [cell, aps] : spec.label_map()) features[spec.cell_index(cell)].aps = aps;
  for (int agent = 0; agent < spec.num_agents(); ++agent)
    features[spec.cell_index(spec.starts()[agent])].start_agents.push_back(agent);

  std::vector<std::pair<CellFeature, char>> assigned;
  auto glyph_for = [&](const CellFeature& f) -> char {
    for (const auto& [feat, g] : assigned)
      if (feat == f) return g;
    if (assigned.size() >= kPool.size())
      throw std::invalid_argument("too many distinct cell types to serialize");
    const char g = kPool[assigned.size()];
    assigned.emplace_back(f, g);
    return g;
  };

  std::ostringstream layout;
  for (int y = 0; y < spec.height(); ++y) {
    for (int x = 0; x < spec.width(); ++x) {
      const auto& f = features[spec.cell_index({x, y})];
      layout << (f.empty() ? '.' : glyph_for(f));
    }
    layout << "\n";
  }

  std::ostringstream out;
  out << "grid " << spec.width() << " " << spec.height() << "\n";
  char slip_buf[32];
  std::snprintf(slip_buf, sizeof slip_buf, "%.17g", spec.slip_p());
  out << "slip " << slip_buf << "\n";
  out << "layout\n" << layout.str() << "end\n";
  for (const auto& w : spec.wall_segments())
    out << "wall " << w.x1 << " " << w.y1 << " " << w.x2 << " " << w.y2 << "\n";
  if (!assigned.empty()) {
    out << "legend\n";
    for (const auto& [feat, glyph] : assigned) {
      out << glyph << " =";
      if (!feat.aps.empty()) {
        out << " ";
        for (std::size_t k = 0; k < feat.aps.size(); ++k) {
          if (k) out << ",";
          out << feat.aps[k];
        }
      }
      for (int agent : feat.start_agents) out << " start=" << agent;
      out << "\n";
    }
    out << "end\n";
  }
  return out.str();
}

}  // namespace marlshape::gridworld
