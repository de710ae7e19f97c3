#include "marlshape/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace marlshape::config {

namespace {

std::string trim(std::string_view v) {
  std::size_t b = 0, e = v.size();
  while (b < e && std::isspace(static_cast<unsigned char>(v[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(v[e - 1]))) --e;
  return std::string(v.substr(b, e - b));
}

double parse_double(const KeyValues& kv, const std::string& key, double fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects a number, got '" + it->second + "'");
  }
}

long parse_long(const KeyValues& kv, const std::string& key, long fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    return std::stol(it->second);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects an integer, got '" + it->second + "'");
  }
}

std::optional<std::string> get(const KeyValues& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) return std::nullopt;
  return it->second;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    const std::string t = trim(tok);
    if (t.empty()) continue;
    const auto dots = t.find("..");
    try {
      if (dots != std::string::npos) {
        const std::uint64_t lo = std::stoull(t.substr(0, dots));
        const std::uint64_t hi = std::stoull(t.substr(dots + 2));
        for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
      } else {
        seeds.push_back(std::stoull(t));
      }
    } catch (const std::exception&) {
      throw ConfigError("bad seed entry '" + t + "'");
    }
  }
  return seeds;
}

bench::BaselineRuleId rule_from_name(const std::string& name) {
  if (name == "buttons") return bench::BaselineRuleId::Buttons;
  if (name == "flags") return bench::BaselineRuleId::Flags;
  if (name == "rendezvous") return bench::BaselineRuleId::Rendezvous;
  throw ConfigError("unknown baseline rule '" + name + "'");
}

learner::ScheduleKind schedule_kind_from_name(const std::string& name) {
  if (name == "linear") return learner::ScheduleKind::Linear;
  if (name == "exponential") return learner::ScheduleKind::Exponential;
  throw ConfigError("unknown schedule kind '" + name + "'");
}

}  // namespace

KeyValues parse_key_values(std::string_view text) {
  KeyValues out;
  std::string section;
  int lineno = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    if (out.count(key))
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    out[key] = trim(t.substr(eq + 1));
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

// Section-qualified lookup that also accepts the bare key.
std::optional<std::string> get2(const KeyValues& kv, const std::string& section,
                                const std::string& key) {
  if (auto v = get(kv, section + "." + key)) return v;
  return get(kv, key);
}

double num2(const KeyValues& kv, const std::string& section, const std::string& key,
            double fallback) {
  if (auto v = get2(kv, section, key)) {
    try {
      return std::stod(*v);
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "' expects a number, got '" + *v + "'");
    }
  }
  return fallback;
}

long int2(const KeyValues& kv, const std::string& section, const std::string& key,
          long fallback) {
  if (auto v = get2(kv, section, key)) {
    try {
      return std::stol(*v);
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "' expects an integer, got '" + *v + "'");
    }
  }
  return fallback;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  const auto kv = parse_key_values(read_file(path));
  const auto dir = path.parent_path();
  auto resolve = [&](const std::string& p) { return dir / std::filesystem::path(p); };

  ExperimentConfig cfg;

  const bench::BenchmarkDef* def = nullptr;
  if (auto name = get2(kv, "experiment", "benchmark")) {
    def = bench::find_benchmark(*name);
    if (!def) throw ConfigError("unknown benchmark '" + *name + "'");
    cfg.name = *name;
  }
  if (auto name = get2(kv, "experiment", "name")) cfg.name = *name;
  if (cfg.name.empty()) cfg.name = "experiment";

  std::filesystem::path fixtures_dir = dir;
  if (auto d = get2(kv, "experiment", "fixtures_dir")) fixtures_dir = resolve(*d);

  if (auto mode = get2(kv, "experiment", "mode")) {
    if (*mode == "shaped")
      cfg.mode = bench::Mode::Shaped;
    else if (*mode == "baseline")
      cfg.mode = bench::Mode::Baseline;
    else
      throw ConfigError("mode must be 'shaped' or 'baseline'");
  }

  if (auto g = get2(kv, "experiment", "grid"))
    cfg.grid_file = resolve(*g);
  else if (def)
    cfg.grid_file = fixtures_dir / def->grid_file;
  else
    throw ConfigError("config needs either 'benchmark' or an explicit 'grid' path");

  if (auto a = get2(kv, "experiment", "automaton"))
    cfg.automaton_file = resolve(*a);
  else if (def && cfg.mode == bench::Mode::Shaped)
    cfg.automaton_file = fixtures_dir / def->automaton_file;
  if (cfg.mode == bench::Mode::Shaped && cfg.automaton_file.empty())
    throw ConfigError("shaped mode needs an automaton file");

  if (auto r = get2(kv, "experiment", "baseline_rule"))
    cfg.rule.id = rule_from_name(*r);
  else if (def)
    cfg.rule.id = def->rule;
  else if (cfg.mode == bench::Mode::Baseline)
    throw ConfigError("baseline mode needs a 'baseline_rule'");
  cfg.rule.sync_reward = num2(kv, "experiment", "sync_reward", cfg.rule.sync_reward);
  cfg.rule.goal_reward = num2(kv, "experiment", "goal_reward", cfg.rule.goal_reward);

  cfg.episodes = int2(kv, "experiment", "episodes", def ? def->episodes : 0);
  cfg.episode_length =
      static_cast<int>(int2(kv, "experiment", "episode_length", def ? def->episode_length : 100));
  if (cfg.episodes <= 0) throw ConfigError("episodes must be positive");
  if (cfg.episode_length <= 0) throw ConfigError("episode_length must be positive");

  if (auto s = get2(kv, "experiment", "seeds"))
    cfg.seeds = parse_seed_list(*s);
  if (cfg.seeds.empty()) throw ConfigError("config needs a non-empty 'seeds' list");

  cfg.params.gamma = num2(kv, "shaping", "gamma", 0.999);
  cfg.params.gamma_b = num2(kv, "shaping", "gamma_b", 0.99);
  cfg.params.trap_reward = num2(kv, "shaping", "trap_reward", -1.0);
  if (!(cfg.params.gamma_b > 0.0 && cfg.params.gamma_b <= cfg.params.gamma &&
        cfg.params.gamma < 1.0))
    throw ConfigError("discounts must satisfy 0 < gamma_b <= gamma < 1");

  const auto kind = schedule_kind_from_name(
      get2(kv, "schedules", "schedule_kind").value_or("linear"));
  const long decay = int2(kv, "schedules", "decay_episodes", cfg.episodes);
  if (decay <= 0) throw ConfigError("decay_episodes must be positive");
  cfg.explore = {num2(kv, "schedules", "explore_start", 1.0),
                 num2(kv, "schedules", "explore_end", 0.01), decay, kind};
  cfg.learning_rate = {num2(kv, "schedules", "lr_start", 1.0),
                       num2(kv, "schedules", "lr_end", 0.001), decay, kind};
  if (cfg.explore.start < cfg.explore.end || cfg.explore.end <= 0.0 ||
      cfg.learning_rate.start < cfg.learning_rate.end || cfg.learning_rate.end <= 0.0)
    throw ConfigError("schedules must be non-increasing with a positive end value");

  if (auto o = get2(kv, "output", "out_dir")) cfg.out_dir = resolve(*o);

  return cfg;
}

bench::TrainSpec ExperimentConfig::to_train_spec() const {
  bench::TrainSpec spec;
  spec.grid = gridworld::parse_grid(read_file(grid_file));
  if (mode == bench::Mode::Shaped) {
    const auto doc = hoa::parse_hoa(read_file(automaton_file));
    spec.ldba = std::make_shared<automaton::Ldba>(automaton::Ldba::load(doc));
  }
  spec.mode = mode;
  spec.rule = rule;
  spec.params = params;
  spec.explore = explore;
  spec.learning_rate = learning_rate;
  spec.episodes = episodes;
  spec.episode_length = episode_length;
  return spec;
}

OracleConfig load_oracle_config(const std::filesystem::path& path) {
  const auto text = read_file(path);
  const auto dir = path.parent_path();

  OracleConfig cfg;
  // `instance = <automaton>, <grid>` may repeat, so scan lines directly.
  std::istringstream in(text);
  std::string line;
  std::string section;
  KeyValues scalars;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key == "instance") {
      const auto comma = value.find(',');
      if (comma == std::string::npos)
        throw ConfigError("instance expects '<automaton>, <grid>'");
      cfg.instances.push_back({dir / trim(value.substr(0, comma)),
                               dir / trim(value.substr(comma + 1))});
    } else {
      scalars[key] = value;
    }
  }

  cfg.steps = parse_long(scalars, "steps", cfg.steps);
  cfg.state_cap = static_cast<std::size_t>(parse_long(scalars, "state_cap",
                                                      static_cast<long>(cfg.state_cap)));
  if (auto s = get(scalars, "seeds")) cfg.seeds = parse_seed_list(*s);
  if (cfg.seeds.empty()) throw ConfigError("oracle config needs a non-empty 'seeds' list");
  if (cfg.instances.empty()) throw ConfigError("oracle config needs at least one 'instance'");
  cfg.params.gamma = parse_double(scalars, "gamma", 0.999);
  cfg.params.gamma_b = parse_double(scalars, "gamma_b", 0.99);
  cfg.params.trap_reward = parse_double(scalars, "trap_reward", -1.0);
  return cfg;
}

}  // namespace marlshape::config
