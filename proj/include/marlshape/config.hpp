#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "marlshape/bench.hpp"

// Flat key-value experiment configs with optional [section] headers; see
// docs/formats.md for the grammar. Paths are resolved relative to the
// config file's directory.

namespace marlshape::config {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raw parsed file: keys are "section.key", or just "key" outside sections.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(std::string_view text);

struct ExperimentConfig {
  std::string name;
  std::filesystem::path grid_file;
  std::filesystem::path automaton_file;  // empty in baseline mode
  bench::Mode mode = bench::Mode::Shaped;
  bench::BaselineRewardRule rule;
  std::vector<std::uint64_t> seeds;
  shaping::Params params;
  learner::Schedule explore;
  learner::Schedule learning_rate;
  long episodes = 0;
  int episode_length = 100;
  std::filesystem::path out_dir;

  bench::TrainSpec to_train_spec() const;  // loads grid and automaton files
};

// Loads and validates an experiment config. `benchmark = <name>` pulls
// defaults from the benchmark catalog, resolved against `fixtures_dir`;
// explicit keys override catalog values.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct OracleInstance {
  std::filesystem::path automaton_file;
  std::filesystem::path grid_file;
};

struct OracleConfig {
  std::vector<OracleInstance> instances;
  long steps = 10000;
  std::vector<std::uint64_t> seeds;
  std::size_t state_cap = 1'000'000;
  shaping::Params params;
};

OracleConfig load_oracle_config(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);  // throws IoError
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace marlshape::config
