#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "marlshape/config.hpp"
#include "marlshape/oracle.hpp"
#include "marlshape/svg_plot.hpp"

// Exit codes: 0 success, 1 validation error, 2 I/O error, 3 oracle divergence.

namespace {

namespace fs = std::filesystem;
using namespace marlshape;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitDivergence = 3;

struct CliOptions {
  std::string config_path;
  std::string seeds_override;
  std::string out_override;
  std::string mode_override;
};

int cmd_run(const CliOptions& opt) {
  auto cfg = config::load_experiment_config(opt.config_path);
  if (!opt.seeds_override.empty()) {
    cfg.seeds.clear();
    std::istringstream in(opt.seeds_override);
    std::string tok;
    while (std::getline(in, tok, ',')) cfg.seeds.push_back(std::stoull(tok));
    if (cfg.seeds.empty()) throw config::ConfigError("empty seeds override");
  }
  if (!opt.out_override.empty()) cfg.out_dir = opt.out_override;
  if (!opt.mode_override.empty()) {
    if (opt.mode_override == "shaped")
      cfg.mode = bench::Mode::Shaped;
    else if (opt.mode_override == "baseline")
      cfg.mode = bench::Mode::Baseline;
    else
      throw config::ConfigError("mode must be 'shaped' or 'baseline'");
  }

  const auto spec = cfg.to_train_spec();
  const auto result = bench::run_experiment(spec, cfg.seeds);
  if (result.curves.constant)
    std::cerr << "warning: all returns identical; normalized curve pinned to 0.5\n";

  const std::string mode_name = cfg.mode == bench::Mode::Shaped ? "shaped" : "baseline";
  if (!cfg.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    const fs::path csv_path = cfg.out_dir / (cfg.name + "_" + mode_name + ".csv");
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw config::IoError("cannot write " + csv_path.string());
    bench::write_csv(out, result);
    std::cout << "wrote " << csv_path.string() << "\n";
  }

  std::cout << cfg.name << " " << mode_name << ": episodes=" << cfg.episodes
            << " seeds=" << cfg.seeds.size() << "\n";
  std::cout << "  raw final mean: " << result.curves.final_raw_mean << "\n";
  std::cout << "  normalized smoothed final: " << result.curves.final_smoothed() << "\n";
  std::cout << "  rolling std (final quartile mean): " << result.curves.final_quartile_std()
            << "\n";
  return kExitOk;
}

int cmd_validate(const std::string& automaton_path, const std::string& grid_path) {
  const auto doc = hoa::parse_hoa(config::read_file(automaton_path));
  const auto ldba = automaton::Ldba::load(doc);

  std::cout << automaton_path << ": " << ldba.num_states() << " states, "
            << ldba.accepting_transition_count() << " accepting transitions\n";
  std::cout << "  alphabet:";
  for (const auto& ap : ldba.alphabet()) std::cout << " " << ap;
  std::cout << "\n";
  bool any_eps = false;
  for (int q = 0; q < ldba.num_states(); ++q) {
    const auto eps = ldba.available_epsilons(q);
    if (eps.empty()) continue;
    any_eps = true;
    std::cout << "  state " << q << ": " << eps.size() << " epsilon move"
              << (eps.size() == 1 ? "" : "s") << " ->";
    for (int id : eps) std::cout << " e" << id << "=" << ldba.step_epsilon(q, id).next_state;
    std::cout << "\n";
  }
  if (!any_eps) std::cout << "  epsilon moves: none\n";
  if (ldba.trap_state())
    std::cout << "  trap state: " << *ldba.trap_state() << "\n";
  else
    std::cout << "  trap state: none\n";

  if (!grid_path.empty()) {
    const auto grid = gridworld::parse_grid(config::read_file(grid_path));
    std::cout << grid_path << ": " << grid.width() << "x" << grid.height() << ", "
              << grid.num_agents() << " agents, slip " << grid.slip_p() << "\n";
    for (const auto& [cell, aps] : grid.label_map()) {
      for (const auto& ap : aps) {
        if (!ldba.ap_index(ap)) {
          std::cout << "  label \"" << ap << "\" at (" << cell.x << "," << cell.y
                    << ") is not in the automaton alphabet\n";
          return kExitValidation;
        }
      }
    }
    std::cout << "  labels compatible with the automaton alphabet\n";
  }
  return kExitOk;
}

int cmd_oracle(const std::string& config_path) {
  const auto cfg = config::load_oracle_config(config_path);
  bool any_divergence = false;
  for (const auto& inst : cfg.instances) {
    const auto doc = hoa::parse_hoa(config::read_file(inst.automaton_file));
    const auto ldba = automaton::Ldba::load(doc);
    const auto grid = gridworld::parse_grid(config::read_file(inst.grid_file));
    const auto views = oracle::per_agent_views(grid);
    long steps = 0, episodes = 0;
    for (const auto seed : cfg.seeds) {
      const auto report =
          oracle::check_equivalence(ldba, views, cfg.params, cfg.steps, seed, cfg.state_cap);
      steps += report.steps_checked;
      episodes += report.episodes;
      if (report.diverged) {
        any_divergence = true;
        std::cout << inst.grid_file.filename().string() << " seed " << seed
                  << ": DIVERGED at step " << report.divergence_step << ": " << report.detail
                  << "\n";
        break;
      }
    }
    if (!any_divergence)
      std::cout << inst.grid_file.filename().string() << " x "
                << inst.automaton_file.filename().string() << ": " << steps
                << " steps over " << cfg.seeds.size() << " seeds, no divergence\n";
  }
  return any_divergence ? kExitDivergence : kExitOk;
}

struct CsvRow {
  long episode;
  std::uint64_t seed;
  int agent;
  double raw, normalized, smoothed, rolling_std;
};

int cmd_plot(const std::string& csv_path, const std::string& out_path,
             const std::string& label) {
  std::ifstream in(csv_path);
  if (!in) throw config::IoError("cannot open file: " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw config::IoError("empty csv: " + csv_path);

  std::map<long, std::pair<double, long>> by_episode;  // sum, count
  std::map<long, double> smoothed_any;
  std::map<long, double> std_any;
  while (std::getline(in, line)) {
    CsvRow row;
    if (std::sscanf(line.c_str(), "%ld,%llu,%d,%lf,%lf,%lf,%lf", &row.episode,
                    reinterpret_cast<unsigned long long*>(&row.seed), &row.agent, &row.raw,
                    &row.normalized, &row.smoothed, &row.rolling_std) != 7)
      throw config::IoError("bad csv row: " + line);
    auto& [sum, count] = by_episode[row.episode];
    sum += row.normalized;
    ++count;
    smoothed_any[row.episode] += row.smoothed;
    std_any[row.episode] += row.rolling_std;
  }

  svg::Series series;
  series.label = label.empty() ? fs::path(csv_path).stem().string() : label;
  series.color = "#1f77b4";
  for (const auto& [ep, acc] : by_episode) {
    series.mean.push_back(smoothed_any[ep] / acc.second);
    series.band.push_back(std_any[ep] / acc.second);
  }

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw config::IoError("cannot write " + out_path);
  svg::write_line_chart(out, {series}, series.label);
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-agent tabular RL with Buchi-automaton reward shaping"};
  app.require_subcommand(1);

  CliOptions opt;
  auto* run = app.add_subcommand("run", "train from an experiment config and write CSV curves");
  run->add_option("--config", opt.config_path, "experiment config file")->required();
  run->add_option("--seeds", opt.seeds_override, "comma-separated seed override");
  run->add_option("--out", opt.out_override, "output directory override");
  run->add_option("--mode", opt.mode_override, "mode override: shaped|baseline");

  std::string automaton_path, grid_path;
  auto* validate = app.add_subcommand("validate", "load an automaton (and optionally a grid)");
  validate->add_option("automaton", automaton_path, "HOA file")->required();
  validate->add_option("grid", grid_path, "grid file");

  std::string oracle_config;
  auto* orc = app.add_subcommand("oracle", "check the shaping runtime against the product MDP");
  orc->add_option("--config", oracle_config, "oracle config file")->required();

  std::string csv_path, svg_path, plot_label;
  auto* plot = app.add_subcommand("plot", "render a CSV learning curve as SVG");
  plot->add_option("--csv", csv_path, "input CSV")->required();
  plot->add_option("--out", svg_path, "output SVG")->required();
  plot->add_option("--label", plot_label, "series label");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(opt);
    if (validate->parsed()) return cmd_validate(automaton_path, grid_path);
    if (orc->parsed()) return cmd_oracle(oracle_config);
    if (plot->parsed()) return cmd_plot(csv_path, svg_path, plot_label);
  } catch (const config::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
