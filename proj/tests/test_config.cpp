#include "marlshape/config.hpp"

#include "doctest.h"
#include "test_util.hpp"

using namespace marlshape;
using namespace marlshape::config;

TEST_CASE("key-value parsing with sections") {
  const auto kv = parse_key_values(
      "# comment\n"
      "top = 1\n"
      "[experiment]\n"
      "mode = shaped\n"
      "seeds = 1, 2, 3\n"
      "[output]\n"
      "out_dir = somewhere\n");
  CHECK(kv.at("top") == "1");
  CHECK(kv.at("experiment.mode") == "shaped");
  CHECK(kv.at("experiment.seeds") == "1, 2, 3");
  CHECK(kv.at("output.out_dir") == "somewhere");
  CHECK_THROWS_AS(parse_key_values("foo\n"), ConfigError);
  CHECK_THROWS_AS(parse_key_values("a = 1\na = 2\n"), ConfigError);
}

TEST_CASE("every shipped experiment config loads and validates") {
  for (const auto& name :
       {"configs/buttons_phi3.cfg", "configs/buttons_phi3prime.cfg",
        "configs/buttons_baseline.cfg", "configs/flags_shaped.cfg",
        "configs/flags_baseline.cfg", "configs/rendezvous_shaped.cfg",
        "configs/rendezvous_baseline.cfg"}) {
    const auto cfg = load_experiment_config(fixture_path(name));
    CHECK(cfg.seeds.size() == 5);
    CHECK(cfg.episodes > 0);
    CHECK(cfg.params.gamma == 0.999);
    CHECK(cfg.params.gamma_b == 0.99);
    // the referenced grid and automaton files load
    const auto spec = cfg.to_train_spec();
    CHECK(spec.grid.num_agents() == 2);
    if (cfg.mode == bench::Mode::Shaped) CHECK(spec.ldba != nullptr);
  }
  const auto oracle_cfg = load_oracle_config(fixture_path("configs/oracle_small.cfg"));
  CHECK(oracle_cfg.instances.size() == 3);
  CHECK(oracle_cfg.seeds.size() == 20);
  CHECK(oracle_cfg.steps == 10000);
}

TEST_CASE("the phi3prime variant overrides the buttons automaton") {
  const auto cfg = load_experiment_config(fixture_path("configs/buttons_phi3prime.cfg"));
  CHECK(cfg.automaton_file.filename() == "motivating_phi3prime.hoa");
  const auto base = load_experiment_config(fixture_path("configs/buttons_phi3.cfg"));
  CHECK(base.automaton_file.filename() == "motivating_phi3.hoa");
  CHECK(base.episodes == 100000);
}

TEST_CASE("discount validation rejects gamma_b above gamma") {
  const std::string text =
      "benchmark = flags\nfixtures_dir = " + fixture_path("").string() +
      "\nmode = shaped\nseeds = 1\n[shaping]\ngamma = 0.9\ngamma_b = 0.99\n";
  const auto tmp = std::filesystem::temp_directory_path() / "marlshape_bad_gamma.cfg";
  {
    std::ofstream out(tmp);
    out << text;
  }
  CHECK_THROWS_AS(load_experiment_config(tmp), ConfigError);
}

TEST_CASE("missing files raise io errors with the path in the message") {
  const auto missing = fixture_path("configs/does_not_exist.cfg");
  try {
    load_experiment_config(missing);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("does_not_exist.cfg") != std::string::npos);
  }
}

TEST_CASE("seed lists accept ranges and commas") {
  const auto tmp = std::filesystem::temp_directory_path() / "marlshape_seeds.cfg";
  {
    std::ofstream out(tmp);
    out << "benchmark = flags\nfixtures_dir = " << fixture_path("").string()
        << "\nmode = baseline\nseeds = 1..3, 9\nepisodes = 10\n";
  }
  const auto cfg = load_experiment_config(tmp);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2, 3, 9});
  CHECK(cfg.episodes == 10);
}

TEST_CASE("configs without seeds or grid are rejected") {
  const auto tmp = std::filesystem::temp_directory_path() / "marlshape_invalid.cfg";
  {
    std::ofstream out(tmp);
    out << "mode = baseline\nseeds = 1\nepisodes = 5\nbaseline_rule = flags\n";
  }
  CHECK_THROWS_AS(load_experiment_config(tmp), ConfigError);
  {
    std::ofstream out(tmp);
    out << "benchmark = flags\nfixtures_dir = " << fixture_path("").string()
        << "\nmode = baseline\n";
  }
  CHECK_THROWS_AS(load_experiment_config(tmp), ConfigError);
}
