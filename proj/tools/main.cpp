#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fundtrack/config.hpp"
#include "fundtrack/csv.hpp"
#include "fundtrack/pipeline.hpp"
#include "fundtrack/reporting.hpp"
#include "fundtrack/synthetic.hpp"
#include "fundtrack/table_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;  // data or execution failure
constexpr int kExitUsage = 2;    // flags, config, spec

int run_generate(const std::string& spec_path, std::uint64_t seed,
                 const std::string& out_dir) {
  fundtrack::GeneratorSpec spec;
  try {
    spec = fundtrack::load_generator_spec(spec_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "generate: bad spec: %s\n", e.what());
    return kExitUsage;
  }
  try {
    const fundtrack::SyntheticMarket market =
        fundtrack::generate_synthetic_market(spec, seed);
    std::filesystem::create_directories(out_dir);
    fundtrack::write_synthetic_market(out_dir, market);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "generate: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}

std::optional<fundtrack::StrategyConfig> read_config(
    const std::string& config_path, const std::string& strategy) {
  std::optional<fundtrack::ProblemMode> mode;
  if (!strategy.empty()) {
    mode = fundtrack::problem_mode_from_string(strategy);
  }
  return fundtrack::load_strategy_config(config_path, mode);
}

int run_strategy_command(const std::string& config_path,
                         const std::string& strategy,
                         const std::string& data_dir,
                         const std::string& out_dir) {
  std::optional<fundtrack::StrategyConfig> config;
  try {
    config = read_config(config_path, strategy);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "run: bad config: %s\n", e.what());
    return kExitUsage;
  }
  fundtrack::MarketTables tables;
  try {
    tables = fundtrack::load_market_tables(data_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "run: data load failed: %s\n", e.what());
    return kExitRuntime;
  }
  try {
    const fundtrack::PipelineResult result =
        fundtrack::run_strategy(tables, *config);
    fundtrack::write_run_outputs(out_dir, tables, *config, result);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "run: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}

int run_inspect(const std::string& config_path, const std::string& strategy,
                const std::string& data_dir, const std::string& out_dir,
                const std::string& date_text) {
  std::optional<fundtrack::StrategyConfig> config;
  fundtrack::Date date = 0;
  try {
    config = read_config(config_path, strategy);
    date = fundtrack::parse_date(date_text);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "inspect-qp: %s\n", e.what());
    return kExitUsage;
  }
  fundtrack::MarketTables tables;
  try {
    tables = fundtrack::load_market_tables(data_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "inspect-qp: data load failed: %s\n", e.what());
    return kExitRuntime;
  }
  try {
    // The dump must describe a problem the run would actually solve, so the
    // date has to sit on the quarterly schedule.
    const std::vector<fundtrack::Date> quarter_ends =
        fundtrack::quarter_ends_between(date - config->rebalance_offset_days - 95,
                                        date);
    bool scheduled = false;
    for (const fundtrack::Date q : quarter_ends) {
      const std::optional<fundtrack::Date> r =
          tables.prices.calendar().next_on_or_after(
              q + config->rebalance_offset_days);
      if (r && *r == date) scheduled = true;
    }
    if (!scheduled) {
      std::fprintf(stderr, "inspect-qp: %s is not a rebalance date\n",
                   fundtrack::format_date(date).c_str());
      return kExitUsage;
    }

    std::string why;
    std::optional<fundtrack::AssembledProblem> assembled =
        fundtrack::assemble_problem_at(tables, *config, date, &why);
    if (!assembled) {
      std::fprintf(stderr, "inspect-qp: no problem at %s: %s\n",
                   fundtrack::format_date(date).c_str(), why.c_str());
      return kExitRuntime;
    }
    const std::optional<fundtrack::WeightVector> weights =
        fundtrack::solve_assembled(*assembled, *config);
    fundtrack::write_problem_dump(out_dir, *assembled, weights);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "inspect-qp: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fund-holdings index tracking and enhancement toolkit"};
  app.require_subcommand(1);

  std::string spec_path;
  std::uint64_t seed = 42;
  std::string out_dir;
  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic market");
  generate->add_option("--spec", spec_path, "Generator spec file")->required();
  generate->add_option("--seed", seed, "Random seed");
  generate->add_option("--out", out_dir, "Output directory")->required();

  std::string config_path;
  std::string strategy;
  std::string data_dir;
  std::string run_out;
  CLI::App* run = app.add_subcommand("run", "Run a strategy backtest");
  run->add_option("--config", config_path, "Strategy config file")->required();
  run->add_option("--strategy", strategy, "track or beat");
  run->add_option("--data", data_dir, "Market data directory")->required();
  run->add_option("--out", run_out, "Output directory")->required();

  std::string inspect_config;
  std::string inspect_strategy;
  std::string inspect_data;
  std::string inspect_out;
  std::string inspect_date;
  CLI::App* inspect =
      app.add_subcommand("inspect-qp", "Dump one rebalance date's problem");
  inspect->add_option("--config", inspect_config, "Strategy config file")
      ->required();
  inspect->add_option("--strategy", inspect_strategy, "track or beat");
  inspect->add_option("--data", inspect_data, "Market data directory")
      ->required();
  inspect->add_option("--out", inspect_out, "Output directory")->required();
  inspect->add_option("--date", inspect_date, "Rebalance date (YYYY-MM-DD)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (generate->parsed()) return run_generate(spec_path, seed, out_dir);
  if (run->parsed()) {
    return run_strategy_command(config_path, strategy, data_dir, run_out);
  }
  return run_inspect(inspect_config, inspect_strategy, inspect_data,
                     inspect_out, inspect_date);
}
