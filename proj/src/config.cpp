#include "fundtrack/config.hpp"

#include <stdexcept>

#include "fundtrack/csv.hpp"

namespace fundtrack {

std::string to_string(ProblemMode mode) {
  return mode == ProblemMode::Track ? "track" : "beat";
}

ProblemMode problem_mode_from_string(const std::string& s) {
  if (s == "track") return ProblemMode::Track;
  if (s == "beat") return ProblemMode::Beat;
  throw std::invalid_argument("problem_mode_from_string: unknown mode '" + s +
                              "' (expected track or beat)");
}

namespace {

StrategyConfig from_kv(const KeyValueFile& kv,
                       std::optional<ProblemMode> mode_override) {
  const std::int64_t version = kv.get_int("schema_version", -1);
  if (version != 1) {
    throw ParseError(kv.origin() + ": schema_version = 1 is required");
  }

  std::optional<ProblemMode> mode = mode_override;
  if (kv.has("mode")) {
    const ProblemMode file_mode = problem_mode_from_string(kv.get_string("mode"));
    if (mode && *mode != file_mode) {
      throw ParseError(kv.origin() + ": mode '" + to_string(file_mode) +
                       "' conflicts with the requested '" + to_string(*mode) +
                       "'");
    }
    mode = file_mode;
  }
  if (!mode) {
    throw ParseError(kv.origin() +
                     ": no mode given (set `mode = track|beat` or pass one)");
  }

  StrategyConfig c = *mode == ProblemMode::Track
                         ? StrategyConfig::track_defaults()
                         : StrategyConfig::beat_defaults();

  c.start = kv.get_date("start", c.start);
  c.end = kv.get_date("end", c.end);
  c.top_fraction = kv.get_number("top_fraction", c.top_fraction);
  c.min_universe = static_cast<int>(kv.get_int("min_universe", c.min_universe));
  c.low_vol_count = static_cast<int>(kv.get_int("low_vol_count", c.low_vol_count));
  c.rebalance_offset_days = static_cast<int>(
      kv.get_int("rebalance_offset_days", c.rebalance_offset_days));
  c.report_staleness_days = static_cast<int>(
      kv.get_int("report_staleness_days", c.report_staleness_days));
  c.screen.min_fund_age_days = static_cast<int>(
      kv.get_int("min_fund_age_days", c.screen.min_fund_age_days));
  c.screen.min_stock_age_days = static_cast<int>(
      kv.get_int("min_stock_age_days", c.screen.min_stock_age_days));
  c.cov_window_days =
      static_cast<int>(kv.get_int("cov_window_days", c.cov_window_days));
  c.cov_min_days = static_cast<int>(kv.get_int("cov_min_days", c.cov_min_days));
  c.vol_kernel.flat_days =
      static_cast<int>(kv.get_int("vol_flat_days", c.vol_kernel.flat_days));
  c.vol_kernel.decay_days =
      static_cast<int>(kv.get_int("vol_decay_days", c.vol_kernel.decay_days));

  c.problem.beta = kv.get_number("beta", c.problem.beta);
  c.problem.kappa = kv.get_number("kappa", c.problem.kappa);
  c.problem.gamma = kv.get_number("gamma", c.problem.gamma);
  c.problem.band_width = kv.get_number("band_width", c.problem.band_width);
  c.problem.sector_cap = kv.get_number("sector_cap", c.problem.sector_cap);
  c.problem.return_window_days = static_cast<int>(
      kv.get_int("return_window_days", c.problem.return_window_days));

  c.backtest.initial_cash =
      kv.get_number("initial_cash", c.backtest.initial_cash);
  c.backtest.commission_buy =
      kv.get_number("commission_buy", c.backtest.commission_buy);
  c.backtest.commission_sell =
      kv.get_number("commission_sell", c.backtest.commission_sell);
  c.backtest.slippage = kv.get_number("slippage", c.backtest.slippage);
  c.backtest.lot_size = kv.get_int("lot_size", c.backtest.lot_size);
  c.backtest.min_listing_age_days = static_cast<int>(kv.get_int(
      "min_listing_age_days", c.backtest.min_listing_age_days));

  c.solver.eps_abs = kv.get_number("solver_eps_abs", c.solver.eps_abs);
  c.solver.eps_rel = kv.get_number("solver_eps_rel", c.solver.eps_rel);
  c.solver.max_iterations = static_cast<int>(
      kv.get_int("solver_max_iterations", c.solver.max_iterations));

  const std::vector<std::string> unknown = kv.unused_keys();
  if (!unknown.empty()) {
    std::string joined;
    for (const std::string& k : unknown) {
      if (!joined.empty()) joined += ", ";
      joined += k;
    }
    throw ParseError(kv.origin() + ": unknown key(s): " + joined);
  }

  c.validate();
  return c;
}

}  // namespace

StrategyConfig load_strategy_config(const std::filesystem::path& path,
                                    std::optional<ProblemMode> mode_override) {
  return from_kv(KeyValueFile::parse(path), mode_override);
}

StrategyConfig strategy_config_from_text(
    const std::string& text, const std::string& origin,
    std::optional<ProblemMode> mode_override) {
  return from_kv(KeyValueFile::from_text(text, origin), mode_override);
}

}  // namespace fundtrack
