#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fundtrack/market_data.hpp"
#include "fundtrack/weighting.hpp"

namespace fundtrack {

struct BacktestConfig {
  double initial_cash = 100'000'000.0;  // CNY
  double commission_buy = 0.0005;       // of traded value
  double commission_sell = 0.00015;
  double slippage = 0.01;  // CNY per share, each side
  std::int64_t lot_size = 100;
  int min_listing_age_days = 90;

  void validate() const;  // throws std::invalid_argument
};

struct PortfolioState {
  Date date = 0;
  double cash = 0.0;
  std::map<std::string, std::int64_t> positions;  // lot multiples, > 0
};

enum class Side { Buy, Sell };
std::string to_string(Side s);

struct TradeFill {
  Date date = 0;
  std::string ticker;
  Side side = Side::Buy;
  std::int64_t shares = 0;
  double reference_price = 0.0;  // close
  double executed_price = 0.0;   // close ± slippage
  double commission = 0.0;       // rate × shares × executed_price
};

// (date, ticker, rule) for legs that could not trade.
struct SkipEntry {
  Date date = 0;
  std::string ticker;
  std::string rule;
};

struct Tradability {
  bool ok = false;
  std::string reason;  // empty when ok
};

// A-share day-trading gates: data present, listing age, suspension, and the
// one-sided price-limit locks (no buying limit-up, no selling limit-down).
Tradability tradability(const PriceBar* bar, const InstrumentMeta* meta,
                        Date as_of, Side side, int min_age_days = 90);

// Market context for one rebalance day, keyed by ticker. `last_close` backs
// the valuation of names without a bar today.
struct DaySnapshot {
  Date date = 0;
  std::map<std::string, const PriceBar*> bars;
  std::map<std::string, const InstrumentMeta*> metas;
  std::map<std::string, double> last_close;
};

struct RebalanceOutcome {
  PortfolioState state;
  std::vector<TradeFill> fills;
  std::vector<SkipEntry> skips;
};

// One friction-aware rebalance toward `target`:
//   1. mark equity at reference prices (today's close, else last known);
//   2. desired shares = floor(weight × equity / close / lot) × lot;
//   3. sells (including full liquidations) run before buys;
//   4. untradeable legs are skipped, logged, and their positions carried;
//   5. on a cash shortfall all buys scale down proportionally and re-floor
//      to lots, which provably fits within cash in one pass;
//   6. executed price = close ± slippage; commission = rate × shares × exec.
// Cash stays nonnegative; positions stay lot multiples.
RebalanceOutcome rebalance(const PortfolioState& state, const WeightVector& target,
                           const DaySnapshot& day, const BacktestConfig& config);

struct EquityPoint {
  Date date = 0;
  double equity = 0.0;
  double cash = 0.0;
};

struct HoldingsRecord {
  Date date = 0;
  std::string ticker;
  std::int64_t shares = 0;
  double weight = 0.0;  // share value / total equity at that day's closes
};

struct BacktestResult {
  std::vector<EquityPoint> curve;
  std::vector<TradeFill> fills;
  std::vector<HoldingsRecord> holdings;  // post-rebalance snapshots
  std::vector<SkipEntry> skips;
};

// Target weights at a rebalance date; sees only data at or before that date.
// Returning nullopt skips the rebalance (positions carried, no trades);
// throwing aborts the whole run.
using WeightsProvider =
    std::function<std::optional<WeightVector>(const DataView&, Date)>;

// Walks the trading calendar over [start, end] (0 = full data range),
// marking to market daily and rebalancing on each schedule date. Provider
// exceptions abort with the date in the message.
BacktestResult run_backtest(const MarketTables& tables,
                            const std::vector<Date>& schedule,
                            const WeightsProvider& provider,
                            const BacktestConfig& config, Date start = 0,
                            Date end = 0);

}  // namespace fundtrack
