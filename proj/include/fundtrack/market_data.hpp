#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fundtrack/dates.hpp"

namespace fundtrack {

enum class Board { AShare, Other };
enum class FundCategory { Equity, Hybrid, Other };

std::string to_string(Board b);
Board board_from_string(const std::string& s);
std::string to_string(FundCategory c);
FundCategory fund_category_from_string(const std::string& s);

struct InstrumentMeta {
  std::string ticker;
  Date listing_date = 0;
  std::string industry_code;
  Board board = Board::AShare;
};

struct PriceBar {
  std::string ticker;
  Date date = 0;
  double close = 0.0;
  double prev_close = 0.0;
  bool is_suspended = false;
  double limit_up = 0.0;
  double limit_down = 0.0;
};

struct FundMeta {
  std::string fund_id;
  std::string name;
  FundCategory category = FundCategory::Other;
  bool is_open_ended = false;
  bool is_etf_like = false;
  bool is_excluded_type = false;  // QDII / FoF / structured / guarantee
  Date list_date = 0;
  std::string share_class_suffix;  // empty when the fund has no class letter
};

struct Holding {
  std::string ticker;
  std::int64_t shares = 0;
  double market_value = 0.0;   // CNY
  double weight_in_fund = 0.0; // fraction of fund NAV
};

// One quarterly top-10 disclosure for one fund.
struct FundReport {
  std::string fund_id;
  Date quarter_end = 0;
  Date publish_date = 0;
  std::vector<Holding> holdings;  // at most 10, validated on construction

  void validate() const;  // throws std::invalid_argument on violation
};

struct IndexPoint {
  Date date = 0;
  double level = 0.0;
};

// Benchmark index levels, strictly increasing dates, positive levels.
class IndexSeries {
 public:
  IndexSeries() = default;
  explicit IndexSeries(std::vector<IndexPoint> points);  // validates

  const std::vector<IndexPoint>& points() const { return points_; }
  bool empty() const { return points_.empty(); }
  std::optional<double> level_on(Date d) const;
  // Last level on or before d; nullopt before the first point.
  std::optional<double> level_on_or_before(Date d) const;

 private:
  std::vector<IndexPoint> points_;
};

// Ordered set of trading dates.
class TradingCalendar {
 public:
  TradingCalendar() = default;
  explicit TradingCalendar(std::vector<Date> days);  // must be strictly increasing

  const std::vector<Date>& days() const { return days_; }
  bool contains(Date d) const;
  // First trading day ≥ d; nullopt when the calendar ends before d.
  std::optional<Date> next_on_or_after(Date d) const;
  // Index of d in days(); throws std::invalid_argument when absent.
  std::size_t index_of(Date d) const;

 private:
  std::vector<Date> days_;
};

// For each quarter end Q, the first trading day ≥ Q + offset_days.
// Throws std::invalid_argument when the calendar ends before that day.
std::vector<Date> rebalance_schedule(const TradingCalendar& calendar,
                                     const std::vector<Date>& quarter_ends,
                                     int offset_days = 16);

// Column-oriented price panel with per-ticker sorted series and the union
// trading calendar of all bars.
class PriceTable {
 public:
  PriceTable() = default;
  // Sorts by (ticker, date), validates invariants, rejects duplicates.
  static PriceTable from_bars(std::vector<PriceBar> bars);

  const std::vector<std::string>& tickers() const { return tickers_; }
  const TradingCalendar& calendar() const { return calendar_; }
  bool has_ticker(const std::string& ticker) const;
  const std::vector<PriceBar>& series(const std::string& ticker) const;
  // nullptr when the ticker has no bar on that date.
  const PriceBar* bar(const std::string& ticker, Date d) const;
  // Close of the last bar on or before d; nullopt when none exists.
  std::optional<double> close_on_or_before(const std::string& ticker, Date d) const;
  std::vector<PriceBar> all_bars() const;  // sorted by (ticker, date)
  std::size_t size() const { return n_bars_; }

 private:
  std::map<std::string, std::vector<PriceBar>> by_ticker_;
  std::vector<std::string> tickers_;
  TradingCalendar calendar_;
  std::size_t n_bars_ = 0;
};

// Daily log returns over the trading days of `calendar_window`, one row per
// ticker. Days where a ticker has no fresh price (suspended or missing bar)
// carry a 0 return and a set flag, keeping the matrix rectangular.
struct ReturnMatrix {
  std::vector<std::string> tickers;
  std::vector<Date> dates;  // return dates, i.e. window days after the first
  Eigen::MatrixXd values;   // tickers × dates
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> carried;  // 1 = gap-filled
};

// Window [first, last] selects trading days from prices.calendar().
// Requires ≥ 2 selected days and, per ticker, ≥ 2 bars inside the window.
// Throws on nonpositive prices.
ReturnMatrix log_returns(const PriceTable& prices,
                         const std::vector<std::string>& tickers,
                         Date first, Date last);

// Everything one strategy run consumes.
struct MarketTables {
  std::vector<InstrumentMeta> instruments;
  PriceTable prices;
  std::vector<FundMeta> funds;
  std::vector<FundReport> reports;
  IndexSeries index;

  const InstrumentMeta* instrument(const std::string& ticker) const;
};

// Look-ahead guard: every accessor refuses data after the cutoff date, so a
// strategy evaluated at t can only ever observe information available at t.
class DataView {
 public:
  DataView(const MarketTables& tables, Date cutoff);

  Date cutoff() const { return cutoff_; }
  const std::vector<InstrumentMeta>& instruments() const;
  const InstrumentMeta* instrument(const std::string& ticker) const;
  const std::vector<FundMeta>& funds() const;

  // Latest report per fund with publish_date ≤ cutoff and quarter_end within
  // `max_staleness_days` of the cutoff.
  std::vector<const FundReport*> latest_reports(int max_staleness_days) const;

  // Trading days ≤ cutoff.
  std::vector<Date> trading_days() const;
  const PriceBar* bar(const std::string& ticker, Date d) const;  // d ≤ cutoff
  std::optional<double> close_on_or_before(const std::string& ticker, Date d) const;
  ReturnMatrix returns(const std::vector<std::string>& tickers,
                       Date first, Date last) const;  // last ≤ cutoff
  std::vector<IndexPoint> index_points() const;  // dates ≤ cutoff

 private:
  const MarketTables* tables_;
  Date cutoff_;
};

}  // namespace fundtrack
