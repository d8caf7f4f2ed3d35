#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "fundtrack/csv.hpp"
#include "fundtrack/dates.hpp"
#include "fundtrack/market_data.hpp"
#include "fundtrack/table_io.hpp"

using namespace fundtrack;

namespace {

std::filesystem::path temp_dir(const char* tag) {
  const auto dir =
      std::filesystem::temp_directory_path() / (std::string("fundtrack_") + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("date parsing round-trips and rejects malformed input") {
  CHECK(parse_date("1970-01-01") == 0);
  CHECK(parse_date("1970-01-02") == 1);
  CHECK(parse_date("1969-12-31") == -1);
  CHECK(format_date(parse_date("2024-02-29")) == "2024-02-29");

  std::mt19937 gen(11);
  std::uniform_int_distribution<int> pick(-30000, 30000);
  for (int i = 0; i < 500; ++i) {
    const Date d = pick(gen);
    CHECK(parse_date(format_date(d)) == d);
  }

  CHECK_THROWS_AS(parse_date("2021-02-30"), std::invalid_argument);
  CHECK_THROWS_AS(parse_date("2023-13-01"), std::invalid_argument);
  CHECK_THROWS_AS(parse_date("2023-00-10"), std::invalid_argument);
  CHECK_THROWS_AS(parse_date("20230110"), std::invalid_argument);
  CHECK_THROWS_AS(parse_date("2023-1-10"), std::invalid_argument);
  CHECK_THROWS_AS(parse_date(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_date("2023-01-10x"), std::invalid_argument);
}

TEST_CASE("weekday matches a known anchor and advances cyclically") {
  CHECK(weekday(parse_date("2024-01-01")) == 0);  // a Monday
  CHECK(weekday(parse_date("2024-01-07")) == 6);
  CHECK(weekday(parse_date("1969-12-31")) == 2);  // negative serials
  for (Date d = -1000; d < 1000; ++d) {
    CHECK(weekday(d + 1) == (weekday(d) + 1) % 7);
  }
  CHECK(is_weekend(parse_date("2024-01-06")));
  CHECK_FALSE(is_weekend(parse_date("2024-01-05")));
}

TEST_CASE("quarter ends enumerate exactly the four year-inner boundaries") {
  const auto q = quarter_ends_between(parse_date("2020-01-01"),
                                      parse_date("2020-12-31"));
  REQUIRE(q.size() == 4);
  CHECK(format_date(q[0]) == "2020-03-31");
  CHECK(format_date(q[1]) == "2020-06-30");
  CHECK(format_date(q[2]) == "2020-09-30");
  CHECK(format_date(q[3]) == "2020-12-31");
  for (const Date d : q) CHECK(is_quarter_end(d));
  CHECK_FALSE(is_quarter_end(parse_date("2020-03-30")));
  // Inclusive bounds.
  CHECK(quarter_ends_between(q[0], q[0]) == std::vector<Date>{q[0]});
  CHECK(quarter_ends_between(q[0] + 1, q[1] - 1).empty());
}

TEST_CASE("rebalance schedule picks the first trading day at the offset") {
  // Trading calendar = weekdays of 2021.
  std::vector<Date> days;
  for (Date d = parse_date("2021-01-01"); d <= parse_date("2021-12-31"); ++d) {
    if (!is_weekend(d)) days.push_back(d);
  }
  const TradingCalendar cal(days);
  const auto quarters = quarter_ends_between(parse_date("2021-01-01"),
                                             parse_date("2021-09-30"));
  const auto schedule = rebalance_schedule(cal, quarters, 16);
  REQUIRE(schedule.size() == quarters.size());
  for (std::size_t i = 0; i < quarters.size(); ++i) {
    // Oracle: linear scan for the first trading day >= quarter end + 16.
    Date expect = quarters[i] + 16;
    while (is_weekend(expect)) ++expect;
    CHECK(schedule[i] == expect);
    CHECK(cal.contains(schedule[i]));
    CHECK(schedule[i] - quarters[i] >= 16);
  }
  // A quarter whose offset lands past the calendar end is an error.
  CHECK_THROWS_AS(
      rebalance_schedule(cal, {parse_date("2021-12-31")}, 16),
      std::invalid_argument);
}

TEST_CASE("calendar lookups") {
  const TradingCalendar cal({10, 12, 15});
  CHECK(cal.contains(12));
  CHECK_FALSE(cal.contains(11));
  CHECK(cal.next_on_or_after(11) == 12);
  CHECK(cal.next_on_or_after(15) == 15);
  CHECK_FALSE(cal.next_on_or_after(16).has_value());
  CHECK(cal.index_of(15) == 2);
  CHECK_THROWS_AS(cal.index_of(11), std::invalid_argument);
  CHECK_THROWS_AS(TradingCalendar({3, 3}), std::invalid_argument);
  CHECK_THROWS_AS(TradingCalendar({5, 4}), std::invalid_argument);
}

namespace {

PriceBar bar(const std::string& t, Date d, double close, double prev,
             bool susp = false) {
  PriceBar b;
  b.ticker = t;
  b.date = d;
  b.close = close;
  b.prev_close = prev;
  b.is_suspended = susp;
  b.limit_up = snap_decimal(prev * 1.10, 2);
  b.limit_down = snap_decimal(prev * 0.90, 2);
  return b;
}

}  // namespace

TEST_CASE("price table rejects duplicates and out-of-band closes") {
  CHECK_THROWS_AS(
      PriceTable::from_bars({bar("A", 5, 10.0, 10.0), bar("A", 5, 10.1, 10.0)}),
      std::invalid_argument);
  PriceBar wild = bar("A", 5, 12.0, 10.0);  // above the 10% band
  CHECK_THROWS_AS(PriceTable::from_bars({wild}), std::invalid_argument);
  wild.is_suspended = true;  // suspended rows are exempt from the band check
  CHECK_NOTHROW(PriceTable::from_bars({wild}));
  CHECK_THROWS_AS(PriceTable::from_bars({bar("A", 5, -1.0, 10.0)}),
                  std::invalid_argument);
}

TEST_CASE("price table lookups and union calendar") {
  const PriceTable t = PriceTable::from_bars({
      bar("A", 5, 10.00, 10.00),
      bar("A", 7, 10.50, 10.00),
      bar("B", 6, 20.00, 20.00),
  });
  CHECK(t.tickers() == std::vector<std::string>{"A", "B"});
  CHECK(t.calendar().days() == std::vector<Date>{5, 6, 7});
  CHECK(t.bar("A", 7)->close == 10.50);
  CHECK(t.bar("A", 6) == nullptr);
  CHECK(t.close_on_or_before("A", 6) == 10.00);
  CHECK(t.close_on_or_before("A", 4) == std::nullopt);
  CHECK(t.size() == 3);
}

TEST_CASE("log returns telescope back to the price ratio across gaps") {
  // Ticker A trades every day; B is suspended mid-window and misses a bar,
  // so its return on stale days is 0 and flagged as carried.
  std::vector<PriceBar> bars;
  std::vector<Date> days = {100, 101, 102, 103, 104, 105};
  double a = 10.0;
  double b = 50.0;
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> step(-0.04, 0.04);
  for (std::size_t i = 0; i < days.size(); ++i) {
    const double a_prev = a;
    a = snap_decimal(a * (1.0 + step(gen)), 2);
    bars.push_back(bar("A", days[i], a, a_prev));
    if (days[i] == 102) {
      bars.push_back(bar("B", days[i], b, b, true));  // suspended, carried
    } else if (days[i] != 103) {                      // no bar on 103 at all
      const double b_prev = b;
      if (i > 0) b = snap_decimal(b * (1.0 + step(gen)), 2);
      bars.push_back(bar("B", days[i], b, b_prev));
    }
  }
  const PriceTable prices = PriceTable::from_bars(bars);
  const ReturnMatrix rm = log_returns(prices, {"A", "B"}, 100, 105);
  REQUIRE(rm.dates == std::vector<Date>({101, 102, 103, 104, 105}));
  REQUIRE(rm.values.rows() == 2);

  // Reconstruction oracle: exp of the summed log returns equals the ratio of
  // the first and last traded closes.
  const double sum_a = rm.values.row(0).sum();
  CHECK(std::exp(sum_a) ==
        doctest::Approx(prices.bar("A", 105)->close / prices.bar("A", 100)->close)
            .epsilon(1e-12));
  const double sum_b = rm.values.row(1).sum();
  CHECK(std::exp(sum_b) ==
        doctest::Approx(prices.bar("B", 105)->close / prices.bar("B", 100)->close)
            .epsilon(1e-12));

  // Carried flags sit exactly on the stale days for B.
  CHECK(rm.carried(1, 0) == 0);
  CHECK(rm.carried(1, 1) == 1);  // suspended 102
  CHECK(rm.carried(1, 2) == 1);  // missing 103
  CHECK(rm.values(1, 1) == 0.0);
  CHECK(rm.values(1, 2) == 0.0);
  CHECK(rm.carried.row(0).sum() == 0);

  CHECK_THROWS_AS(log_returns(prices, {"A"}, 105, 105), std::invalid_argument);
  CHECK_THROWS_AS(log_returns(prices, {"C"}, 100, 105), std::invalid_argument);
}

TEST_CASE("tables round-trip through files byte-exactly") {
  const auto dir = temp_dir("roundtrip");

  // Random price panel on the 0.01 grid.
  std::mt19937 gen(42);
  std::uniform_real_distribution<double> step(-0.09, 0.09);
  std::vector<PriceBar> bars;
  for (int s = 0; s < 5; ++s) {
    const std::string ticker = "60000" + std::to_string(s);
    double close = 10.0 + s;
    for (Date d = 18000; d < 18040; ++d) {
      if (is_weekend(d)) continue;
      const double prev = close;
      close = snap_decimal(close * (1.0 + step(gen)), 2);
      bars.push_back(bar(ticker, d, close, prev, s == 3 && d % 7 == 0));
      if (bars.back().is_suspended) close = prev, bars.back().close = prev;
    }
  }
  const PriceTable prices = PriceTable::from_bars(bars);
  write_price_table(dir / "prices.csv", prices);
  const PriceTable loaded = load_price_table(dir / "prices.csv");
  REQUIRE(loaded.size() == prices.size());
  const auto original = prices.all_bars();
  const auto reread = loaded.all_bars();
  for (std::size_t i = 0; i < original.size(); ++i) {
    CAPTURE(i);
    CHECK(reread[i].ticker == original[i].ticker);
    CHECK(reread[i].date == original[i].date);
    CHECK(reread[i].close == original[i].close);  // bitwise, grid-snapped
    CHECK(reread[i].prev_close == original[i].prev_close);
    CHECK(reread[i].is_suspended == original[i].is_suspended);
    CHECK(reread[i].limit_up == original[i].limit_up);
    CHECK(reread[i].limit_down == original[i].limit_down);
  }
  // Writing the loaded table back reproduces the file byte for byte.
  write_price_table(dir / "prices2.csv", loaded);
  CHECK(slurp(dir / "prices.csv") == slurp(dir / "prices2.csv"));

  // Fund reports with 6-decimal weights and 2-decimal values.
  std::vector<FundReport> reports(2);
  reports[0].fund_id = "F1";
  reports[0].quarter_end = parse_date("2019-03-31");
  reports[0].publish_date = parse_date("2019-04-12");
  for (int i = 0; i < 10; ++i) {
    Holding h;
    h.ticker = "60000" + std::to_string(i % 5);
    h.shares = 100 * (i + 1);
    h.market_value = snap_decimal(12345.678 * (i + 1), 2);
    h.weight_in_fund = snap_decimal(0.0123 * (i + 1), 6);
    if (i < 5) {
      reports[0].holdings.push_back(h);
    } else {
      reports[1].holdings.push_back(h);
    }
  }
  reports[1].fund_id = "F2";
  reports[1].quarter_end = reports[0].quarter_end;
  reports[1].publish_date = parse_date("2019-04-15");
  write_fund_reports(dir / "fund_reports.csv", reports);
  const auto reports2 = load_fund_reports(dir / "fund_reports.csv");
  REQUIRE(reports2.size() == 2);
  for (int r = 0; r < 2; ++r) {
    CHECK(reports2[r].fund_id == reports[r].fund_id);
    CHECK(reports2[r].quarter_end == reports[r].quarter_end);
    CHECK(reports2[r].publish_date == reports[r].publish_date);
    REQUIRE(reports2[r].holdings.size() == reports[r].holdings.size());
    for (std::size_t i = 0; i < reports[r].holdings.size(); ++i) {
      CHECK(reports2[r].holdings[i].ticker == reports[r].holdings[i].ticker);
      CHECK(reports2[r].holdings[i].shares == reports[r].holdings[i].shares);
      CHECK(reports2[r].holdings[i].market_value ==
            reports[r].holdings[i].market_value);
      CHECK(reports2[r].holdings[i].weight_in_fund ==
            reports[r].holdings[i].weight_in_fund);
    }
  }

  // Funds, instruments, index.
  FundMeta fund;
  fund.fund_id = "F1";
  fund.name = "Alpha Fund_A";
  fund.category = FundCategory::Hybrid;
  fund.is_open_ended = true;
  fund.list_date = parse_date("2012-05-01");
  fund.share_class_suffix = "A";
  write_funds(dir / "funds.csv", {fund});
  const auto funds2 = load_funds(dir / "funds.csv");
  REQUIRE(funds2.size() == 1);
  CHECK(funds2[0].name == fund.name);
  CHECK(funds2[0].category == FundCategory::Hybrid);
  CHECK(funds2[0].share_class_suffix == "A");

  InstrumentMeta inst;
  inst.ticker = "600001";
  inst.listing_date = parse_date("2001-01-08");
  inst.industry_code = "S3";
  inst.board = Board::AShare;
  write_instruments(dir / "instruments.csv", {inst});
  const auto inst2 = load_instruments(dir / "instruments.csv");
  REQUIRE(inst2.size() == 1);
  CHECK(inst2[0].industry_code == "S3");
  CHECK(inst2[0].board == Board::AShare);

  IndexSeries index({{18001, snap_decimal(1000.1234, 4)},
                     {18002, snap_decimal(1001.9876, 4)}});
  write_index(dir / "index.csv", index);
  const IndexSeries index2 = load_index(dir / "index.csv");
  REQUIRE(index2.points().size() == 2);
  CHECK(index2.points()[1].level == index.points()[1].level);

  std::filesystem::remove_all(dir);
}

TEST_CASE("loaders report the offending file, line and value") {
  const auto dir = temp_dir("badcsv");
  {
    std::ofstream out(dir / "index.csv");
    out << "date,level\n2020-01-02,100.0\n2020-01-03,oops\n";
  }
  try {
    load_index(dir / "index.csv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("index.csv") != std::string::npos);
    CHECK(msg.find(":3") != std::string::npos);  // 1-based line of the bad row
  }
  {
    std::ofstream out(dir / "index.csv");
    out << "date,wrong_header\n";
  }
  CHECK_THROWS_AS(load_index(dir / "index.csv"), ParseError);
  {
    std::ofstream out(dir / "prices.csv");
    out << "ticker,date,close,prev_close,is_suspended,limit_up,limit_down\n"
        << "A,2020-01-02,-5.0,10.0,0,11.0,9.0\n";
  }
  CHECK_THROWS_AS(load_price_table(dir / "prices.csv"), ParseError);
  CHECK_THROWS_AS(load_market_tables(dir), ParseError);  // missing tables
  std::filesystem::remove_all(dir);
}

TEST_CASE("key-value files parse comments, types and flag unknown keys") {
  const KeyValueFile kv = KeyValueFile::from_text(
      "# comment\n"
      "alpha = 1.5\n"
      "beta = 7\n"
      "flag = true\n"
      "when = 2020-06-30\n"
      "label = hello world\n",
      "inline");
  CHECK(kv.get_number("alpha") == 1.5);
  CHECK(kv.get_int("beta") == 7);
  CHECK(kv.get_flag("flag", false));
  CHECK(kv.get_date("when") == parse_date("2020-06-30"));
  CHECK(kv.get_string("label") == "hello world");
  CHECK(kv.get_number("absent", 2.5) == 2.5);
  const auto unused = kv.unused_keys();
  CHECK(unused.empty());

  const KeyValueFile kv2 = KeyValueFile::from_text("a = 1\nzz = 2\n", "inline");
  CHECK(kv2.get_int("a") == 1);
  CHECK(kv2.unused_keys() == std::vector<std::string>{"zz"});
  CHECK_THROWS_AS(kv2.get_number("zz_missing"), ParseError);
  CHECK_THROWS_AS(KeyValueFile::from_text("a = 1\na = 2\n", "dup"), ParseError);
  CHECK_THROWS_AS(KeyValueFile::from_text("no_equals\n", "bad"), ParseError);
}

TEST_CASE("atomic writer never leaves a temp file behind") {
  const auto dir = temp_dir("atomic");
  AtomicFileWriter w(dir / "out.txt");
  w.write_line("hello");
  w.commit();
  CHECK(slurp(dir / "out.txt") == "hello\n");
  int entries = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 1);
  CHECK_THROWS_AS(w.commit(), std::logic_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("data view truncates every accessor at the cutoff") {
  MarketTables tables;
  std::vector<PriceBar> bars;
  for (Date d = 200; d < 260; ++d) {
    if (!is_weekend(d)) bars.push_back(bar("A", d, 10.0, 10.0));
  }
  tables.prices = PriceTable::from_bars(bars);
  InstrumentMeta meta;
  meta.ticker = "A";
  meta.listing_date = 0;
  meta.industry_code = "S1";
  tables.instruments = {meta};
  std::vector<IndexPoint> pts;
  for (Date d = 200; d < 260; ++d) {
    if (!is_weekend(d)) pts.push_back({d, 100.0 + d});
  }
  tables.index = IndexSeries(pts);

  FundReport early;
  early.fund_id = "F1";
  early.quarter_end = 205;
  early.publish_date = 220;
  early.holdings.push_back({"A", 100, 1000.0, 0.1});
  FundReport late = early;
  late.quarter_end = 230;
  late.publish_date = 245;
  tables.reports = {early, late};

  const Date cutoff = 240;
  const DataView view(tables, cutoff);
  CHECK(view.cutoff() == cutoff);
  for (const Date d : view.trading_days()) CHECK(d <= cutoff);
  CHECK(view.bar("A", 241) == nullptr);
  CHECK(view.bar("A", 239) != nullptr);
  CHECK(view.close_on_or_before("A", 2000) == 10.0);  // clamped to cutoff
  for (const auto& p : view.index_points()) CHECK(p.date <= cutoff);
  CHECK_THROWS_AS(view.returns({"A"}, 200, 250), std::invalid_argument);

  // Only the published-by-cutoff report is visible; staleness filters it.
  const auto latest = view.latest_reports(365);
  REQUIRE(latest.size() == 1);
  CHECK(latest[0]->quarter_end == 205);  // the late one publishes at 245
  CHECK(view.latest_reports(10).empty());  // 205 is stale at 240

  const DataView view2(tables, 250);
  const auto latest2 = view2.latest_reports(365);
  REQUIRE(latest2.size() == 1);
  CHECK(latest2[0]->quarter_end == 230);  // newest published report wins
}
