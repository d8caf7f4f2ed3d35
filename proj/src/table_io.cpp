#include "fundtrack/table_io.hpp"

#include <algorithm>
#include <map>

#include "fundtrack/csv.hpp"

namespace fundtrack {

namespace {

constexpr const char* kPricesHeader =
    "ticker,date,close,prev_close,is_suspended,limit_up,limit_down";
constexpr const char* kReportsHeader =
    "fund_id,quarter_end,publish_date,ticker,shares,market_value,weight_in_fund";
constexpr const char* kFundsHeader =
    "fund_id,name,category,is_open_ended,is_etf_like,is_excluded_type,list_date,"
    "share_class_suffix";
constexpr const char* kInstrumentsHeader = "ticker,listing_date,industry_code,board";
constexpr const char* kIndexHeader = "date,level";

}  // namespace

PriceTable load_price_table(const std::filesystem::path& path) {
  CsvReader in(path, kPricesHeader);
  std::vector<PriceBar> bars;
  std::vector<std::string> f;
  while (in.next_row(f)) {
    PriceBar b;
    b.ticker = in.str(f, 0);
    b.date = in.date(f, 1);
    b.close = in.num(f, 2);
    b.prev_close = in.num(f, 3);
    b.is_suspended = in.flag(f, 4);
    b.limit_up = in.num(f, 5);
    b.limit_down = in.num(f, 6);
    if (!b.is_suspended && (b.close <= 0.0 || b.prev_close <= 0.0)) {
      throw ParseError(path.string() + ":" + std::to_string(in.line()) +
                       ": nonpositive price on a non-suspended day");
    }
    bars.push_back(std::move(b));
  }
  try {
    return PriceTable::from_bars(std::move(bars));
  } catch (const std::invalid_argument& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_price_table(const std::filesystem::path& path, const PriceTable& table) {
  AtomicFileWriter out(path);
  out.write_line(kPricesHeader);
  for (const PriceBar& b : table.all_bars()) {
    out.write_line(b.ticker + "," + format_date(b.date) + "," +
                   format_fixed(b.close, 2) + "," + format_fixed(b.prev_close, 2) +
                   "," + (b.is_suspended ? "1" : "0") + "," +
                   format_fixed(b.limit_up, 2) + "," + format_fixed(b.limit_down, 2));
  }
  out.commit();
}

std::vector<FundReport> load_fund_reports(const std::filesystem::path& path) {
  CsvReader in(path, kReportsHeader);
  // Rows for one report are expected contiguous but keyed grouping also
  // accepts interleaving; order inside a report follows file order.
  std::map<std::pair<std::string, Date>, FundReport> grouped;
  std::vector<std::pair<std::string, Date>> order;
  std::vector<std::string> f;
  while (in.next_row(f)) {
    const std::string fund_id = in.str(f, 0);
    const Date quarter_end = in.date(f, 1);
    const Date publish_date = in.date(f, 2);
    Holding h;
    h.ticker = in.str(f, 3);
    h.shares = in.integer(f, 4);
    h.market_value = in.num(f, 5);
    h.weight_in_fund = in.num(f, 6);
    if (h.weight_in_fund < 0.0 || h.weight_in_fund > 1.0) {
      throw ParseError(path.string() + ":" + std::to_string(in.line()) +
                       ": weight_in_fund outside [0,1]");
    }
    const auto key = std::make_pair(fund_id, quarter_end);
    auto it = grouped.find(key);
    if (it == grouped.end()) {
      FundReport r;
      r.fund_id = fund_id;
      r.quarter_end = quarter_end;
      r.publish_date = publish_date;
      it = grouped.emplace(key, std::move(r)).first;
      order.push_back(key);
    } else if (it->second.publish_date != publish_date) {
      throw ParseError(path.string() + ":" + std::to_string(in.line()) +
                       ": publish_date differs within report " + fund_id + "/" +
                       format_date(quarter_end));
    }
    it->second.holdings.push_back(std::move(h));
    if (it->second.holdings.size() > 10) {
      throw ParseError(path.string() + ":" + std::to_string(in.line()) +
                       ": more than 10 holdings for report " + fund_id + "/" +
                       format_date(quarter_end));
    }
  }
  std::vector<FundReport> out;
  out.reserve(order.size());
  for (const auto& key : order) {
    FundReport& r = grouped.at(key);
    try {
      r.validate();
    } catch (const std::invalid_argument& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_fund_reports(const std::filesystem::path& path,
                        const std::vector<FundReport>& reports) {
  AtomicFileWriter out(path);
  out.write_line(kReportsHeader);
  for (const FundReport& r : reports) {
    for (const Holding& h : r.holdings) {
      out.write_line(r.fund_id + "," + format_date(r.quarter_end) + "," +
                     format_date(r.publish_date) + "," + h.ticker + "," +
                     std::to_string(h.shares) + "," +
                     format_fixed(h.market_value, 2) + "," +
                     format_fixed(h.weight_in_fund, 6));
    }
  }
  out.commit();
}

std::vector<FundMeta> load_funds(const std::filesystem::path& path) {
  CsvReader in(path, kFundsHeader);
  std::vector<FundMeta> out;
  std::vector<std::string> f;
  while (in.next_row(f)) {
    FundMeta m;
    m.fund_id = in.str(f, 0);
    m.name = in.str(f, 1);
    try {
      m.category = fund_category_from_string(f[2]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(path.string() + ":" + std::to_string(in.line()) + ": " +
                       e.what());
    }
    m.is_open_ended = in.flag(f, 3);
    m.is_etf_like = in.flag(f, 4);
    m.is_excluded_type = in.flag(f, 5);
    m.list_date = in.date(f, 6);
    m.share_class_suffix = f[7];  // may be empty
    out.push_back(std::move(m));
  }
  return out;
}

void write_funds(const std::filesystem::path& path,
                 const std::vector<FundMeta>& funds) {
  AtomicFileWriter out(path);
  out.write_line(kFundsHeader);
  for (const FundMeta& m : funds) {
    out.write_line(m.fund_id + "," + m.name + "," + to_string(m.category) + "," +
                   (m.is_open_ended ? "1" : "0") + "," +
                   (m.is_etf_like ? "1" : "0") + "," +
                   (m.is_excluded_type ? "1" : "0") + "," +
                   format_date(m.list_date) + "," + m.share_class_suffix);
  }
  out.commit();
}

std::vector<InstrumentMeta> load_instruments(const std::filesystem::path& path) {
  CsvReader in(path, kInstrumentsHeader);
  std::vector<InstrumentMeta> out;
  std::vector<std::string> f;
  while (in.next_row(f)) {
    InstrumentMeta m;
    m.ticker = in.str(f, 0);
    m.listing_date = in.date(f, 1);
    m.industry_code = in.str(f, 2);
    try {
      m.board = board_from_string(f[3]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(path.string() + ":" + std::to_string(in.line()) + ": " +
                       e.what());
    }
    out.push_back(std::move(m));
  }
  return out;
}

void write_instruments(const std::filesystem::path& path,
                       const std::vector<InstrumentMeta>& instruments) {
  AtomicFileWriter out(path);
  out.write_line(kInstrumentsHeader);
  for (const InstrumentMeta& m : instruments) {
    out.write_line(m.ticker + "," + format_date(m.listing_date) + "," +
                   m.industry_code + "," + to_string(m.board));
  }
  out.commit();
}

IndexSeries load_index(const std::filesystem::path& path) {
  CsvReader in(path, kIndexHeader);
  std::vector<IndexPoint> points;
  std::vector<std::string> f;
  while (in.next_row(f)) {
    IndexPoint p;
    p.date = in.date(f, 0);
    p.level = in.num(f, 1);
    points.push_back(p);
  }
  try {
    return IndexSeries(std::move(points));
  } catch (const std::invalid_argument& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_index(const std::filesystem::path& path, const IndexSeries& series) {
  AtomicFileWriter out(path);
  out.write_line(kIndexHeader);
  for (const IndexPoint& p : series.points()) {
    out.write_line(format_date(p.date) + "," + format_fixed(p.level, 4));
  }
  out.commit();
}

MarketTables load_market_tables(const std::filesystem::path& dir) {
  MarketTables t;
  t.instruments = load_instruments(dir / "instruments.csv");
  t.prices = load_price_table(dir / "prices.csv");
  t.funds = load_funds(dir / "funds.csv");
  t.reports = load_fund_reports(dir / "fund_reports.csv");
  t.index = load_index(dir / "index.csv");
  std::sort(t.instruments.begin(), t.instruments.end(),
            [](const InstrumentMeta& a, const InstrumentMeta& b) {
              return a.ticker < b.ticker;
            });
  return t;
}

}  // namespace fundtrack
