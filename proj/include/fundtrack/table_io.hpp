#pragma once

#include <filesystem>
#include <vector>

#include "fundtrack/market_data.hpp"

namespace fundtrack {

// CSV schemas. Headers are fixed; dates are ISO-8601; booleans are 0/1;
// prices carry 2 decimals, index levels 4, fund weights 6, so that a
// write/load round trip is byte-exact for values on those grids.
//
//   prices.csv       ticker,date,close,prev_close,is_suspended,limit_up,limit_down
//   fund_reports.csv fund_id,quarter_end,publish_date,ticker,shares,market_value,weight_in_fund
//   funds.csv        fund_id,name,category,is_open_ended,is_etf_like,is_excluded_type,list_date,share_class_suffix
//   instruments.csv  ticker,listing_date,industry_code,board
//   index.csv        date,level

PriceTable load_price_table(const std::filesystem::path& path);
void write_price_table(const std::filesystem::path& path, const PriceTable& table);

std::vector<FundReport> load_fund_reports(const std::filesystem::path& path);
void write_fund_reports(const std::filesystem::path& path,
                        const std::vector<FundReport>& reports);

std::vector<FundMeta> load_funds(const std::filesystem::path& path);
void write_funds(const std::filesystem::path& path,
                 const std::vector<FundMeta>& funds);

std::vector<InstrumentMeta> load_instruments(const std::filesystem::path& path);
void write_instruments(const std::filesystem::path& path,
                       const std::vector<InstrumentMeta>& instruments);

IndexSeries load_index(const std::filesystem::path& path);
void write_index(const std::filesystem::path& path, const IndexSeries& series);

// Loads all five tables from a directory using the file names above.
MarketTables load_market_tables(const std::filesystem::path& dir);

}  // namespace fundtrack
