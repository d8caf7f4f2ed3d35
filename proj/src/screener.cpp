#include "fundtrack/screener.hpp"

#include <algorithm>
#include <stdexcept>

namespace fundtrack {

std::string normalized_fund_name(const FundMeta& fund) {
  const std::string& name = fund.name;
  const std::string& suffix = fund.share_class_suffix;
  if (suffix.empty() || name.size() < suffix.size() ||
      name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
    return name;
  }
  std::string base = name.substr(0, name.size() - suffix.size());
  if (!base.empty() && (base.back() == '_' || base.back() == ' ')) {
    base.pop_back();
  }
  return base;
}

FundScreenResult screen_funds(const std::vector<FundMeta>& funds, Date as_of,
                              const ScreenConfig& config) {
  FundScreenResult out;
  out.as_of = as_of;

  std::vector<const FundMeta*> survivors;
  for (const FundMeta& f : funds) {
    if (!f.is_open_ended) {
      out.excluded.push_back({f.fund_id, "closed_ended"});
    } else if (f.category != FundCategory::Equity &&
               f.category != FundCategory::Hybrid) {
      out.excluded.push_back({f.fund_id, "category"});
    } else if (f.is_etf_like) {
      out.excluded.push_back({f.fund_id, "etf_like"});
    } else if (f.is_excluded_type) {
      out.excluded.push_back({f.fund_id, "excluded_type"});
    } else if (f.list_date + config.min_fund_age_days > as_of) {
      out.excluded.push_back({f.fund_id, "recently_listed"});
    } else {
      survivors.push_back(&f);
    }
  }

  // Share-class dedup among survivors: per normalized name keep the smallest
  // suffix, tie-broken by fund_id so the result never depends on input order.
  std::map<std::string, const FundMeta*> keeper;
  for (const FundMeta* f : survivors) {
    const std::string key = normalized_fund_name(*f);
    const auto it = keeper.find(key);
    if (it == keeper.end()) {
      keeper.emplace(key, f);
      continue;
    }
    const FundMeta* held = it->second;
    const bool replace =
        f->share_class_suffix != held->share_class_suffix
            ? f->share_class_suffix < held->share_class_suffix
            : f->fund_id < held->fund_id;
    if (replace) it->second = f;
  }
  std::set<std::string> kept_ids;
  for (const auto& [name, f] : keeper) {
    (void)name;
    kept_ids.insert(f->fund_id);
  }
  for (const FundMeta* f : survivors) {
    if (kept_ids.count(f->fund_id)) {
      out.fund_ids.push_back(f->fund_id);
    } else {
      out.excluded.push_back({f->fund_id, "duplicate_share_class"});
    }
  }
  std::sort(out.fund_ids.begin(), out.fund_ids.end());
  return out;
}

StockScreenResult screen_stocks(const std::vector<const FundReport*>& reports,
                                const std::vector<InstrumentMeta>& instruments,
                                const std::map<std::string, const PriceBar*>& day_bars,
                                Date as_of, const ScreenConfig& config) {
  std::map<std::string, const InstrumentMeta*> meta;
  for (const InstrumentMeta& m : instruments) meta.emplace(m.ticker, &m);

  std::set<std::string> candidates;
  for (const FundReport* r : reports) {
    for (const Holding& h : r->holdings) candidates.insert(h.ticker);
  }

  StockScreenResult out;
  out.as_of = as_of;
  for (const std::string& ticker : candidates) {
    const auto it = meta.find(ticker);
    if (it == meta.end()) {
      throw std::invalid_argument("screen_stocks: held ticker " + ticker +
                                  " missing from instruments table");
    }
    const InstrumentMeta& m = *it->second;
    if (m.board != Board::AShare) {
      out.excluded.push_back({ticker, "not_a_share"});
      continue;
    }
    if (m.listing_date + config.min_stock_age_days > as_of) {
      out.excluded.push_back({ticker, "recently_listed"});
      continue;
    }
    const auto bar_it = day_bars.find(ticker);
    const PriceBar* bar = bar_it == day_bars.end() ? nullptr : bar_it->second;
    if (bar == nullptr || bar->is_suspended) {
      out.excluded.push_back({ticker, "suspended"});
      continue;
    }
    out.tickers.insert(ticker);
  }
  return out;
}

}  // namespace fundtrack
