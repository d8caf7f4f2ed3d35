#include "fundtrack/reporting.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fundtrack/config.hpp"
#include "fundtrack/csv.hpp"
#include "json.hpp"

namespace fundtrack {

namespace {

std::string full_precision(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Restriction of both series to their common dates, preserving order.
std::pair<Series, Series> align(const Series& a, const Series& b) {
  std::map<Date, double> bmap;
  for (std::size_t i = 0; i < b.dates.size(); ++i) bmap[b.dates[i]] = b.values[i];
  Series left;
  Series right;
  for (std::size_t i = 0; i < a.dates.size(); ++i) {
    const auto it = bmap.find(a.dates[i]);
    if (it == bmap.end()) continue;
    left.dates.push_back(a.dates[i]);
    left.values.push_back(a.values[i]);
    right.dates.push_back(it->first);
    right.values.push_back(it->second);
  }
  return {std::move(left), std::move(right)};
}

void write_equity(const std::filesystem::path& path,
                  const std::vector<EquityPoint>& curve) {
  AtomicFileWriter out(path);
  out.write_line("date,equity,cash");
  for (const EquityPoint& p : curve) {
    out.write_line(format_date(p.date) + "," + format_fixed(p.equity, 2) + "," +
                   format_fixed(p.cash, 2));
  }
  out.commit();
}

void write_fills(const std::filesystem::path& path,
                 const std::vector<TradeFill>& fills) {
  AtomicFileWriter out(path);
  out.write_line("date,ticker,side,shares,ref_price,exec_price,commission");
  for (const TradeFill& f : fills) {
    out.write_line(format_date(f.date) + "," + f.ticker + "," +
                   to_string(f.side) + "," + std::to_string(f.shares) + "," +
                   format_fixed(f.reference_price, 2) + "," +
                   format_fixed(f.executed_price, 2) + "," +
                   format_fixed(f.commission, 6));
  }
  out.commit();
}

void write_holdings(const std::filesystem::path& path,
                    const std::vector<HoldingsRecord>& holdings) {
  AtomicFileWriter out(path);
  out.write_line("date,ticker,shares,weight");
  for (const HoldingsRecord& h : holdings) {
    out.write_line(format_date(h.date) + "," + h.ticker + "," +
                   std::to_string(h.shares) + "," + format_fixed(h.weight, 8));
  }
  out.commit();
}

void write_correlation(const std::filesystem::path& path,
                       const RollingCorrelation& rolling) {
  AtomicFileWriter out(path);
  out.write_line("date,correlation");
  for (std::size_t i = 0; i < rolling.dates.size(); ++i) {
    if (!rolling.values[i]) continue;  // zero-variance window
    out.write_line(format_date(rolling.dates[i]) + "," +
                   format_fixed(*rolling.values[i], 6));
  }
  out.commit();
}

void write_exposure(const std::filesystem::path& path,
                    const std::vector<ExposureRow>& rows,
                    const std::vector<std::string>& sectors) {
  AtomicFileWriter out(path);
  out.write_line("date,sector,exposure");
  for (const ExposureRow& row : rows) {
    for (std::size_t j = 0; j < sectors.size(); ++j) {
      out.write_line(format_date(row.date) + "," + sectors[j] + "," +
                     format_fixed(row.fractions[j], 6));
    }
  }
  out.commit();
}

void write_excess(const std::filesystem::path& path, const Series& excess) {
  AtomicFileWriter out(path);
  out.write_line("date,cumulative_excess_return");
  for (std::size_t i = 0; i < excess.dates.size(); ++i) {
    out.write_line(format_date(excess.dates[i]) + "," +
                   format_fixed(excess.values[i], 8));
  }
  out.commit();
}

}  // namespace

void write_run_outputs(const std::filesystem::path& dir,
                       const MarketTables& tables, const StrategyConfig& config,
                       const PipelineResult& result) {
  std::filesystem::create_directories(dir);
  const BacktestResult& bt = result.backtest;

  write_equity(dir / "equity.csv", bt.curve);
  write_fills(dir / "fills.csv", bt.fills);
  write_holdings(dir / "holdings.csv", bt.holdings);

  const Series portfolio = to_series(bt.curve);
  const Series benchmark = to_series(tables.index);
  const auto [port_aligned, bench_aligned] = align(portfolio, benchmark);

  std::optional<RollingCorrelation> rolling;
  if (port_aligned.dates.size() >= 64) {
    rolling = rolling_correlation(simple_returns(port_aligned),
                                  simple_returns(bench_aligned), 63);
  }
  write_correlation(dir / "correlation.csv",
                    rolling ? *rolling : RollingCorrelation{});

  std::set<std::string> held;
  for (const HoldingsRecord& h : bt.holdings) held.insert(h.ticker);
  std::vector<ExposureRow> exposure;
  IndustryMatrix industry;
  if (!held.empty()) {
    industry = industry_matrix({held.begin(), held.end()}, tables.instruments);
    exposure = industry_exposure_series(bt.holdings, industry, tables.prices);
  }
  write_exposure(dir / "exposure.csv", exposure, industry.sectors);

  Series excess;
  if (port_aligned.dates.size() >= 2) {
    excess = excess_curve(port_aligned, bench_aligned);
  }
  write_excess(dir / "excess.csv", excess);

  nlohmann::json j;
  j["mode"] = to_string(config.problem.mode);
  if (!bt.curve.empty()) {
    j["start"] = format_date(bt.curve.front().date);
    j["end"] = format_date(bt.curve.back().date);
    const PerformanceReport perf = performance(portfolio);
    j["total_return_pct"] = perf.total_return_pct;
    j["annualized_vol_pct"] = perf.annualized_vol_pct;
    j["max_drawdown_pct"] = perf.max_drawdown_pct;
    if (perf.sharpe) {
      j["sharpe"] = *perf.sharpe;
    } else {
      j["sharpe"] = nullptr;
    }
  }
  if (bench_aligned.dates.size() >= 2) {
    const PerformanceReport bench_perf = performance(bench_aligned);
    j["benchmark_total_return_pct"] = bench_perf.total_return_pct;
    j["excess_total_return_pct"] =
        j["total_return_pct"].get<double>() - bench_perf.total_return_pct;
  }
  if (rolling && rolling->median) {
    j["median_rolling_correlation"] = *rolling->median;
  } else {
    j["median_rolling_correlation"] = nullptr;
  }

  int executed = 0;
  double max_weight = 0.0;
  double max_sector = 0.0;
  nlohmann::json diags = nlohmann::json::array();
  for (const RebalanceDiagnostics& d : result.diagnostics) {
    if (d.skip_reason.empty()) {
      ++executed;
      max_weight = std::max(max_weight, d.max_weight);
      max_sector = std::max(max_sector, d.max_sector_exposure);
    }
    nlohmann::json row;
    row["date"] = format_date(d.date);
    row["candidates"] = d.candidate_count;
    row["universe"] = d.universe_size;
    row["solver_status"] = d.solver_status;
    row["iterations"] = d.solver_iterations;
    row["names"] = d.names_emitted;
    row["max_weight"] = d.max_weight;
    row["max_sector_exposure"] = d.max_sector_exposure;
    row["bands_relaxed"] = d.bands_relaxed;
    row["skip_reason"] = d.skip_reason;
    diags.push_back(row);
  }
  j["rebalances_scheduled"] = result.schedule.size();
  j["rebalances_executed"] = executed;
  j["max_weight"] = max_weight;
  if (config.problem.mode == ProblemMode::Beat) {
    j["sector_cap_max"] = max_sector;
  }
  j["rebalance_log"] = diags;

  AtomicFileWriter out(dir / "report.json");
  out.write(j.dump(2));
  out.write("\n");
  out.commit();
}

void write_problem_dump(const std::filesystem::path& dir,
                        const AssembledProblem& problem,
                        const std::optional<WeightVector>& weights) {
  std::filesystem::create_directories(dir);

  const auto write_matrix = [&](const char* name, const Eigen::MatrixXd& m) {
    AtomicFileWriter out(dir / name);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      std::string line;
      for (Eigen::Index jj = 0; jj < m.cols(); ++jj) {
        if (jj > 0) line += ',';
        line += full_precision(m(i, jj));
      }
      out.write_line(line);
    }
    out.commit();
  };
  const auto write_vector = [&](const char* name, const Eigen::VectorXd& v) {
    AtomicFileWriter out(dir / name);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      out.write_line(full_precision(v(i)));
    }
    out.commit();
  };

  write_matrix("P.csv", problem.qp.P);
  write_vector("q.csv", problem.qp.q);
  write_matrix("C.csv", problem.qp.C);
  write_vector("lower.csv", problem.qp.lower);
  write_vector("upper.csv", problem.qp.upper);

  AtomicFileWriter tickers(dir / "tickers.csv");
  tickers.write_line("ticker");
  for (const std::string& t : problem.tickers) tickers.write_line(t);
  tickers.commit();

  if (weights) {
    AtomicFileWriter out(dir / "weights.csv");
    out.write_line("ticker,weight");
    for (const auto& [ticker, w] : weights->entries) {
      out.write_line(ticker + "," + full_precision(w));
    }
    out.commit();
  }
}

}  // namespace fundtrack
