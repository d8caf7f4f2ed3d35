#include "fundtrack/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "fundtrack/weighting.hpp"

namespace fundtrack {

namespace {

constexpr double kLooseResidual = 1e-6;  // acceptable when iterations run out

ExposureBand make_bands(const Eigen::VectorXd& exposure, double width) {
  const Eigen::Index s = exposure.size();
  ExposureBand band;
  band.lower.resize(s);
  band.upper.resize(s);
  for (Eigen::Index j = 0; j < s; ++j) {
    band.lower(j) = std::clamp(exposure(j) - width, 0.0, 1.0);
    band.upper(j) = std::clamp(exposure(j) + width, 0.0, 1.0);
  }
  // The sector rows partition the budget (Σ_s (Aw)_s = Σw = 1), so the band
  // box must straddle 1. Benchmark mass in sectors absent from the universe
  // can push Σupper below it; spread the deficit uniformly.
  const double hi_sum = band.upper.sum();
  if (hi_sum < 1.0 + 1e-9 && s > 0) {
    const double bump = (1.0 + 1e-6 - hi_sum) / static_cast<double>(s);
    for (Eigen::Index j = 0; j < s; ++j) {
      band.upper(j) = std::min(1.0, band.upper(j) + bump);
    }
  }
  const double lo_sum = band.lower.sum();
  if (lo_sum > 1.0 - 1e-9 && lo_sum > 0.0) {
    band.lower *= (1.0 - 1e-6) / lo_sum;
  }
  return band;
}

std::vector<const FundReport*> eligible_reports(const DataView& view,
                                                const StrategyConfig& config) {
  const std::vector<const FundReport*> reports =
      view.latest_reports(config.report_staleness_days);
  const FundScreenResult funds =
      screen_funds(view.funds(), view.cutoff(), config.screen);
  const std::set<std::string> keep(funds.fund_ids.begin(), funds.fund_ids.end());
  std::vector<const FundReport*> out;
  for (const FundReport* report : reports) {
    if (keep.count(report->fund_id) > 0) out.push_back(report);
  }
  return out;
}

}  // namespace

StrategyConfig StrategyConfig::track_defaults() {
  StrategyConfig c;
  c.problem.mode = ProblemMode::Track;
  c.problem.gamma = 0.01;
  c.low_vol_count = 0;  // no volatility sub-selection when tracking
  c.solver.eps_abs = 1e-8;
  c.solver.eps_rel = 1e-8;
  c.solver.max_iterations = 200000;
  return c;
}

StrategyConfig StrategyConfig::beat_defaults() {
  StrategyConfig c;
  c.problem.mode = ProblemMode::Beat;
  c.problem.gamma = 0.10;
  c.problem.sector_cap = 0.10;
  c.low_vol_count = 100;
  c.solver.eps_abs = 1e-8;
  c.solver.eps_rel = 1e-8;
  c.solver.max_iterations = 200000;
  return c;
}

int StrategyConfig::effective_min_universe() const {
  if (min_universe > 0) return min_universe;
  if (problem.mode == ProblemMode::Track) {
    return static_cast<int>(std::ceil(1.3 / problem.gamma));
  }
  return 0;
}

void StrategyConfig::validate() const {
  if (!(top_fraction > 0.0) || top_fraction > 1.0) {
    throw std::invalid_argument(
        "StrategyConfig::validate: top_fraction must lie in (0, 1]");
  }
  if (min_universe < 0 || low_vol_count < 0) {
    throw std::invalid_argument(
        "StrategyConfig::validate: universe sizes cannot be negative");
  }
  if (rebalance_offset_days < 0) {
    throw std::invalid_argument(
        "StrategyConfig::validate: rebalance_offset_days cannot be negative");
  }
  if (report_staleness_days <= 0) {
    throw std::invalid_argument(
        "StrategyConfig::validate: report_staleness_days must be positive");
  }
  if (cov_min_days < 2 || cov_window_days < cov_min_days) {
    throw std::invalid_argument(
        "StrategyConfig::validate: need cov_window_days >= cov_min_days >= 2");
  }
  if (vol_kernel.flat_days <= 0 || vol_kernel.decay_days < 0) {
    throw std::invalid_argument(
        "StrategyConfig::validate: volatility kernel lengths out of range");
  }
  if (screen.min_fund_age_days < 0 || screen.min_stock_age_days < 0) {
    throw std::invalid_argument(
        "StrategyConfig::validate: screen ages cannot be negative");
  }
  if (start != 0 && end != 0 && end < start) {
    throw std::invalid_argument("StrategyConfig::validate: end before start");
  }
  problem.validate();
  backtest.validate();
}

std::optional<AssembledProblem> assemble_problem_at(const MarketTables& tables,
                                                    const StrategyConfig& config,
                                                    Date t, std::string* why) {
  const auto skip = [&](const char* reason) -> std::optional<AssembledProblem> {
    if (why != nullptr) *why = reason;
    return std::nullopt;
  };

  const DataView view(tables, t);
  const std::vector<const FundReport*> reports = eligible_reports(view, config);
  if (reports.empty()) return skip("no_eligible_reports");

  std::map<std::string, const PriceBar*> day_bars;
  for (const FundReport* report : reports) {
    for (const Holding& h : report->holdings) {
      if (day_bars.count(h.ticker) == 0) day_bars[h.ticker] = view.bar(h.ticker, t);
    }
  }
  const StockScreenResult stocks =
      screen_stocks(reports, tables.instruments, day_bars, t, config.screen);
  if (stocks.tickers.empty()) return skip("no_eligible_stocks");

  // Covariance window: the last cov_window_days return observations ending
  // at the most recent trading day.
  const std::vector<Date> days = view.trading_days();
  if (static_cast<int>(days.size()) < config.cov_min_days + 1) {
    return skip("insufficient_history");
  }
  const int window_returns =
      std::min(config.cov_window_days, static_cast<int>(days.size()) - 1);
  if (window_returns < config.cov_min_days) return skip("insufficient_history");
  const Date window_first = days[days.size() - 1 - window_returns];
  const Date window_last = days.back();

  // Names must have traded through enough of the window for their covariance
  // entries to mean anything.
  std::set<std::string> candidates;
  for (const std::string& ticker : stocks.tickers) {
    int fresh = 0;
    for (std::size_t i = days.size() - 1 - window_returns; i < days.size(); ++i) {
      const PriceBar* bar = view.bar(ticker, days[i]);
      if (bar != nullptr && !bar->is_suspended) ++fresh;
      if (fresh >= config.cov_min_days) break;
    }
    if (fresh >= config.cov_min_days) candidates.insert(ticker);
  }
  if (candidates.size() < 2) return skip("insufficient_history");

  const bool track = config.problem.mode == ProblemMode::Track;
  WeightVector scores;
  try {
    scores = track ? weight_by_holding_mcap(reports, candidates)
                   : weight_by_weight_sum(reports, candidates);
  } catch (const std::invalid_argument&) {
    return skip("no_weightable_holdings");
  }

  const std::size_t k = std::max<std::size_t>(
      static_cast<std::size_t>(std::ceil(
          config.top_fraction * static_cast<double>(candidates.size()) - 1e-12)),
      static_cast<std::size_t>(std::max(config.effective_min_universe(), 1)));
  std::set<std::string> universe = select_top_count(scores, k);

  if (!track && config.low_vol_count > 0 &&
      universe.size() > static_cast<std::size_t>(config.low_vol_count)) {
    const std::vector<std::string> pool(universe.begin(), universe.end());
    const ReturnMatrix rm = view.returns(pool, window_first, window_last);
    std::map<std::string, double> vol;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      vol[pool[i]] =
          maxflat_volatility(rm.values.row(static_cast<Eigen::Index>(i)).transpose(),
                             config.vol_kernel);
    }
    universe = select_low_vol(universe, vol, config.low_vol_count);
  }

  const std::size_t n = universe.size();
  if (static_cast<double>(n) * config.problem.gamma < 1.0 - 1e-12) {
    return skip("universe_too_small");
  }

  const std::vector<std::string> tickers(universe.begin(), universe.end());
  const ReturnMatrix rm = view.returns(tickers, window_first, window_last);
  const CovarianceEstimate cov =
      oas_shrink(sample_covariance(rm.values),
                 static_cast<int>(rm.dates.size()), tickers, t);

  WeightVector holding_w;
  try {
    holding_w = track ? weight_by_holding_mcap(reports, universe)
                      : weight_by_weight_sum(reports, universe);
  } catch (const std::invalid_argument&) {
    return skip("no_weightable_holdings");
  }
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  try {
    const AlphaVector standardized = alpha_from_weights(holding_w);
    for (std::size_t i = 0; i < n; ++i) {
      alpha(static_cast<Eigen::Index>(i)) = standardized.entries.at(tickers[i]);
    }
  } catch (const std::invalid_argument&) {
    alpha.setZero();  // a flat cross-section carries no signal
  }

  const IndustryMatrix industry = industry_matrix(tickers, tables.instruments);
  const Eigen::Index s = static_cast<Eigen::Index>(industry.sectors.size());

  AssembledProblem assembled;
  assembled.date = t;
  assembled.tickers = tickers;
  assembled.sectors = industry.sectors;
  assembled.candidate_count = static_cast<int>(candidates.size());

  if (track) {
    // Regressor block: the most recent return_window_days columns, with the
    // benchmark's log returns over the same dates.
    const Eigen::Index cols = rm.values.cols();
    const Eigen::Index tail =
        std::min<Eigen::Index>(config.problem.return_window_days, cols);
    const Eigen::MatrixXd stock_r = rm.values.rightCols(tail);
    const IndexSeries index(view.index_points());
    Eigen::VectorXd bench_r(tail);
    for (Eigen::Index j = 0; j < tail; ++j) {
      const std::size_t g = static_cast<std::size_t>(cols - tail + j);
      const Date d = rm.dates[g];
      const Date d_prev = g == 0 ? window_first : rm.dates[g - 1];
      const std::optional<double> now = index.level_on_or_before(d);
      const std::optional<double> before = index.level_on_or_before(d_prev);
      if (!now || !before || *now <= 0.0 || *before <= 0.0) {
        return skip("no_index_history");
      }
      bench_r(j) = std::log(*now / *before);
    }

    const std::map<std::string, double> exposure =
        benchmark_industry_exposure(reports, tables.instruments);
    assembled.sector_exposure.resize(s);
    for (Eigen::Index j = 0; j < s; ++j) {
      const auto it = exposure.find(industry.sectors[static_cast<std::size_t>(j)]);
      assembled.sector_exposure(j) = it == exposure.end() ? 0.0 : it->second;
    }
    assembled.band_width = config.problem.band_width;
    const ExposureBand bands =
        make_bands(assembled.sector_exposure, assembled.band_width);
    assembled.qp = build_tracking_problem(alpha, cov.matrix, stock_r, bench_r,
                                          industry, bands, config.problem);
  } else {
    if (static_cast<double>(s) * config.problem.sector_cap < 1.0 - 1e-12) {
      return skip("sector_coverage");
    }
    assembled.qp = build_beat_problem(alpha, cov.matrix, industry, config.problem);
  }
  return assembled;
}

std::optional<WeightVector> solve_assembled(AssembledProblem& problem,
                                            const StrategyConfig& config,
                                            RebalanceDiagnostics* diag) {
  qp::Solution sol = qp::solve(problem.qp, config.solver);

  const bool track = config.problem.mode == ProblemMode::Track;
  if (sol.status == qp::SolveStatus::Infeasible && track &&
      !problem.bands_relaxed && problem.sector_exposure.size() > 0) {
    problem.band_width *= 2.0;
    problem.bands_relaxed = true;
    const ExposureBand bands =
        make_bands(problem.sector_exposure, problem.band_width);
    const Eigen::Index s = problem.sector_exposure.size();
    problem.qp.lower.tail(s) = bands.lower;
    problem.qp.upper.tail(s) = bands.upper;
    sol = qp::solve(problem.qp, config.solver);
  }

  const bool loose = sol.status == qp::SolveStatus::MaxIterations &&
                     sol.primal_residual <= kLooseResidual &&
                     sol.dual_residual <= kLooseResidual;
  if (diag != nullptr) {
    diag->solver_status = qp::to_string(sol.status) + (loose ? "_accepted" : "");
    diag->solver_iterations = sol.iterations;
    diag->bands_relaxed = problem.bands_relaxed;
  }
  if (sol.status != qp::SolveStatus::Optimal && !loose) return std::nullopt;

  // The solver leaves caps satisfied only to tolerance; the reported
  // portfolio must satisfy them exactly.
  const Eigen::VectorXd w =
      qp::project_capped_simplex(sol.w, config.problem.gamma);

  WeightVector out;
  out.as_of = problem.date;
  for (std::size_t i = 0; i < problem.tickers.size(); ++i) {
    const double wi = w(static_cast<Eigen::Index>(i));
    if (wi > 0.0) out.entries[problem.tickers[i]] = wi;
  }
  if (diag != nullptr) {
    diag->names_emitted = static_cast<int>(out.entries.size());
    diag->max_weight = w.size() > 0 ? w.maxCoeff() : 0.0;
    const Eigen::Index s = static_cast<Eigen::Index>(problem.sectors.size());
    if (s > 0) {
      diag->max_sector_exposure =
          (problem.qp.C.bottomRows(s) * w).maxCoeff();
    }
  }
  return out;
}

PipelineResult run_strategy(const MarketTables& tables,
                            const StrategyConfig& config) {
  config.validate();
  const TradingCalendar& calendar = tables.prices.calendar();
  if (calendar.days().empty()) {
    throw std::invalid_argument("run_strategy: no trading days");
  }
  const Date start = config.start != 0 ? config.start : calendar.days().front();
  const Date end = config.end != 0 ? config.end : calendar.days().back();
  if (end < start) {
    throw std::invalid_argument("run_strategy: end before start");
  }

  // Quarter ends whose offset rebalance day can land inside [start, end].
  std::vector<Date> quarter_ends = quarter_ends_between(
      start - config.rebalance_offset_days - 35, end);
  quarter_ends.erase(
      std::remove_if(quarter_ends.begin(), quarter_ends.end(),
                     [&](Date q) {
                       return q + config.rebalance_offset_days >
                              calendar.days().back();
                     }),
      quarter_ends.end());
  std::vector<Date> schedule = rebalance_schedule(
      calendar, quarter_ends, config.rebalance_offset_days);
  schedule.erase(std::remove_if(schedule.begin(), schedule.end(),
                                [&](Date d) { return d < start || d > end; }),
                 schedule.end());

  PipelineResult result;
  result.schedule = schedule;

  const WeightsProvider provider =
      [&](const DataView& view, Date t) -> std::optional<WeightVector> {
    RebalanceDiagnostics diag;
    diag.date = t;
    std::string why;
    std::optional<AssembledProblem> assembled =
        assemble_problem_at(tables, config, t, &why);
    if (!assembled) {
      diag.skip_reason = why;
      result.diagnostics.push_back(diag);
      return std::nullopt;
    }
    diag.candidate_count = assembled->candidate_count;
    diag.universe_size = static_cast<int>(assembled->tickers.size());
    std::optional<WeightVector> weights =
        solve_assembled(*assembled, config, &diag);
    if (!weights) diag.skip_reason = "solver_" + diag.solver_status;
    result.diagnostics.push_back(diag);
    (void)view;
    return weights;
  };

  result.backtest =
      run_backtest(tables, schedule, provider, config.backtest, start, end);
  return result;
}

PipelineResult run_track_strategy(const MarketTables& tables,
                                  const StrategyConfig& config) {
  StrategyConfig c = config;
  c.problem.mode = ProblemMode::Track;
  return run_strategy(tables, c);
}

PipelineResult run_beat_strategy(const MarketTables& tables,
                                 const StrategyConfig& config) {
  StrategyConfig c = config;
  c.problem.mode = ProblemMode::Beat;
  return run_strategy(tables, c);
}

}  // namespace fundtrack
