#ifndef EXLASSO_BACKTEST_HPP
#define EXLASSO_BACKTEST_HPP

//! Rolling-window index-tracking experiment on daily price data.
//!
//! Pipeline: ingest long-format price/index/sector CSVs into a clean return
//! panel (trading calendar taken from the index file, assets with more than
//! 10% missing prices dropped, remaining gaps forward-filled with the leading
//! gap backfilled, simple returns, optional risk-free adjustment), then roll
//! non-overlapping holding periods: at each rebalance the tracking portfolio
//! is refit on the trailing window with the regularization level chosen by
//! contiguous-block cross validation, held fixed over the next holding block,
//! and scored in and out of sample.  Windows are processed sequentially in
//! date order so reports are deterministic.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "exlasso/ppdna.hpp"
#include "exlasso/problem.hpp"

namespace exlasso {

struct ReturnPanel {
  std::vector<std::string> dates;    // return dates (one fewer than price dates)
  std::vector<std::string> tickers;  // surviving assets, sorted by (sector, ticker)
  std::vector<std::string> sector_names;  // group g -> sector label, sorted
  std::vector<Index> sector_of;           // asset column -> group index
  Matrix R;                               // return matrix, days x assets
  Vector y;                               // index return series

  Index days() const { return R.rows(); }
  Index assets() const { return R.cols(); }

  //! Sector partition over asset columns with unit weights.
  GroupPartition partition() const {
    std::vector<std::vector<Index>> groups(sector_names.size());
    for (Index j = 0; j < assets(); ++j) groups[static_cast<std::size_t>(sector_of[j])].push_back(j);
    return GroupPartition(std::move(groups), Vector::Ones(assets()));
  }
};

//! Pluggable window fit: maps (R_T, y_T, sector partition, lambda) to a
//! portfolio vector.  The default solves the exclusive-lasso least-squares
//! model with the proximal-point solver.
using FitHook = std::function<Vector(const Matrix&, const Vector&, const GroupPartition&, double)>;

struct BacktestConfig {
  Index window = 90;    // trailing fit window, in return days
  Index holding = 10;   // non-overlapping holding block
  int folds = 9;        // contiguous cross-validation blocks inside the window
  std::vector<double> lambda_grid;  // empty: per-window scaled default grid
  double select_threshold = 1e-8;   // |x_i| above this counts as selected
  double kkt_tol = 1e-6;
  FitHook fit;  // empty: built-in solver
};

struct WindowRecord {
  std::string rebalance_date;  // first holding day
  double lambda = 0.0;
  Index support_size = 0;
  std::vector<Index> sector_counts;  // selected names per sector
  double in_sample_rmse = 0.0;
  double out_sample_rmse = 0.0;
};

struct BacktestReport {
  std::vector<WindowRecord> windows;
  std::vector<std::string> sector_names;
  std::vector<double> sector_percent;  // share of all selections, sums to 100
  std::vector<std::string> daily_dates;  // stitched holding days
  std::vector<double> portfolio_returns;
  std::vector<double> index_returns;
  double out_sample_rmse = 0.0;  // over all stitched holding days
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

//! Reads a CSV with the given header, returning the data rows split into
//! fields.  Blank lines are skipped.
inline std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                                      const std::string& header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV file: " + path);
  strip_cr(line);
  if (line != header)
    throw std::runtime_error("bad CSV header in " + path + ": expected '" + header + "', got '" +
                             line + "'");
  const std::size_t n_fields = split_csv_line(header).size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != n_fields)
      throw std::runtime_error("malformed CSV row in " + path + ": '" + line + "'");
    rows.push_back(std::move(fields));
  }
  return rows;
}

inline double parse_price(const std::string& s, const std::string& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("malformed number '" + s + "' in " + path);
  }
}

//! Contiguous fold boundaries: fold f covers [bounds[f], bounds[f+1]).
inline std::vector<Index> fold_bounds(Index window, int folds) {
  std::vector<Index> b(static_cast<std::size_t>(folds) + 1);
  for (int f = 0; f <= folds; ++f)
    b[static_cast<std::size_t>(f)] = window * f / folds;
  return b;
}

}  // namespace detail

//! Builds the clean return panel from long-format CSVs.  The trading calendar
//! is the date column of the index file; price rows outside it are ignored.
inline ReturnPanel ingest_prices(const std::string& price_csv, const std::string& index_csv,
                                 const std::string& sector_csv, double r_c = 0.0) {
  const auto index_rows = detail::read_csv(index_csv, "date,close");
  if (index_rows.size() < 2)
    throw std::runtime_error("index series needs at least two dates: " + index_csv);
  std::vector<std::string> calendar;
  Vector index_close(static_cast<Index>(index_rows.size()));
  std::map<std::string, Index> date_pos;
  for (std::size_t i = 0; i < index_rows.size(); ++i) {
    const std::string& d = index_rows[i][0];
    if (i > 0 && !(calendar.back() < d))
      throw std::runtime_error("index dates must be strictly increasing: " + index_csv);
    calendar.push_back(d);
    index_close[static_cast<Index>(i)] = detail::parse_price(index_rows[i][1], index_csv);
    date_pos.emplace(d, static_cast<Index>(i));
  }
  const Index n_dates = static_cast<Index>(calendar.size());

  std::map<std::string, std::string> sector_map;
  for (const auto& row : detail::read_csv(sector_csv, "ticker,sector"))
    sector_map[row[0]] = row[1];

  std::map<std::string, std::vector<std::optional<double>>> prices;
  for (const auto& row : detail::read_csv(price_csv, "date,ticker,close")) {
    const auto it = date_pos.find(row[0]);
    if (it == date_pos.end()) continue;  // off-calendar observation
    auto& series = prices[row[1]];
    if (series.empty()) series.resize(static_cast<std::size_t>(n_dates));
    series[static_cast<std::size_t>(it->second)] = detail::parse_price(row[2], price_csv);
  }

  // Drop assets with strictly more than 10% of the calendar missing, fill the
  // rest (forward fill; the leading gap copies the first observation).
  struct CleanAsset {
    std::string ticker;
    std::string sector;
    Vector series;
  };
  std::vector<CleanAsset> kept;
  for (auto& [ticker, series] : prices) {
    Index missing = 0;
    for (const auto& p : series)
      if (!p.has_value()) ++missing;
    if (missing * 10 > n_dates) continue;
    const auto sec = sector_map.find(ticker);
    if (sec == sector_map.end())
      throw std::runtime_error("ticker missing from sector map: " + ticker);
    Vector filled(n_dates);
    std::optional<double> last;
    for (Index t = 0; t < n_dates; ++t) {
      if (series[static_cast<std::size_t>(t)].has_value())
        last = series[static_cast<std::size_t>(t)];
      filled[t] = last.value_or(std::numeric_limits<double>::quiet_NaN());
    }
    for (Index t = n_dates - 2; t >= 0; --t) {  // leading backfill
      if (std::isnan(filled[t])) filled[t] = filled[t + 1];
    }
    if (std::isnan(filled[n_dates - 1]))
      throw std::runtime_error("asset has no observations on the calendar: " + ticker);
    kept.push_back({ticker, sec->second, std::move(filled)});
  }
  if (kept.empty()) throw std::runtime_error("no assets survive cleaning");

  std::sort(kept.begin(), kept.end(), [](const CleanAsset& a, const CleanAsset& b) {
    return std::tie(a.sector, a.ticker) < std::tie(b.sector, b.ticker);
  });

  ReturnPanel panel;
  panel.dates.assign(calendar.begin() + 1, calendar.end());
  const Index n_assets = static_cast<Index>(kept.size());
  panel.R.resize(n_dates - 1, n_assets);
  panel.y.resize(n_dates - 1);
  for (Index t = 1; t < n_dates; ++t)
    panel.y[t - 1] = index_close[t] / index_close[t - 1] - 1.0 - r_c;
  for (Index j = 0; j < n_assets; ++j) {
    const CleanAsset& a = kept[static_cast<std::size_t>(j)];
    panel.tickers.push_back(a.ticker);
    for (Index t = 1; t < n_dates; ++t)
      panel.R(t - 1, j) = a.series[t] / a.series[t - 1] - 1.0 - r_c;
    if (panel.sector_names.empty() || panel.sector_names.back() != a.sector)
      panel.sector_names.push_back(a.sector);
    panel.sector_of.push_back(static_cast<Index>(panel.sector_names.size()) - 1);
  }
  return panel;
}

//! Fits the tracking portfolio on the trailing window ending just before
//! return day T.
inline Vector fit_window(const ReturnPanel& panel, Index T, double lambda,
                         const BacktestConfig& cfg = {}) {
  if (T < cfg.window || T > panel.days())
    throw std::invalid_argument("fit_window: window not inside panel");
  const Matrix R_T = panel.R.middleRows(T - cfg.window, cfg.window);
  const Vector y_T = panel.y.segment(T - cfg.window, cfg.window);
  const GroupPartition part = panel.partition();
  if (cfg.fit) return cfg.fit(R_T, y_T, part, lambda);
  PpdnaConfig pc;
  pc.kkt_tol = cfg.kkt_tol;
  return ppdna_solve(make_problem(R_T, LossModel::least_squares(y_T), lambda, part), pc).x;
}

//! Default per-window grid: 20 logarithmically spaced multiples of the data
//! scale ||R_T' y_T||_inf, spanning six decades below it.
inline std::vector<double> default_lambda_grid(const Matrix& R_T, const Vector& y_T) {
  const double scale = (R_T.transpose() * y_T).cwiseAbs().maxCoeff();
  std::vector<double> grid;
  for (int i = 0; i < 20; ++i)
    grid.push_back(scale * std::pow(10.0, -6.0 + 6.0 * i / 19.0));
  return grid;
}

//! Chooses lambda by contiguous-block cross validation on the window ending
//! just before return day T: mean validation MSE across folds, ties resolved
//! toward the smaller lambda.
inline double cross_validate_lambda(const ReturnPanel& panel, Index T, std::vector<double> grid,
                                    const BacktestConfig& cfg = {}) {
  if (grid.empty()) throw std::invalid_argument("cross_validate_lambda: empty grid");
  if (cfg.folds < 2) throw std::invalid_argument("cross_validate_lambda: need at least 2 folds");
  if (T < cfg.window || T > panel.days())
    throw std::invalid_argument("cross_validate_lambda: window not inside panel");
  const Matrix R_T = panel.R.middleRows(T - cfg.window, cfg.window);
  const Vector y_T = panel.y.segment(T - cfg.window, cfg.window);
  const GroupPartition part = panel.partition();
  const auto bounds = detail::fold_bounds(cfg.window, cfg.folds);

  const auto fit = [&](const Matrix& R, const Vector& y, double lambda) {
    if (cfg.fit) return cfg.fit(R, y, part, lambda);
    PpdnaConfig pc;
    pc.kkt_tol = cfg.kkt_tol;
    return ppdna_solve(make_problem(R, LossModel::least_squares(y), lambda, part), pc).x;
  };

  std::sort(grid.begin(), grid.end());
  double best_lambda = grid.front();
  double best_mse = std::numeric_limits<double>::infinity();
  for (const double lambda : grid) {
    double mse_sum = 0.0;
    for (int f = 0; f < cfg.folds; ++f) {
      const Index lo = bounds[static_cast<std::size_t>(f)];
      const Index hi = bounds[static_cast<std::size_t>(f) + 1];
      const Index n_train = cfg.window - (hi - lo);
      Matrix R_train(n_train, R_T.cols());
      Vector y_train(n_train);
      R_train.topRows(lo) = R_T.topRows(lo);
      y_train.head(lo) = y_T.head(lo);
      R_train.bottomRows(n_train - lo) = R_T.bottomRows(cfg.window - hi);
      y_train.tail(n_train - lo) = y_T.tail(cfg.window - hi);
      const Vector x = fit(R_train, y_train, lambda);
      mse_sum += (R_T.middleRows(lo, hi - lo) * x - y_T.segment(lo, hi - lo)).squaredNorm() /
                 static_cast<double>(hi - lo);
    }
    const double mse = mse_sum / cfg.folds;
    if (mse < best_mse) {  // strict: ties keep the smaller lambda
      best_mse = mse;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

inline BacktestReport run_backtest(const ReturnPanel& panel, const BacktestConfig& cfg = {}) {
  if (cfg.window < cfg.folds || cfg.holding < 1)
    throw std::invalid_argument("run_backtest: bad window/holding configuration");
  if (panel.days() < cfg.window + cfg.holding)
    throw std::invalid_argument("run_backtest: panel shorter than window + holding");

  BacktestReport rep;
  rep.sector_names = panel.sector_names;
  std::vector<Index> total_counts(panel.sector_names.size(), 0);
  double out_sq_sum = 0.0;
  Index out_days = 0;

  for (Index T = cfg.window; T + cfg.holding <= panel.days(); T += cfg.holding) {
    // no look-ahead: the fit window [T - window, T) precedes every holding day
    if (!(panel.dates[static_cast<std::size_t>(T - 1)] < panel.dates[static_cast<std::size_t>(T)]))
      throw std::logic_error("run_backtest: calendar ordering violated");

    const Matrix R_T = panel.R.middleRows(T - cfg.window, cfg.window);
    const Vector y_T = panel.y.segment(T - cfg.window, cfg.window);
    const std::vector<double> grid =
        cfg.lambda_grid.empty() ? default_lambda_grid(R_T, y_T) : cfg.lambda_grid;
    const double lambda = cross_validate_lambda(panel, T, grid, cfg);
    const Vector x = fit_window(panel, T, lambda, cfg);

    WindowRecord rec;
    rec.rebalance_date = panel.dates[static_cast<std::size_t>(T)];
    rec.lambda = lambda;
    rec.sector_counts.assign(panel.sector_names.size(), 0);
    for (Index j = 0; j < panel.assets(); ++j) {
      if (std::abs(x[j]) > cfg.select_threshold) {
        ++rec.support_size;
        ++rec.sector_counts[static_cast<std::size_t>(panel.sector_of[j])];
      }
    }
    for (std::size_t g = 0; g < total_counts.size(); ++g) total_counts[g] += rec.sector_counts[g];

    rec.in_sample_rmse = std::sqrt((R_T * x - y_T).squaredNorm() / cfg.window);
    const Matrix R_hold = panel.R.middleRows(T, cfg.holding);
    const Vector y_hold = panel.y.segment(T, cfg.holding);
    const Vector port = R_hold * x;
    rec.out_sample_rmse = std::sqrt((port - y_hold).squaredNorm() / cfg.holding);
    rep.windows.push_back(std::move(rec));

    for (Index t = 0; t < cfg.holding; ++t) {
      rep.daily_dates.push_back(panel.dates[static_cast<std::size_t>(T + t)]);
      rep.portfolio_returns.push_back(port[t]);
      rep.index_returns.push_back(y_hold[t]);
    }
    out_sq_sum += (port - y_hold).squaredNorm();
    out_days += cfg.holding;
  }

  Index total = 0;
  for (Index c : total_counts) total += c;
  rep.sector_percent.assign(total_counts.size(), 0.0);
  if (total > 0) {
    for (std::size_t g = 0; g < total_counts.size(); ++g)
      rep.sector_percent[g] = 100.0 * static_cast<double>(total_counts[g]) /
                              static_cast<double>(total);
  }
  rep.out_sample_rmse = out_days > 0 ? std::sqrt(out_sq_sum / static_cast<double>(out_days)) : 0.0;
  return rep;
}

}  // namespace exlasso

#endif  // EXLASSO_BACKTEST_HPP
