#ifndef EXLASSO_TESTS_PANEL_FIXTURE_HPP
#define EXLASSO_TESTS_PANEL_FIXTURE_HPP

// Helpers for constructing synthetic daily price panels, either as in-memory
// return panels or as CSV files on disk, for the backtest and CLI tests.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "exlasso/backtest.hpp"
#include "exlasso/synth.hpp"

namespace testor {

//! Monotone fake ISO dates: a flat calendar of 28-day months so string order
//! matches sequence order without real calendar arithmetic.
inline std::string fake_date(long d) {
  const int year = static_cast<int>(2020 + d / 336);
  const int month = static_cast<int>(1 + (d % 336) / 28);
  const int day = static_cast<int>(1 + d % 28);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return std::string(buf);
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

struct PanelSpec {
  long n_price_dates = 130;
  int sectors = 3;
  int assets_per_sector = 4;
  unsigned seed = 1;
  double noise = 1e-4;       // index residual scale
  double asset_vol = 0.01;   // daily asset return scale
};

//! In-memory return panel whose index is a sparse all-sector combination:
//! one driver asset per sector with weight 1/sectors, plus tiny noise.
inline exlasso::ReturnPanel make_driver_panel(const PanelSpec& ps) {
  exlasso::SynthRng rng(ps.seed);
  const long n_ret = ps.n_price_dates - 1;
  const int n_assets = ps.sectors * ps.assets_per_sector;

  exlasso::ReturnPanel panel;
  panel.R.resize(n_ret, n_assets);
  panel.y.resize(n_ret);
  for (long t = 0; t < n_ret; ++t) {
    panel.dates.push_back(fake_date(t + 1));
    for (int j = 0; j < n_assets; ++j) panel.R(t, j) = ps.asset_vol * rng.normal();
    double y = ps.noise * rng.normal();
    for (int s = 0; s < ps.sectors; ++s)
      y += panel.R(t, s * ps.assets_per_sector) / ps.sectors;  // driver = first in sector
    panel.y[t] = y;
  }
  for (int s = 0; s < ps.sectors; ++s) {
    panel.sector_names.push_back("SEC" + std::to_string(s));
    for (int a = 0; a < ps.assets_per_sector; ++a) {
      panel.tickers.push_back("T" + std::to_string(s) + "_" + std::to_string(a));
      panel.sector_of.push_back(s);
    }
  }
  return panel;
}

//! Writes the same construction to price/index/sector CSVs (prices compound
//! the returns from 100), returning the three file paths.
struct PanelFiles {
  std::filesystem::path prices;
  std::filesystem::path index;
  std::filesystem::path sectors;
};

inline PanelFiles write_driver_panel_csvs(const std::filesystem::path& dir, const PanelSpec& ps) {
  const exlasso::ReturnPanel panel = make_driver_panel(ps);
  std::filesystem::create_directories(dir);

  std::string prices = "date,ticker,close\n";
  for (std::size_t j = 0; j < panel.tickers.size(); ++j) {
    double p = 100.0;
    prices += fake_date(0) + "," + panel.tickers[j] + "," + std::to_string(p) + "\n";
    for (long t = 0; t < panel.days(); ++t) {
      p *= 1.0 + panel.R(t, static_cast<exlasso::Index>(j));
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", p);
      prices += panel.dates[static_cast<std::size_t>(t)] + "," + panel.tickers[j] + "," + buf +
                "\n";
    }
  }
  std::string index = "date,close\n";
  double p = 1000.0;
  index += fake_date(0) + "," + std::to_string(p) + "\n";
  for (long t = 0; t < panel.days(); ++t) {
    p *= 1.0 + panel.y[t];
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", p);
    index += panel.dates[static_cast<std::size_t>(t)] + "," + buf + "\n";
  }
  std::string sectors = "ticker,sector\n";
  for (std::size_t j = 0; j < panel.tickers.size(); ++j)
    sectors += panel.tickers[j] + "," +
               panel.sector_names[static_cast<std::size_t>(panel.sector_of[j])] + "\n";

  PanelFiles files{dir / "prices.csv", dir / "index.csv", dir / "sectors.csv"};
  write_file(files.prices, prices);
  write_file(files.index, index);
  write_file(files.sectors, sectors);
  return files;
}

}  // namespace testor

#endif  // EXLASSO_TESTS_PANEL_FIXTURE_HPP
