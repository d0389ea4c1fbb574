#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "feekit/dates.hpp"
#include "feekit/rng.hpp"

namespace testutil {

inline std::filesystem::path tempDir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("feekit_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void writeFile(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
}

inline std::string readFile(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::string out((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return out;
}

/// Raw panel CSV in the canonical 16-column schema. Values beyond the
/// explicitly set ones follow simple deterministic recipes so fixtures stay
/// compact.
struct RawPanelBuilder {
  std::string header =
      "date,l2_user_tx,l1_tx_raw,posting_tx,basefee_median_gwei,tip_median_gwei,"
      "blob_fee_gwei,gas_used_total,utilization,eth_logret,cex_logvol,rvol,trends,"
      "stable_issuance,eth_price_mean,eth_price_close";
  std::vector<std::string> rows;

  void addRow(const std::string& date, double l2, double l1, double posting, double basefee,
              double tip = 2.0, double blob = 0.5, double gas = 1.0e11, double util = 0.5,
              double eth_logret = 0.001, double cex = 20.0, double rvol = 0.3,
              double trends = 50.0, double stable = 1.0e6, double pmean = 1800.0,
              double pclose = 1810.0) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%s,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g",
                  date.c_str(), l2, l1, posting, basefee, tip, blob, gas, util, eth_logret, cex,
                  rvol, trends, stable, pmean, pclose);
    rows.push_back(buf);
  }

  void addRawLine(const std::string& line) { rows.push_back(line); }

  std::string build() const {
    std::string out = header + "\n";
    for (const auto& r : rows) out += r + "\n";
    return out;
  }
};

/// Realistic-looking raw panel: adoption drifts upward, fees respond
/// negatively, demand inputs wiggle. Deterministic given the seed.
inline std::string syntheticRawPanel(int days, std::uint64_t seed,
                                     feekit::Date start = feekit::Date::fromYmd(2021, 8, 5)) {
  feekit::Rng rng(seed);
  RawPanelBuilder b;
  double share = 0.15;
  for (int t = 0; t < days; ++t) {
    share += 0.0008 + 0.01 * rng.normal();
    if (share < 0.02) share = 0.02;
    if (share > 0.95) share = 0.95;
    const double l1 = 1.0e6 * (1.0 + 0.05 * rng.normal());
    const double posting = 0.08 * l1;
    const double l2 = share / (1.0 - share) * (l1 - posting);
    const double demand = 0.5 * rng.normal();
    const double basefee = std::exp(3.6 - 1.2 * share + 0.3 * demand + 0.2 * rng.normal());
    b.addRow((start + t).toIso(), l2, l1, posting, basefee, 2.0 + 0.3 * rng.normal(),
             0.5 + 0.05 * rng.normal(), 1.0e11 * (1.0 + 0.03 * rng.normal()),
             0.5 + 0.08 * rng.normal(), 0.02 * rng.normal(), 20.0 + demand + 0.2 * rng.normal(),
             0.3 + 0.05 * rng.normal(), 50.0 + 5.0 * rng.normal(),
             1.0e6 * (1.0 + 0.1 * rng.normal()), 1800.0 * (1.0 + 0.02 * rng.normal()),
             1810.0 * (1.0 + 0.02 * rng.normal()));
  }
  return b.build();
}

}  // namespace testutil
