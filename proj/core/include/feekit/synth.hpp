#pragma once

#include <cstdint>
#include <vector>

#include "feekit/panel.hpp"

namespace feekit {

enum class ErrorProcess { kIid, kAr1 };

/// Cointegrated data-generating process mirroring the toolkit's estimands:
/// adoption follows a bounded random walk on [0,1] (reflecting boundaries),
/// log fee follows dy_t = phi*(y_{t-1} - beta*a_{t-1} - c) + psi*da_t + eps_t.
struct DgpSpec {
  Eigen::Index length = 1200;
  double beta = -1.19;        // long-run slope
  double psi = -1.0;          // short-run coefficient
  double phi = -0.06;         // adjustment speed, in (-1, 0]; 0 disables reversion
  double intercept = 3.0;     // long-run constant c
  ErrorProcess error = ErrorProcess::kIid;
  double error_rho = 0.0;     // AR(1) coefficient when error == kAr1
  double sigma_eps = 0.05;    // fee innovation sd
  double a_start = 0.4;
  double sigma_a = 0.01;      // adoption innovation sd
  Date start_date = Date::fromYmd(2021, 8, 5);
  std::vector<Eigen::Index> shock_days;  // optional pooled shock dummy
  std::uint64_t seed = 1;

  void validate() const;  // throws DomainError on invalid parameters
};

/// Deterministic given the spec; emits a panel in the constructed schema
/// (a_clean, log_basefee, d_star, regime/calendar flags, optional shock)
/// so every downstream module consumes it unchanged.
DailyPanel generateDgp(const DgpSpec& spec);

/// Random permutation of one column, dates and all other columns fixed.
/// Deterministic given the seed; seed 0 is reserved for the identity
/// permutation.
DailyPanel placeboShuffle(const DailyPanel& panel, const std::string& treatment,
                          std::uint64_t seed);

}  // namespace feekit
