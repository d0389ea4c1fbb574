#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace feekit {

/// Percent change in the outcome for a 10 percentage-point treatment change:
/// 100 * (exp(0.10 * beta) - 1).
double semiElasticity10pp(double beta);

/// Days until a deviation from the long-run relation halves:
/// ln(0.5) / ln(1 + phi), defined for -1 < phi < 0. Throws DomainError
/// otherwise (phi >= 0 non-reverting, phi <= -1 oscillatory).
double halfLife(double phi);

struct FdrResult {
  std::vector<std::string> outcomes;
  Eigen::VectorXd p_values;
  Eigen::VectorXd q_values;
  std::vector<bool> rejected_at_5pct;
};

/// Benjamini-Hochberg step-up q-values, reported in input order.
FdrResult bhFdr(const std::vector<std::string>& outcomes, const Eigen::VectorXd& p_values);

/// Two-sided 5% size, 80% power multiplier (1.96 + 0.8416).
inline constexpr double kMdeMultiplier = 2.8016;

struct PowerResult {
  Eigen::Index n = 0;
  double n_eff = 0.0;
  double sd_treatment = 0.0;
  double hac_se = 0.0;
  double mde_beta = 0.0;
  double mde_pct_10pp = 0.0;
  bool n_eff_clamped = false;  // deflation denominator was <= 0
};

/// Minimum detectable effect at 5%/80% plus a Kish-style effective sample
/// size deflated by Bartlett-weighted treatment-residual autocorrelations.
PowerResult mdePower(double hac_se, Eigen::Index n, double sd_treatment,
                     const Eigen::VectorXd& autocorr);

}  // namespace feekit
