#include "feekit/inference.hpp"

#include <algorithm>
#include <cmath>

#include "feekit/errors.hpp"

namespace feekit {

double semiElasticity10pp(double beta) {
  if (!std::isfinite(beta)) throw DomainError("semi-elasticity: beta must be finite");
  return 100.0 * (std::exp(0.10 * beta) - 1.0);
}

double halfLife(double phi) {
  if (phi >= 0.0) throw DomainError("half-life undefined: phi >= 0 (non-reverting)");
  if (phi <= -1.0) throw DomainError("half-life undefined: phi <= -1 (oscillatory)");
  return std::log(0.5) / std::log(1.0 + phi);
}

FdrResult bhFdr(const std::vector<std::string>& outcomes, const Eigen::VectorXd& p_values) {
  const Eigen::Index m = p_values.size();
  if (Eigen::Index(outcomes.size()) != m) throw AlignmentError("bh: outcomes/p length mismatch");
  for (Eigen::Index i = 0; i < m; ++i) {
    if (std::isnan(p_values[i])) throw DomainError("bh: NaN p-value for '" + outcomes[size_t(i)] + "'");
    if (p_values[i] < 0.0 || p_values[i] > 1.0) {
      throw DomainError("bh: p-value outside [0,1] for '" + outcomes[size_t(i)] + "'");
    }
  }
  std::vector<Eigen::Index> order(static_cast<size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) order[size_t(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return p_values[a] < p_values[b]; });

  FdrResult r;
  r.outcomes = outcomes;
  r.p_values = p_values;
  r.q_values.resize(m);
  r.rejected_at_5pct.assign(size_t(m), false);
  double running_min = 1.0;
  for (Eigen::Index rank = m - 1; rank >= 0; --rank) {
    const Eigen::Index idx = order[size_t(rank)];
    const double q = std::min(1.0, p_values[idx] * double(m) / double(rank + 1));
    running_min = std::min(running_min, q);
    r.q_values[idx] = running_min;
  }
  for (Eigen::Index i = 0; i < m; ++i) r.rejected_at_5pct[size_t(i)] = r.q_values[i] <= 0.05;
  return r;
}

PowerResult mdePower(double hac_se, Eigen::Index n, double sd_treatment,
                     const Eigen::VectorXd& autocorr) {
  if (hac_se <= 0.0) throw DomainError("mde: hac_se must be > 0");
  if (n <= 0) throw DomainError("mde: n must be > 0");
  PowerResult r;
  r.n = n;
  r.sd_treatment = sd_treatment;
  r.hac_se = hac_se;
  r.mde_beta = kMdeMultiplier * hac_se;
  r.mde_pct_10pp = semiElasticity10pp(r.mde_beta);

  const int L = int(autocorr.size());
  double deflation = 1.0;
  for (int k = 1; k <= L; ++k) {
    const double w = 1.0 - double(k) / double(L + 1);
    deflation += 2.0 * w * autocorr[k - 1];
  }
  if (deflation <= 0.0) {
    r.n_eff = double(n);
    r.n_eff_clamped = true;
  } else {
    r.n_eff = double(n) / deflation;
  }
  return r;
}

}  // namespace feekit
