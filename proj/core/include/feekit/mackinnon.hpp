#pragma once

namespace feekit {

enum class Deterministic { kNone, kIntercept, kTrend };

/// Approximate asymptotic p-value for Dickey-Fuller-type tau statistics
/// (ADF, Phillips-Perron Z_tau, Engle-Granger residual tests), using the
/// response-surface regressions published in MacKinnon (1994, 2010).
/// n_series is the number of variables in the (cointegrating) relation:
/// 1 for a plain unit-root test, 1 + #regressors for Engle-Granger.
/// The surface is monotone in the statistic and clipped to [0, 1].
double mackinnonPValue(double tau, Deterministic det, int n_series = 1);

}  // namespace feekit
