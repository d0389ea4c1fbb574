#include "feekit/mackinnon.hpp"

#include <limits>

#include "feekit/errors.hpp"
#include "feekit/stats.hpp"

namespace feekit {

namespace {

// Response-surface coefficients from MacKinnon (1994), with the cutoff and
// range constants from the updated tables (MacKinnon 2010). Row index is
// n_series - 1. Below tau_star the quadratic "smallp" surface applies, above
// it the cubic "largep" surface; outside [tau_min, tau_max] the p-value
// saturates at 0 or 1. p = Phi(poly(tau)).
constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr double tau_star_nc[6] = {-1.04, -1.53, -2.68, -3.09, -3.07, -3.77};
constexpr double tau_min_nc[6] = {-19.04, -19.62, -21.21, -23.25, -21.63, -25.74};
constexpr double tau_max_nc[6] = {kInf, 1.51, 0.86, 0.88, 1.05, 1.24};
constexpr double tau_star_c[6] = {-1.61, -2.62, -3.13, -3.47, -3.78, -3.93};
constexpr double tau_min_c[6] = {-18.83, -18.86, -23.48, -28.07, -25.96, -23.27};
constexpr double tau_max_c[6] = {2.74, 0.92, 0.55, 0.61, 0.79, 1.0};
constexpr double tau_star_ct[6] = {-2.89, -3.19, -3.5, -3.65, -3.8, -4.36};
constexpr double tau_min_ct[6] = {-16.18, -21.15, -25.37, -26.63, -26.53, -26.18};
constexpr double tau_max_ct[6] = {0.7, 0.63, 0.71, 0.93, 1.19, 1.42};

constexpr double tau_nc_smallp[6][3] = {
    {0.6344, 1.2378, 0.032496}, {1.9129, 1.3857, 0.035322}, {2.7648, 1.4502, 0.034186},
    {3.4336, 1.4835, 0.0319},   {4.0999, 1.5533, 0.0359},   {4.5388, 1.5344, 0.029807}};
constexpr double tau_c_smallp[6][3] = {
    {2.1659, 1.4412, 0.038269}, {2.92, 1.5012, 0.039796},   {3.4699, 1.4856, 0.03164},
    {3.9673, 1.4777, 0.026315}, {4.5509, 1.5338, 0.029545}, {5.1399, 1.6036, 0.034445}};
constexpr double tau_ct_smallp[6][3] = {
    {3.2512, 1.6047, 0.049588}, {3.6646, 1.5419, 0.036448}, {4.0983, 1.5173, 0.029898},
    {4.5844, 1.5338, 0.028796}, {5.0722, 1.5634, 0.029472}, {5.53, 1.5914, 0.030392}};

constexpr double tau_nc_largep[6][4] = {
    {0.4797, 0.93557, -0.06999, 0.033066},  {1.5578, 0.8558, -0.2083, -0.033549},
    {2.2268, 0.68093, -0.32362, -0.054448}, {2.7654, 0.64502, -0.30811, -0.044946},
    {3.2684, 0.68051, -0.26778, -0.034972}, {3.7268, 0.7167, -0.23648, -0.028288}};
constexpr double tau_c_largep[6][4] = {
    {1.7339, 0.93202, -0.12745, -0.010368}, {2.1945, 0.64695, -0.29198, -0.042377},
    {2.5893, 0.45168, -0.36529, -0.050074}, {3.0387, 0.45452, -0.33666, -0.041921},
    {3.5049, 0.52098, -0.29158, -0.033468}, {3.9489, 0.58933, -0.25359, -0.02721}};
constexpr double tau_ct_largep[6][4] = {
    {2.5261, 0.61654, -0.37956, -0.060285}, {2.85, 0.5272, -0.36622, -0.051695},
    {3.221, 0.5255, -0.32685, -0.041501},   {3.652, 0.59758, -0.27483, -0.032081},
    {4.0712, 0.66428, -0.23464, -0.02546},  {4.4735, 0.71757, -0.20681, -0.021196}};

}  // namespace

double mackinnonPValue(double tau, Deterministic det, int n_series) {
  if (n_series < 1 || n_series > 6) {
    throw DomainError("mackinnonPValue supports 1..6 series");
  }
  const int i = n_series - 1;
  const double *star, *mn, *mx;
  const double(*smallp)[3];
  const double(*largep)[4];
  switch (det) {
    case Deterministic::kNone:
      star = tau_star_nc, mn = tau_min_nc, mx = tau_max_nc;
      smallp = tau_nc_smallp, largep = tau_nc_largep;
      break;
    case Deterministic::kIntercept:
      star = tau_star_c, mn = tau_min_c, mx = tau_max_c;
      smallp = tau_c_smallp, largep = tau_c_largep;
      break;
    case Deterministic::kTrend:
      star = tau_star_ct, mn = tau_min_ct, mx = tau_max_ct;
      smallp = tau_ct_smallp, largep = tau_ct_largep;
      break;
    default:
      throw DomainError("unknown deterministic mode");
  }
  if (tau > mx[i]) return 1.0;
  if (tau < mn[i]) return 0.0;
  double z;
  if (tau <= star[i]) {
    const double* c = smallp[i];
    z = c[0] + tau * (c[1] + tau * c[2]);
  } else {
    const double* c = largep[i];
    z = c[0] + tau * (c[1] + tau * (c[2] + tau * c[3]));
  }
  return normalCdf(z);
}

}  // namespace feekit
