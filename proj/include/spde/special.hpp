#pragma once

namespace spde::special {

/// log Gamma(x) for x > 0 (Lanczos, g = 7, nine terms).
double lgamma(double x);
/// Gamma(x) for x > 0.
double gamma(double x);
/// Euler Beta function B(a,b) for a,b > 0.
double beta(double a, double b);

struct GammaMinimum {
  double argmin;
  double value;
};
/// min_{s>0} Gamma(s), located by golden-section search on (1,2).
GammaMinimum gamma_minimum();

/// Standard normal quantile (Wichura AS241, ~1e-16 relative).
double normal_quantile(double u);

}  // namespace spde::special
