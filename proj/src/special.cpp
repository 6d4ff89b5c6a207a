#include "spde/special.hpp"

#include "spde/common.hpp"

#include <cmath>

namespace spde::special {

namespace {
constexpr double kG = 7.0;
constexpr double kCoef[9] = {0.99999999999980993,     676.5203681218851,
                             -1259.1392167224028,     771.32342877765313,
                             -176.61502916214059,     12.507343278686905,
                             -0.13857109526572012,    9.9843695780195716e-6,
                             1.5056327351493116e-7};
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
}  // namespace

double lgamma(double x) {
  require(x > 0 && std::isfinite(x), "domain", "lgamma needs a positive finite argument");
  if (x < 0.5) {
    // reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    return std::log(M_PI / std::sin(M_PI * x)) - lgamma(1.0 - x);
  }
  const double z = x - 1.0;
  double s = kCoef[0];
  for (int i = 1; i < 9; ++i) s += kCoef[i] / (z + i);
  const double t = z + kG + 0.5;
  return kLogSqrt2Pi + (z + 0.5) * std::log(t) - t + std::log(s);
}

double gamma(double x) {
  require(x > 0 && std::isfinite(x), "domain", "gamma needs a positive finite argument");
  if (x < 0.5) return M_PI / (std::sin(M_PI * x) * gamma(1.0 - x));
  const double z = x - 1.0;
  double s = kCoef[0];
  for (int i = 1; i < 9; ++i) s += kCoef[i] / (z + i);
  const double t = z + kG + 0.5;
  if (x > 140.0) return std::exp(lgamma(x));
  return 2.5066282746310005024 * std::pow(t, z + 0.5) * std::exp(-t) * s;
}

double beta(double a, double b) {
  require(a > 0 && b > 0, "domain", "beta needs positive arguments");
  return std::exp(lgamma(a) + lgamma(b) - lgamma(a + b));
}

GammaMinimum gamma_minimum() {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 1.0, b = 2.0;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = gamma(x1), f2 = gamma(x2);
  while (b - a > 1e-12) {
    if (f1 < f2) { b = x2; x2 = x1; f2 = f1; x1 = b - g * (b - a); f1 = gamma(x1); }
    else { a = x1; x1 = x2; f1 = f2; x2 = a + g * (b - a); f2 = gamma(x2); }
  }
  const double s = 0.5 * (a + b);
  return {s, gamma(s)};
}

double normal_quantile(double p) {
  const double q = p - 0.5;
  double r, val;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    val = q * (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                    67265.770927008700853) * r + 45921.953931549871457) * r +
                  13731.693765509461125) * r + 1971.5909503065514427) * r +
                133.14166789178437745) * r + 3.387132872796366608) /
          (((((((r * 5226.495278852545925 + 28729.085735721942674) * r +
                39307.89580009271061) * r + 21213.794301586595867) * r +
              5394.1960214247511077) * r + 687.1870074920579083) * r +
            42.313330701600911252) * r + 1.0);
    return val;
  }
  r = q < 0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0 ? -val : val;
}

}  // namespace spde::special
