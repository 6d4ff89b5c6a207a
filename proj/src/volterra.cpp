#include "spde/volterra.hpp"

#include "spde/special.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <limits>

namespace spde {

void VolterraParams::validate() const {
  require(a >= 0 && b > 0 && mu1 > 0 && mu2 > 0 && T > 0, "domain",
          "Volterra parameters need a >= 0, b > 0, mu1 > 0, mu2 > 0, T > 0");
}

namespace {
double series_term(double mu1, double mu2, double t, int n) {
  if (n == 0) return 1.0 / special::gamma(mu1);
  if (t == 0) return 0.0;
  const double x = mu1 + n * mu2;
  if (x < 140.0) return std::pow(t, n * mu2) / special::gamma(x);
  return std::exp(n * mu2 * std::log(t) - special::lgamma(x));
}
}  // namespace

SeriesEval e_series(double mu1, double mu2, double t, double tol) {
  require(t >= 0 && tol > 0 && mu1 > 0 && mu2 > 0, "domain", "invalid e_series arguments");
  SeriesEval s;
  double term = series_term(mu1, mu2, t, 0);
  s.value = term;
  s.terms_used = 1;
  if (t == 0) return s;
  for (int n = 1; n < 100000; ++n) {
    const double next = series_term(mu1, mu2, t, n);
    const double after = series_term(mu1, mu2, t, n + 1);
    const double ratio = next > 0 ? after / next : 0.0;
    if (ratio < 1.0) {
      // term ratios decrease once below one (log-convexity of Gamma)
      const double bound = next / (1.0 - ratio);
      if (bound < tol) {
        s.truncation_bound = bound;
        return s;
      }
    }
    s.value += next;
    s.terms_used = n + 1;
    term = next;
  }
  throw Error("numeric", "e_series did not converge");
}

double e_bound(double mu1, double mu2, double t) {
  static const double g0 = special::gamma_minimum().value;
  return 2.0 / (g0 * mu2) * std::pow(1.0 + t, 2.0 - mu1) * std::exp(t + 1.0);
}

EBoundReport e_bound_check(double mu1, double mu2, const std::vector<double>& t_grid) {
  EBoundReport r;
  for (double t : t_grid) {
    const double s = e_series(mu1, mu2, t, 1e-15 * std::max(1.0, std::exp(t))).value;
    const double b = e_bound(mu1, mu2, t);
    r.t.push_back(t);
    r.series.push_back(s);
    r.bound.push_back(b);
    if (s / b > r.worst_ratio) {
      r.worst_ratio = s / b;
      r.worst_t = t;
    }
  }
  r.pass = r.worst_ratio <= 1.0;
  return r;
}

std::string VolterraReport::status() const {
  if (!applicable) return "not applicable";
  return conclusion_holds ? "pass" : "fail";
}

namespace {
/// int over r in [ra, rb] of (t - r)^{mu-1} times the linear interpolant
/// of (fa at ra, fb at rb).
double linear_weight(double t, double ra, double rb, double fa, double fb, double mu) {
  const double ua = t - ra, ub = t - rb;
  const double i0 = (std::pow(ua, mu) - std::pow(ub, mu)) / mu;
  const double i1 = (std::pow(ua, mu + 1) - std::pow(ub, mu + 1)) / (mu + 1);
  return fb * i0 + (fa - fb) / (ua - ub) * (i1 - ub * i0);
}
}  // namespace

VolterraReport volterra_verify(const VolterraSample& phi, const VolterraParams& p,
                               double hyp_tol, double concl_tol) {
  p.validate();
  const Eigen::Index n = phi.t.size();
  require(n >= 2 && phi.values.rows() == n && phi.values.cols() == n, "dimension",
          "Volterra sample shape mismatch");
  std::vector<int> cols = phi.columns;
  if (cols.empty())
    for (int j = 0; j + 1 < n; ++j) cols.push_back(j);
  VolterraReport r;
  r.worst_slack = std::numeric_limits<double>::infinity();
  r.hypothesis_worst = -std::numeric_limits<double>::infinity();
  const double gmu2 = special::gamma(p.mu2), gmu1 = special::gamma(p.mu1);
  const double scale = std::pow(p.b * gmu2, 1.0 / p.mu2);
  for (int j : cols) {
    require(j >= 0 && j + 1 < n, "domain", "Volterra column out of range");
    const double s = phi.t(j);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double t = phi.t(i), v = phi.values(i, j);
      require(std::isfinite(v) && v >= 0, "domain", "phi must be finite and nonnegative");
      double integral = 0.0;
      for (Eigen::Index k = j; k < i; ++k) {
        const double fb = phi.values(k + 1, j);
        double fa = phi.values(k, j);
        if (k == j && !std::isfinite(fa)) fa = fb;
        integral += linear_weight(t, phi.t(k), phi.t(k + 1), fa, fb, p.mu2);
      }
      const double rhs = p.a * std::pow(t - s, p.mu1 - 1) + p.b * integral;
      r.hypothesis_worst = std::max(r.hypothesis_worst, rhs > 0 ? v / rhs - 1.0 : (v > 0 ? INFINITY : 0.0));
      const double bound = p.a * gmu1 * std::pow(t - s, p.mu1 - 1) *
                           e_series(p.mu1, p.mu2, scale * (t - s), 1e-16).value;
      const double slack = bound > 0 ? (bound - v) / bound : (v > 0 ? -INFINITY : 0.0);
      if (slack < r.worst_slack) {
        r.worst_slack = slack;
        r.worst_t = t;
        r.worst_s = s;
      }
      if (bound > 0) r.max_rel_gap = std::max(r.max_rel_gap, std::abs(v - bound) / bound);
    }
  }
  r.applicable = r.hypothesis_worst <= hyp_tol;
  r.conclusion_holds = r.worst_slack >= -concl_tol;
  return r;
}

Vec solve_volterra_majorant(const Vec& t, const Vec& forcing, double c, double gamma,
                            const std::vector<VolterraKernelTerm>& kernel) {
  const Eigen::Index n = t.size();
  require(n >= 2 && forcing.size() == n && t(0) == 0, "dimension", "majorant grid must start at 0");
  require(gamma < 1, "domain", "majorant weight exponent must be < 1");
  for (const auto& k : kernel) require(k.alpha < 1 && k.kappa >= 0, "domain", "invalid kernel term");
  Vec q(n);
  q(0) = forcing(0);
  for (Eigen::Index i = 1; i < n; ++i) {
    const double ti = t(i);
    double acc = 0.0, diag = 0.0;
    for (const auto& k : kernel) {
      const double a1 = 1.0 - gamma, b1 = 1.0 - k.alpha;
      const double pref = k.kappa * std::pow(ti, c + 1.0 - k.alpha - gamma);
      double prev = 0.0;
      for (Eigen::Index j = 1; j <= i; ++j) {
        const double x = std::min(1.0, t(j) / ti);
        const double cur = boost::math::beta(a1, b1, x);
        const double w = pref * (cur - prev);
        prev = cur;
        if (j == i) diag += w;
        else acc += w * q(j);
      }
    }
    require(diag < 1.0, "numeric", "majorant step too coarse for the kernel");
    q(i) = (forcing(i) + acc) / (1.0 - diag);
  }
  return q;
}

}  // namespace spde
