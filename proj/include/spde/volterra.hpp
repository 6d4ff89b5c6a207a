#pragma once

#include "spde/common.hpp"

#include <functional>
#include <vector>

namespace spde {

struct VolterraParams {
  double a = 0.0;
  double b = 1.0;
  double mu1 = 1.0;
  double mu2 = 1.0;
  double T = 1.0;

  void validate() const;
};

struct SeriesEval {
  double value = 0.0;
  int terms_used = 0;
  double truncation_bound = 0.0;
};

/// E_{mu1,mu2}(t) = sum_n t^{n mu2} / Gamma(mu1 + n mu2).
SeriesEval e_series(double mu1, double mu2, double t, double tol = 1e-14);

/// (2 / (Gamma_0 mu2)) (1+t)^{2-mu1} e^{t+1}.
double e_bound(double mu1, double mu2, double t);

struct EBoundReport {
  bool pass = true;
  double worst_t = 0.0;
  double worst_ratio = 0.0;  // max series / bound
  std::vector<double> t, series, bound;
};

EBoundReport e_bound_check(double mu1, double mu2, const std::vector<double>& t_grid);

/// phi(t_i, t_j) for j < i stored at values(i, j); the diagonal may hold phi(s,s)
/// when finite (otherwise NaN) and is then used on the first cell.
struct VolterraSample {
  Vec t;
  Mat values;
  std::vector<int> columns;  // s-indices to check; empty means all
};

struct VolterraReport {
  bool applicable = false;        // hypothesis holds on the grid
  bool conclusion_holds = false;
  double hypothesis_worst = 0.0;  // max phi / rhs - 1 (<= tol when applicable)
  double worst_slack = 0.0;       // min (bound - phi) / bound
  double max_rel_gap = 0.0;       // max |phi - bound| / bound
  double worst_t = 0.0, worst_s = 0.0;
  std::string status() const;
};

/// Checks the integral hypothesis by product integration (exact weight against
/// piecewise-linear phi), then the pointwise conclusion.
VolterraReport volterra_verify(const VolterraSample& phi, const VolterraParams& p,
                               double hypothesis_tol = 1e-9, double conclusion_tol = 1e-9);

/// Right-node product-integration solution of
///   q(t) = forcing(t) + t^{c} int_0^t sum_m kappa_m (t-s)^{-alpha_m} s^{-gamma} q(s) ds
/// on the given nodes (t(0) = 0).
struct VolterraKernelTerm {
  double kappa;
  double alpha;
};
Vec solve_volterra_majorant(const Vec& t, const Vec& forcing, double c, double gamma,
                            const std::vector<VolterraKernelTerm>& kernel);

}  // namespace spde
