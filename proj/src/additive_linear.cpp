#include "spde/additive_linear.hpp"

#include "spde/special.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>

#include <algorithm>
#include <cmath>

namespace spde {

Vec TimeProfile::operator()(double t) const {
  Vec v = h(t);
  if (a != 0.0) v *= std::pow(t, a);
  return v;
}

TimeProfile TimeProfile::zero(int d) {
  return {"zero", 0.0, [d](double) { return Vec::Zero(d).eval(); }};
}

TimeProfile TimeProfile::constant(Vec v) {
  return {"constant", 0.0, [v](double) { return v; }};
}

TimeProfile TimeProfile::power(Vec amp, double exponent) {
  require(exponent > -1, "domain", "power profile exponent must exceed -1");
  return {"power", exponent, [amp](double) { return amp; }};
}

void AdditiveLinearSpec::validate() const {
  const int d = A.dim();
  require(norm.d == d && xi.mean.size() == d, "dimension", "dimension mismatch in linear spec");
  require(static_cast<bool>(F.h) && static_cast<bool>(G.h), "domain", "profiles need evaluators");
  require(F.a > -1 && G.a > -0.5, "domain", "profile exponents must keep the integrals finite");
  if (flag == LinearCondition::F1)
    require(0 < sigma && sigma < beta && beta <= 0.5, "schema",
            "condition F1 needs 0 < sigma < beta <= 1/2");
  else
    require(0 < sigma && sigma < beta && beta <= 1, "schema",
            "condition F2 needs 0 < sigma < beta <= 1");
}

namespace {

// int_0^h e^{-lambda (h-s)} s^a ds = e^{-x} sum_n x^n h^{a+1} / (n! (n+a+1)), x = lambda h
double singular_cell_weight(double lambda, double a, double h) {
  const double x = lambda * h;
  const double scale = std::pow(h, a + 1);
  if (x == 0.0) return scale / (a + 1);
  const double lx = std::log(x);
  double sum = 0.0;
  for (int n = 0;; ++n) {
    const double term = std::exp(-x + n * lx - special::lgamma(n + 1.0)) / (n + a + 1);
    sum += term;
    if (n > x && term < 1e-17 * sum) break;
    require(n < 100000, "numeric", "singular cell weight series did not converge");
  }
  return scale * sum;
}

}  // namespace

Mat semigroup_cell_integrals(const Vec& lambda, const TimeProfile& f, const TimeGrid& grid) {
  using boost::math::quadrature::gauss;
  const int d = static_cast<int>(lambda.size()), N = grid.N;
  const double h = grid.dt();
  Mat out(d, N);
  const Vec mid0 = f.h(0.5 * h);
  require(mid0.size() == d, "dimension", "profile dimension differs from operator dimension");
  for (int i = 0; i < d; ++i) out(i, 0) = singular_cell_weight(lambda(i), f.a, h) * mid0(i);
  for (int k = 1; k < N; ++k) {
    const double a = grid.node(k), b = grid.node(k + 1);
    for (int i = 0; i < d; ++i) {
      const double li = lambda(i);
      out(i, k) = gauss<double, 8>::integrate(
          [&](double s) { return std::exp(-li * (b - s)) * f(s)(i); }, a, b);
    }
  }
  require(out.allFinite(), "numeric", "deterministic drive is not finite on the grid");
  return out;
}

LinearAdditiveSolver::LinearAdditiveSolver(AdditiveLinearSpec spec, const TimeGrid& grid)
    : spec_(std::move(spec)), grid_(grid) {
  spec_.validate();
  const int d = spec_.A.dim();
  drive_ = semigroup_cell_integrals(spec_.A.eigenvalues(), spec_.F, grid_);
  g_ = StepIntegrand::from_function(grid_, d, [this](double t) { return spec_.G(t); });
  if (spec_.mode == ConvolutionMode::exact_gauss) kernel_ = make_exact_gauss_kernel(spec_.A, grid_.dt());
}

SolutionDecomposition LinearAdditiveSolver::solve(const BrownianPath& w, const Vec& xi) const {
  require(w.grid == grid_, "grid", "Brownian path grid differs from solver grid");
  require(xi.size() == spec_.A.dim() && xi.allFinite(), "domain", "invalid initial value");
  const int d = spec_.A.dim(), N = grid_.N;
  const Vec decay = (-grid_.dt() * spec_.A.eigenvalues().array()).exp();
  SolutionDecomposition s;
  s.I1 = AdaptedProcess{grid_, Mat(d, N + 1)};
  s.I1.values.col(0) = xi;
  for (int k = 0; k < N; ++k)
    s.I1.values.col(k + 1) = decay.cwiseProduct(s.I1.values.col(k)) + drive_.col(k);
  s.I2 = spec_.mode == ConvolutionMode::exact_gauss
             ? stochastic_convolution(spec_.A, g_, w, kernel_)
             : stochastic_convolution(spec_.A, g_, w, ConvolutionMode::increment);
  s.X = AdaptedProcess{grid_, s.I1.values + s.I2.values};
  return s;
}

SolutionDecomposition solve_linear_additive(const AdditiveLinearSpec& spec, const TimeGrid& grid,
                                            const BrownianPath& w) {
  return LinearAdditiveSolver(spec, grid).solve(w);
}

StrictResidualReport strict_residual(const SolutionDecomposition& sol, const LinearAdditiveSolver& solver,
                                     const BrownianPath& w, const Vec& xi, double delta,
                                     double c_delta) {
  const AdditiveLinearSpec& spec = solver.spec();
  const TimeGrid& g = solver.grid();
  require(w.grid == g && sol.X.grid == g, "grid", "residual inputs live on different grids");
  require(delta > 0 && delta <= 1, "domain", "delta must lie in (0,1]");
  const bool noisy = solver.noise_integrand().cells.cwiseAbs().maxCoeff() > 0;
  require(!noisy || spec.mode == ConvolutionMode::increment, "domain",
          "strict residual needs the increment-mode convolution coupled to w");
  StrictResidualReport r;
  r.delta = delta;
  r.c_delta_configured = c_delta;
  const Vec& lam = spec.A.eigenvalues();
  for (int k = 1; k <= g.N; ++k) {
    const double t = g.node(k);
    r.c_delta_measured = std::max(
        r.c_delta_measured, std::pow(t, delta) * (lam.array() * (-lam.array() * t).exp()).maxCoeff());
  }
  r.assumption_ok = std::isfinite(r.c_delta_measured) && r.c_delta_measured <= c_delta;
  if (!r.assumption_ok) return r;
  const Mat fcell = semigroup_cell_integrals(Vec::Zero(lam.size()), spec.F, g);
  const Mat& gcell = solver.noise_integrand().cells;
  const Mat& X = sol.X.values;
  const double h = g.dt();
  Vec acc = Vec::Zero(lam.size());
  r.profile.push_back(lp_norm(X.col(0) - xi, spec.norm.p));
  for (int k = 0; k < g.N; ++k) {
    acc += 0.5 * h * lam.cwiseProduct(X.col(k) + X.col(k + 1)) - fcell.col(k) -
           gcell.col(k) * w.increment(k);
    r.profile.push_back(lp_norm(X.col(k + 1) + acc - xi, spec.norm.p));
  }
  r.max_residual = *std::max_element(r.profile.begin(), r.profile.end());
  return r;
}

double convolution_covariance_oracle(const SpectralOperator& a, const TimeProfile& G, double t,
                                     double tol) {
  require(t >= 0, "domain", "time must be >= 0");
  if (t == 0) return 0.0;
  boost::math::quadrature::tanh_sinh<double> q;
  const Vec& lam = a.eigenvalues();
  double s = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    const double li = lam(i);
    s += q.integrate(
        [&](double u) {
          const double g = G(u)(i);
          return std::exp(-2 * li * (t - u)) * g * g;
        },
        0.0, t, tol);
  }
  return s;
}

namespace {

// sup_t int_0^t e^{-2 nu (t-s)} s^{c-1} ds with c = 2 beta, using
// int_0^t e^{-x(1 - s/t)} s^{c-1} ds = t^c M(1, c+1, -x) / c, x = 2 nu t.
double c_nu_beta(double nu, double beta) {
  const double c = 2 * beta;
  if (c >= 1.0) return 1.0 / (2 * nu);
  auto g = [&](double lx) {
    const double x = std::exp(lx);
    const double t = x / (2 * nu);
    return std::pow(t, c) * boost::math::hypergeometric_1F1(1.0, c + 1, -x) / c;
  };
  double best = -1, arg = 0;
  const int n = 400;
  const double lo = std::log(1e-8), hi = std::log(1e4);
  for (int k = 0; k <= n; ++k) {
    const double lx = lo + (hi - lo) * k / n;
    const double v = g(lx);
    if (v > best) best = v, arg = lx;
  }
  double a = arg - (hi - lo) / n, b = arg + (hi - lo) / n;
  const double r = 0.5 * (std::sqrt(5.0) - 1);
  for (int it = 0; it < 100; ++it) {
    const double x1 = b - r * (b - a), x2 = a + r * (b - a);
    if (g(x1) < g(x2)) a = x1; else b = x2;
  }
  return std::max(best, g(0.5 * (a + b)));
}

}  // namespace

LinearConstants linear_constants(const AdditiveLinearSpec& spec, const TimeGrid& grid) {
  LinearConstants k;
  const double T = grid.T, beta = spec.beta, sigma = spec.sigma, p = spec.norm.p;
  auto F = [&](double t) { return spec.F(t); };
  auto G = [&](double t) { return spec.G(t); };
  k.F_norm = fbeta_sigma_norm(WeightedHolderSample::from_function(F, T, grid.N, beta, sigma, p)).norm;
  if (spec.flag == LinearCondition::F1) {
    k.G_norm = fbeta_sigma_norm(WeightedHolderSample::from_function(G, T, grid.N, beta + 0.5, sigma, p)).norm;
  } else {
    for (int j = 1; j <= 2 * grid.N; ++j) k.G_norm = std::max(k.G_norm, lp_norm(G(0.5 * j * grid.dt()), p));
  }
  k.iota0 = iota_constant(spec.A, 0.0, T);
  k.iota1 = iota_constant(spec.A, 1.0, T);
  k.nu = spec.A.min_eigenvalue();
  const double a = 2 + k.iota0;
  const double b = (2 + k.iota0 + k.iota1 * special::beta(beta - sigma, sigma)) * std::pow(T, beta) / beta;
  k.c1 = 2 * std::max(a * a, b * b);
  const double c = spec.constants.c, i0 = k.iota0;
  if (spec.flag == LinearCondition::F1) {
    k.c_nu_beta = c_nu_beta(k.nu, beta);
    k.rho = std::max(2 * k.c1, 2 * c * k.c_nu_beta * i0 * i0);
    if (beta < 0.5)
      k.K_increment = c * k.G_norm * k.G_norm *
                      (i0 * i0 / (2 * beta) + k.iota1 * k.iota1 * special::beta(2 * beta, 1 - 2 * beta) / (beta * beta));
  } else {
    k.rho = std::max({2 * k.c1, c * i0 * i0 / k.nu, 2 * k.nu});
  }
  return k;
}

RegularityReport regularity_report(const LinearAdditiveSolver& solver, std::size_t paths,
                                   std::uint64_t seed, const EnsembleOptions& eo) {
  require(paths >= 2, "domain", "regularity report needs at least two paths");
  const AdditiveLinearSpec& spec = solver.spec();
  const TimeGrid& g = solver.grid();
  const int N = g.N;
  const double p = spec.norm.p;
  RegularityReport rep;
  rep.constants = linear_constants(spec, g);
  std::vector<int> lags;
  for (int h = 1; h <= N / 16; h *= 2) lags.push_back(h);
  require(lags.size() >= 2, "domain", "grid too coarse for the Kolmogorov regression (N >= 32)");
  KolmogorovAccumulator kx(g.T, N, lags, p), ki(g.T, N, lags, p);
  MomentTable mom(2, N + 1);
  MomentTable jumps(1, 2);
  struct Rec {
    Mat m, j;
    Vec kx, ki;
  };
  ordered_ensemble(
      paths,
      [&](std::size_t i) {
        const BrownianPath w = sample_brownian(g, seed, i);
        const SolutionDecomposition s = solver.solve(w);
        Rec r{Mat(2, N + 1), Mat::Zero(1, 2), kx.path_record(s.X.values), ki.path_record(s.I2.values)};
        for (int k = 0; k <= N; ++k) {
          r.m(0, k) = std::pow(lp_norm(s.X.values.col(k), p), 2);
          r.m(1, k) = std::pow(lp_norm(fractional_power_apply(spec.A, spec.beta, s.X.values.col(k)), p), 2);
        }
        for (int k = 0; k < N; ++k)
          r.j(0, 0) = std::max(r.j(0, 0), lp_norm(fractional_power_apply(spec.A, spec.beta, s.X.values.col(k + 1) - s.X.values.col(k)), p));
        for (int k = 0; k + 2 <= N; k += 2)
          r.j(0, 1) = std::max(r.j(0, 1), lp_norm(fractional_power_apply(spec.A, spec.beta, s.X.values.col(k + 2) - s.X.values.col(k)), p));
        return r;
      },
      [&](std::size_t, Rec&& r) {
        mom.add(r.m);
        jumps.add(r.j);
        kx.add_record(r.kx);
        ki.add_record(r.ki);
      },
      eo);
  const LinearConstants& k = rep.constants;
  rep.xi_moment2 = spec.xi.moment_bound(2.0, spec.norm);
  const double base = rep.xi_moment2 + k.F_norm * k.F_norm;
  const Mat se = mom.standard_error();
  rep.moment_pass = true;
  for (int j = 0; j <= N; ++j) {
    const double t = g.node(j);
    const double b = spec.flag == LinearCondition::F1
                         ? k.rho * (base + k.G_norm * k.G_norm)
                         : k.rho * (base + (1 - std::exp(-k.rho * t)) * k.G_norm * k.G_norm);
    rep.t.push_back(t);
    rep.second_moment.push_back(mom.mean()(0, j));
    rep.second_moment_se.push_back(se(0, j));
    rep.beta_moment.push_back(mom.mean()(1, j));
    rep.bound.push_back(b);
    if (mom.mean()(0, j) > b) rep.moment_pass = false;
  }
  rep.jump_fine = jumps.mean()(0, 0);
  rep.jump_coarse = jumps.mean()(0, 1);
  rep.continuity_pass = std::isfinite(rep.jump_fine) && rep.jump_fine <= rep.jump_coarse;
  rep.kolmogorov = kx.estimate();
  rep.exponent_pass = rep.kolmogorov.exponent >= spec.beta - 0.1;
  if (k.K_increment > 0) {
    const KolmogorovEstimate e = ki.estimate();
    for (std::size_t j = 0; j < e.lags.size(); ++j) {
      const double rhs = k.K_increment * std::pow(e.lags[j], 2 * spec.beta);
      rep.increment_lag.push_back(e.lags[j]);
      rep.increment_lhs.push_back(e.mean_sq_increment[j]);
      rep.increment_lhs_se.push_back(e.mean_sq_increment_se[j]);
      rep.increment_rhs.push_back(rhs);
      if (e.mean_sq_increment[j] > rhs) rep.increment_pass = false;
    }
  }
  rep.pass = rep.moment_pass && rep.continuity_pass && rep.exponent_pass && rep.increment_pass;
  return rep;
}

}  // namespace spde
