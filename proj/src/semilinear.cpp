#include "spde/semilinear.hpp"

#include "spde/special.hpp"
#include "spde/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spde {

Nonlinearity Nonlinearity::none(int d) {
  return {"zero", [d](const Vec&, const Vec&, const Vec&) { return Vec::Zero(d).eval(); }, 0.0, true};
}

void SemilinearSpec::validate() const {
  const int d = A.dim();
  require(norm.d == d && xi.mean.size() == d, "dimension", "dimension mismatch in semilinear spec");
  require(static_cast<bool>(F1.eval), "domain", "F1 needs an evaluator");
  require(F1.c_F1 >= 0 && std::isfinite(F1.c_F1), "domain", "c_F1 must be finite and >= 0");
  std::ostringstream os;
  os << "need 0 < eta < 1/2, max(0, 2 eta - 1/2) < beta < eta, 0 < sigma < beta; got eta=" << eta
     << " beta=" << beta << " sigma=" << sigma;
  require(0 < eta && eta < 0.5, "schema", os.str());
  require(std::max(0.0, 2 * eta - 0.5) < beta && beta < eta, "schema", os.str());
  require(0 < sigma && sigma < beta, "schema", os.str());
  if (gamma) {
    std::ostringstream g;
    g << "need max(beta, 1/2 - eta) < gamma < 1/2; got gamma=" << *gamma;
    require(std::max(beta, 0.5 - eta) < *gamma && *gamma < 0.5, "schema", g.str());
  }
  require(kappa_margin >= 0, "schema", "kappa_margin must be >= 0");
}

AdditiveLinearSpec SemilinearSpec::linear_part() const {
  return {A, F2, G, xi, beta, sigma, LinearCondition::F1, norm, constants, mode};
}

SemilinearData semilinear_data(const SemilinearSpec& spec, const TimeGrid& grid) {
  spec.validate();
  SemilinearData d;
  d.eta = spec.eta;
  d.beta = spec.beta;
  d.T = grid.T;
  d.c_E = spec.constants.c;
  d.c_F1 = spec.F1.c_F1;
  d.critical = spec.critical;
  d.margin = spec.kappa_margin;
  const LinearConstants lc = linear_constants(spec.linear_part(), grid);
  d.F2_sq = lc.F_norm * lc.F_norm;
  d.G_sq = lc.G_norm * lc.G_norm;
  const int n = spec.A.dim();
  const Vec z = Vec::Zero(n);
  d.F1_zero_sq = std::pow(lp_norm(spec.F1.eval(z, z, z), spec.norm.p), 2);
  if (spec.critical) {
    d.xi_sq = spec.xi.moment_bound(2.0, spec.norm);
  } else {
    const Vec lb = spec.A.eigenvalues().array().pow(spec.beta);
    d.xi_sq = InitialLaw::gaussian(lb.cwiseProduct(spec.xi.mean), lb.cwiseProduct(spec.xi.stddev))
                  .moment_bound(2.0, spec.norm);
  }
  d.iota_eta = iota_constant(spec.A, spec.eta, grid.T);
  d.iota_beta = iota_constant(spec.A, spec.beta, grid.T);
  d.iota_0 = iota_constant(spec.A, 0.0, grid.T);
  d.iota_eta_beta = iota_constant(spec.A, spec.eta - spec.beta, grid.T);
  return d;
}

std::array<double, 3> certificate_inequalities(const SemilinearData& d, double kappa2, double S) {
  using special::beta;
  const double e = d.eta, b = d.beta, c2 = d.c_F1 * d.c_F1, F0 = d.F1_zero_sq;
  const double ie2 = d.iota_eta * d.iota_eta;
  std::array<double, 3> r{};
  if (!d.critical) {
    const double ib2 = d.iota_beta * d.iota_beta;
    auto pres = [&](double th, double i2) {
      return 18 * i2 * c2 * kappa2 * beta(1 + 2 * b - 2 * e, 1 - 2 * th) * std::pow(S, 2 * (1 + b - 2 * e)) +
             18 * i2 * (c2 * kappa2 + F0) / (1 - 2 * th) * std::pow(S, 2 * (1 - b));
    };
    r[0] = pres(e, ie2);
    r[1] = pres(b, ib2);
    r[2] = 2 * c2 *
           (ie2 * beta(1 + 2 * b - 2 * e, 1 - 2 * e) + ib2 * beta(1 + 2 * b - 2 * e, 1 - 2 * b) +
            (ie2 / (1 - 2 * e) + ib2 / (1 - 2 * b)) * std::pow(S, 2 * (e - b))) *
           std::pow(S, 2 * (1 - e));
  } else {
    const double i02 = d.iota_0 * d.iota_0;
    auto pres = [&](double th, double i2) {
      return 18 * i2 *
             (c2 * kappa2 * beta(1 - 2 * e, 1 - 2 * th) * std::pow(S, 2 * (1 - e)) +
              (c2 * kappa2 + F0) * S * S / (1 - 2 * th));
    };
    r[0] = pres(e, ie2);
    r[1] = pres(0.0, i02);
    auto con = [&](double th, double i2) {
      return 2 * c2 * i2 * (beta(1 - 2 * e, 1 - 2 * th) * std::pow(S, 2 * (1 - e)) + S * S / (1 - 2 * th));
    };
    r[2] = con(e, ie2) + con(0.0, i02);
  }
  return r;
}

KappaCertificate kappa_and_horizon(const SemilinearData& d) {
  using special::beta;
  const double e = d.eta, b = d.beta, c = d.c_E;
  const double ie2 = d.iota_eta * d.iota_eta, ib2 = d.iota_beta * d.iota_beta,
               i02 = d.iota_0 * d.iota_0, ieb2 = d.iota_eta_beta * d.iota_eta_beta;
  KappaCertificate k;
  if (!d.critical) {
    k.C1 = 3 * ieb2 * d.xi_sq + 6 * ie2 * d.F2_sq * std::pow(beta(b, 1 - e), 2) +
           3 * c * ie2 * d.G_sq * beta(2 * b, 1 - 2 * e);
    k.C2 = 3 * i02 * d.xi_sq + 6 * ib2 * d.F2_sq * std::pow(beta(b, 1 - b), 2) +
           3 * c * ib2 * d.G_sq * beta(2 * b, 1 - 2 * b);
  } else {
    const double T2b = std::pow(d.T, 2 * b);
    k.C1 = 3 * ie2 * d.xi_sq + 6 * ie2 * d.F2_sq * std::pow(beta(b, 1 - e), 2) * T2b +
           3 * c * ie2 * d.G_sq * beta(2 * b, 1 - 2 * e) * T2b;
    k.C2 = 3 * i02 * d.xi_sq + 6 * i02 * d.F2_sq * std::pow(1 / b, 2) * T2b +
           3 * c * i02 * d.G_sq / (2 * b) * T2b;
  }
  k.kappa2 = 2 * std::max(k.C1, k.C2) * (1 + d.margin);
  k.thresholds = {k.kappa2 / 2, k.kappa2 / 2, 1.0};
  auto holds = [&](int i, double S) {
    const double v = certificate_inequalities(d, k.kappa2, S)[i];
    return i == 2 ? v < 1.0 : v <= k.thresholds[i];
  };
  double T_local = d.T;
  bool capped = true;
  for (int i = 0; i < 3; ++i) {
    if (holds(i, d.T)) continue;
    capped = false;
    double lo = 0.0, hi = d.T;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (holds(i, mid) ? lo : hi) = mid;
    }
    T_local = std::min(T_local, lo);
  }
  require(T_local > 0, "numeric", "the smallness inequalities fail on every horizon");
  k.T_local = T_local;
  k.capped = capped;
  k.at_T_local = certificate_inequalities(d, k.kappa2, T_local);
  k.at_1_1 = certificate_inequalities(d, k.kappa2, 1.1 * T_local);
  k.hold_at_T_local = holds(0, T_local) && holds(1, T_local) && holds(2, T_local);
  k.violated_at_1_1 = k.at_1_1[0] > k.thresholds[0] || k.at_1_1[1] > k.thresholds[1] || k.at_1_1[2] >= 1.0;
  k.contraction_factor = k.at_T_local[2];
  return k;
}

SemilinearSolver::SemilinearSolver(SemilinearSpec spec, const TimeGrid& grid)
    : spec_((spec.validate(), std::move(spec))),
      grid_(grid),
      linear_(spec_.linear_part(), grid),
      cert_(kappa_and_horizon(semilinear_data(spec_, grid))) {
  const Vec& lam = spec_.A.eigenvalues();
  decay_ = (-grid_.dt() * lam.array()).exp();
  phi1_ = phi1_weights(spec_.A, grid_.dt());
  lam_eta_ = lam.array().pow(spec_.eta);
  lam_b_ = spec_.critical ? Vec::Ones(lam.size()) : Vec(lam.array().pow(spec_.beta));
}

Mat SemilinearSolver::noise_increments(const BrownianPath& w) const {
  const int d = spec_.A.dim(), N = grid_.N;
  const Mat I2 = linear_.solve(w, Vec::Zero(d)).I2.values;
  Mat n(d, N);
  for (int k = 0; k < N; ++k) n.col(k) = I2.col(k + 1) - decay_.cwiseProduct(I2.col(k));
  return n;
}

int SemilinearSolver::window_steps(const SemilinearOptions& opt) const {
  if (opt.window_steps > 0) return std::min(opt.window_steps, grid_.N);
  const int ws = static_cast<int>(std::floor(cert_.T_local / grid_.dt() + 1e-9));
  return std::clamp(ws, 1, grid_.N);
}

SemilinearPath SemilinearSolver::solve(const BrownianPath& w, const Vec& xi,
                                       const SemilinearOptions& opt) const {
  require(w.grid == grid_, "grid", "Brownian path grid differs from solver grid");
  return solve_from(noise_increments(w), 0, xi, opt);
}

SemilinearPath SemilinearSolver::solve_from(const Mat& noise, int k0, const Vec& x0,
                                            const SemilinearOptions& opt) const {
  const int d = spec_.A.dim(), N = grid_.N;
  require(noise.rows() == d && noise.cols() == N, "dimension", "noise increments have the wrong shape");
  require(0 <= k0 && k0 <= N, "domain", "restart node out of range");
  require(x0.size() == d && x0.allFinite(), "domain", "invalid initial value");
  const double p = spec_.norm.p;
  const int R = std::max(0, opt.record_iters);
  const Vec& lam = spec_.A.eigenvalues();
  const Vec lam_beta = lam.array().pow(spec_.beta);
  const Mat& drive = linear_.drive_cells();
  const int ws = window_steps(opt);

  SemilinearPath out;
  out.X = AdaptedProcess{grid_, Mat::Zero(d, N + 1)};
  out.X.values.col(k0) = x0;
  if (R > 0) out.record = Mat::Zero(4 * R, N + 1);
  out.converged = true;
  auto sq = [&](const Vec& v) { return std::pow(lp_norm(v, p), 2); };

  for (int s = k0; s < N; s += ws) {
    const int len = std::min(ws, N - s);
    Mat Y(d, len + 1), Z(d, len + 1);
    Y.col(0) = out.X.values.col(s);
    for (int j = 0; j < len; ++j)
      Y.col(j + 1) = decay_.cwiseProduct(Y.col(j)) + drive.col(s + j) + noise.col(s + j);
    Z.col(0) = Y.col(0);
    double prev = INFINITY;
    int grow = 0;
    bool reached = false;
    int m = 0;
    for (; m < opt.max_iter; ++m) {
      for (int j = 0; j < len; ++j) {
        const Vec y = Y.col(j);
        const Vec f = spec_.F1.eval(y, lam_eta_.cwiseProduct(y), lam_beta.cwiseProduct(y));
        Z.col(j + 1) = decay_.cwiseProduct(Z.col(j)) + phi1_.cwiseProduct(f) + drive.col(s + j) + noise.col(s + j);
      }
      double dist = 0.0;
      for (int j = s == k0 ? 0 : 1; j <= len; ++j) {
        const Vec dy = Z.col(j) - Y.col(j);
        const double a = sq(lam_eta_.cwiseProduct(dy)), b = sq(lam_b_.cwiseProduct(dy));
        dist = std::max(dist, std::sqrt(a) + std::sqrt(b));
        if (m < R) {
          const Vec y = Y.col(j);
          out.record(4 * m, s + j) = a;
          out.record(4 * m + 1, s + j) = b;
          out.record(4 * m + 2, s + j) = sq(lam_eta_.cwiseProduct(y));
          out.record(4 * m + 3, s + j) = sq(lam_b_.cwiseProduct(y));
        }
      }
      require(Z.allFinite(), "numeric", "Picard iterate is not finite");
      Y.swap(Z);
      if (dist <= opt.tol) reached = true;
      if (dist == 0.0 && m + 1 >= R) break;
      if (dist > prev && dist > opt.tol) {
        if (++grow >= 3)
          throw Error("non-contraction", "Picard distance grew three times in a row; last ratio " +
                                             std::to_string(dist / prev));
      } else {
        grow = 0;
      }
      prev = dist;
    }
    out.iterations = std::max(out.iterations, m + 1);
    if (!reached) out.converged = false;
    for (int j = 1; j <= len; ++j) out.X.values.col(s + j) = Y.col(j);
  }
  return out;
}

namespace {

double weight_eta(const SemilinearSpec& s, double t) {
  return s.critical ? std::pow(t, 2 * s.eta) : std::pow(t, 2 * (s.eta - s.beta));
}

// least-squares slope of log y against log t over strictly positive pairs
double loglog_slope(const std::vector<double>& t, const std::vector<double>& y, std::size_t from,
                    std::size_t to) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t k = from; k < to && k < t.size(); ++k) {
    if (!(t[k] > 0 && y[k] > 0)) continue;
    const double x = std::log(t[k]), v = std::log(y[k]);
    sx += x, sy += v, sxx += x * x, sxy += x * v, ++n;
  }
  require(n >= 2, "numeric", "too few positive points for a log-log slope");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// per node: E|X|^2, E|A^beta X|^2, E|A^eta X|^2, and optionally E|A^gamma X|^2
MomentTable norm_profile(const SemilinearSolver& solver, std::size_t paths, std::uint64_t seed,
                         const SemilinearOptions& opt, const EnsembleOptions& eo, double gamma) {
  const SemilinearSpec& s = solver.spec();
  const TimeGrid& g = solver.grid();
  const double p = s.norm.p;
  SemilinearOptions o = opt;
  o.record_iters = 0;
  return ensemble_moments(
      paths, 4, g.N + 1,
      [&](std::size_t i) {
        const BrownianPath w = sample_brownian(g, seed, i);
        const Mat X = solver.solve(w, s.xi.sample(seed, i), o).X.values;
        Mat r(4, g.N + 1);
        for (int k = 0; k <= g.N; ++k) {
          const Vec x = X.col(k);
          r(0, k) = std::pow(lp_norm(x, p), 2);
          r(1, k) = std::pow(lp_norm(fractional_power_apply(s.A, s.beta, x), p), 2);
          r(2, k) = std::pow(lp_norm(fractional_power_apply(s.A, s.eta, x), p), 2);
          r(3, k) = gamma > 0 ? std::pow(lp_norm(fractional_power_apply(s.A, gamma, x), p), 2) : 0.0;
        }
        return r;
      },
      eo);
}

}  // namespace

SemilinearStudy semilinear_picard_study(const SemilinearSolver& solver, std::size_t paths,
                                        std::uint64_t seed, SemilinearOptions opt,
                                        const EnsembleOptions& eo) {
  require(paths >= 2, "domain", "Picard study needs at least two paths");
  const SemilinearSpec& s = solver.spec();
  const TimeGrid& g = solver.grid();
  if (opt.record_iters < 7) opt.record_iters = 7;
  const int R = opt.record_iters;
  const int ws = solver.window_steps(opt);
  const MomentTable tab = ensemble_moments(
      paths, 4 * R, g.N + 1,
      [&](std::size_t i) {
        const BrownianPath w = sample_brownian(g, seed, i);
        return solver.solve(w, s.xi.sample(seed, i), opt).record;
      },
      eo);
  const Mat mean = tab.mean(), se = tab.standard_error();
  SemilinearStudy st;
  st.certificate = solver.certificate();
  const double kappa2 = st.certificate.kappa2;
  for (int m = 0; m < R; ++m) {
    double a = 0, a_se = 0, b = 0, b_se = 0;
    WeightedSolutionNorm nm;
    for (int k = 0; k <= ws; ++k) {
      const double wt = k == 0 ? 0.0 : weight_eta(s, g.node(k));
      if (wt * mean(4 * m, k) > a) a = wt * mean(4 * m, k), a_se = wt * se(4 * m, k);
      if (mean(4 * m + 1, k) > b) b = mean(4 * m + 1, k), b_se = se(4 * m + 1, k);
      nm.eta_term = std::max(nm.eta_term, wt * mean(4 * m + 2, k));
      nm.beta_term = std::max(nm.beta_term, mean(4 * m + 3, k));
    }
    st.distance.push_back(a + b);
    st.distance_se.push_back(std::hypot(a_se, b_se));
    st.iterate_norms.push_back(nm);
    if (nm.eta_term > kappa2 || nm.beta_term > kappa2) {
      std::ostringstream os;
      os << "iterate " << m << " leaves the ball: "
         << (nm.eta_term > kappa2 ? "eta term " + std::to_string(nm.eta_term)
                                  : "beta term " + std::to_string(nm.beta_term))
         << " > kappa^2 = " << kappa2;
      throw Error("upsilon", os.str());
    }
  }
  const SemilinearData data = semilinear_data(s, g);
  st.theoretical_ratio = std::sqrt(certificate_inequalities(data, kappa2, ws * g.dt())[2]);
  st.pass = true;
  for (int m = 1; m < R; ++m) {
    const double prev = st.distance[m - 1], cur = st.distance[m];
    if (prev <= 0) {
      st.ratio.push_back(0.0);
      st.ratio_se.push_back(0.0);
      continue;
    }
    const double r = std::sqrt(cur / prev);
    const double rel_c = cur > 0 ? st.distance_se[m] / cur : 0.0;
    const double rel_p = st.distance_se[m - 1] / prev;
    const double rse = 0.5 * r * std::hypot(rel_c, rel_p);
    st.ratio.push_back(r);
    st.ratio_se.push_back(rse);
    if (m <= 5 && r > st.theoretical_ratio + 3 * rse) st.pass = false;
  }
  return st;
}

MomentProfileReport moment_profile_check(const SemilinearSolver& solver, std::size_t paths,
                                         std::uint64_t seed, const SemilinearOptions& opt,
                                         const EnsembleOptions& eo) {
  using special::beta;
  const SemilinearSpec& s = solver.spec();
  require(!s.critical, "domain", "moment profile check applies to the non-critical case");
  const TimeGrid& g = solver.grid();
  const SemilinearData d = semilinear_data(s, g);
  const LinearConstants lc = linear_constants(s.linear_part(), g);
  const double xi2 = s.xi.moment_bound(2.0, s.norm);
  const MomentTable tab = norm_profile(solver, paths, seed, opt, eo, 0.0);
  const double e = s.eta, b = s.beta, c = s.constants.c, c2 = d.c_F1 * d.c_F1;
  const double k2 = solver.certificate().kappa2, F0 = d.F1_zero_sq;
  const double i02 = d.iota_0 * d.iota_0, ib2 = d.iota_beta * d.iota_beta, ie2 = d.iota_eta * d.iota_eta,
               ieb2 = d.iota_eta_beta * d.iota_eta_beta;
  MomentProfileReport r;
  r.beta_slack = r.eta_slack = INFINITY;
  r.pass = true;
  for (int k = 1; k <= g.N; ++k) {
    const double t = g.node(k);
    if (t > solver.certificate().T_local * (1 + 1e-12)) break;
    const double bb = 2 * lc.rho * (xi2 + d.F2_sq + d.G_sq) +
                      6 * c2 * k2 * i02 * std::pow(t, 2 * (1 + b - e)) / (1 + 2 * b - 2 * e) +
                      6 * (c2 * k2 + F0) * i02 * t * t + 4 * i02 * d.xi_sq +
                      4 * ib2 * d.F2_sq * std::pow(beta(b, 1 - b), 2) + 4 * c * ib2 * d.G_sq * beta(2 * b, 1 - 2 * b) +
                      12 * ib2 * (c2 * k2 * beta(1 + 2 * b - 2 * e, 1 - 2 * b) * std::pow(t, 2 * (1 - e)) +
                                  (c2 * k2 + F0) / (1 - 2 * b) * std::pow(t, 2 * (1 - b)));
    const double eb = 4 * ieb2 * d.xi_sq * std::pow(t, -2 * (e - b)) +
                      4 * ie2 * d.F2_sq * std::pow(beta(b, 1 - e), 2) * std::pow(t, 2 * (b - e)) +
                      12 * ie2 * (c2 * k2 * beta(1 + 2 * b - 2 * e, 1 - 2 * e) * std::pow(t, 2 * (1 + b - 2 * e)) +
                                  (c2 * k2 + F0) / (1 - 2 * e) * std::pow(t, 2 * (1 - e))) +
                      4 * c * ie2 * d.G_sq * beta(2 * b, 1 - 2 * e) * std::pow(t, 2 * (b - e));
    const double bm = tab.mean()(0, k) + tab.mean()(1, k), em = tab.mean()(2, k);
    r.t.push_back(t);
    r.beta_moment.push_back(bm);
    r.beta_bound.push_back(bb);
    r.eta_moment.push_back(em);
    r.eta_bound.push_back(eb);
    r.beta_slack = std::min(r.beta_slack, (bb - bm) / bb);
    r.eta_slack = std::min(r.eta_slack, (eb - em) / eb);
    if (bm > bb || em > eb) r.pass = false;
  }
  require(!r.t.empty(), "grid", "no grid node inside the local horizon");
  return r;
}

MoreRegularReport more_regular_check(const SemilinearSolver& solver, std::size_t paths,
                                     std::uint64_t seed, const SemilinearOptions& opt,
                                     const EnsembleOptions& eo) {
  const SemilinearSpec& s = solver.spec();
  require(s.gamma.has_value(), "schema", "more-regular check needs gamma");
  const TimeGrid& g = solver.grid();
  const double gm = *s.gamma;
  MoreRegularReport r;
  r.varrho = std::max(1 - s.eta - gm, s.eta - s.beta);
  const MomentTable tab = norm_profile(solver, paths, seed, opt, eo, gm);
  const Mat& m = tab.mean();
  for (int k = 1; k <= g.N; ++k) {
    const double t = g.node(k);
    r.t.push_back(t);
    r.eta_moment.push_back(m(2, k));
    const double gp = m(0, k) + std::pow(t, 2 * (gm - s.beta)) * m(3, k);
    r.gamma_profile.push_back(gp);
    r.gamma_profile_sup = std::max(r.gamma_profile_sup, gp);
  }
  r.eta_decay_slope = loglog_slope(r.t, r.eta_moment, 0, std::max<std::size_t>(2, g.N / 4));
  r.pass = r.eta_decay_slope >= -2 * r.varrho - 0.1 && std::isfinite(r.gamma_profile_sup);
  return r;
}

SemilinearDependenceReport dependence_check(const SemilinearSpec& a, const SemilinearSpec& b,
                                            const Balls& balls, double T, int N, std::size_t paths,
                                            std::uint64_t seed, const SemilinearOptions& opt,
                                            const EnsembleOptions& eo) {
  using special::beta;
  a.validate();
  b.validate();
  require(!a.critical && !b.critical, "domain", "dependence check applies to the non-critical case");
  require(a.A.eigenvalues() == b.A.eigenvalues() && a.eta == b.eta && a.beta == b.beta &&
              a.sigma == b.sigma && a.F1.name == b.F1.name && a.F1.c_F1 == b.F1.c_F1,
          "domain", "the two problems must share A, exponents and F1");
  require(paths >= 2, "domain", "dependence check needs at least two paths");
  const TimeGrid g0(T, N);
  const SemilinearData da = semilinear_data(a, g0), db = semilinear_data(b, g0);
  for (const SemilinearData* d : {&da, &db}) {
    if (std::sqrt(d->F2_sq) > balls.R1 || std::sqrt(d->G_sq) > balls.R2 || d->xi_sq > balls.R3 * balls.R3) {
      std::ostringstream os;
      os << "data outside the balls: |F2|=" << std::sqrt(d->F2_sq) << " (R1=" << balls.R1
         << "), |G|=" << std::sqrt(d->G_sq) << " (R2=" << balls.R2 << "), E|A^beta xi|^2=" << d->xi_sq
         << " (R3^2=" << balls.R3 * balls.R3 << ")";
      throw Error("ball", os.str());
    }
  }
  SemilinearData ball = da;
  ball.F2_sq = balls.R1 * balls.R1;
  ball.G_sq = balls.R2 * balls.R2;
  ball.xi_sq = balls.R3 * balls.R3;
  SemilinearDependenceReport r;
  r.T_B = kappa_and_horizon(ball).T_local;
  const TimeGrid g(r.T_B, N);
  const SemilinearSolver sa(a, g), sb(b, g);
  const double p = a.norm.p;

  auto diff_norm = [&](const TimeProfile& fa, const TimeProfile& fb, double bexp) {
    auto f = [&](double t) { return Vec(fa(t) - fb(t)); };
    return fbeta_sigma_norm(WeightedHolderSample::from_function(f, T, N, bexp, a.sigma, p)).norm;
  };
  r.D_F = std::pow(diff_norm(a.F2, b.F2, a.beta), 2);
  r.D_G = std::pow(diff_norm(a.G, b.G, a.beta + 0.5), 2);

  SemilinearOptions o = opt;
  o.record_iters = 0;
  const MomentTable tab = ensemble_moments(
      paths, 3, N + 2,
      [&](std::size_t i) {
        const BrownianPath w = sample_brownian(g, seed, i);
        const Vec xa = a.xi.sample(seed, i), xb = b.xi.sample(seed, i);
        const Mat Xa = sa.solve(w, xa, o).X.values, Xb = sb.solve(w, xb, o).X.values;
        Mat rec = Mat::Zero(3, N + 2);
        for (int k = 0; k <= N; ++k) {
          const Vec dx = Xa.col(k) - Xb.col(k);
          rec(0, k) = std::pow(lp_norm(fractional_power_apply(a.A, a.eta, dx), p), 2);
          rec(1, k) = std::pow(lp_norm(fractional_power_apply(a.A, a.beta, dx), p), 2);
          rec(2, k) = std::pow(lp_norm(dx, p), 2);
        }
        const Vec dxi = xa - xb;
        rec(0, N + 1) = std::pow(lp_norm(dxi, p), 2);
        rec(1, N + 1) = std::pow(lp_norm(fractional_power_apply(a.A, a.beta, dxi), p), 2);
        return rec;
      },
      eo);
  const Mat& m = tab.mean();
  r.D_xi = m(0, N + 1);
  r.D_Axi = m(1, N + 1);

  const double e = a.eta, be = a.beta, c = a.constants.c, cf2 = da.c_F1 * da.c_F1;
  const double i02 = da.iota_0 * da.iota_0, ib2 = da.iota_beta * da.iota_beta,
               ie2 = da.iota_eta * da.iota_eta, ieb2 = da.iota_eta_beta * da.iota_eta_beta;
  const Vec t = g.nodes();
  const std::vector<VolterraKernelTerm> kern{{8 * cf2 * ib2, 2 * be}, {8 * cf2 * ie2, 2 * e}};
  auto tp = [&](int k, double ex) { return k == 0 ? (ex == 0 ? 1.0 : 0.0) : std::pow(t(k), ex); };

  // unit-data forcings of the q-majorant, one per data component
  auto forcing22 = [&](int comp) {
    Vec f(N + 1);
    for (int k = 0; k <= N; ++k) {
      if (comp == 0) f(k) = k == 0 ? 4 * ie2 : 4 * (ib2 * tp(k, 2 * (e - be)) + ie2);
      else if (comp == 1)
        f(k) = 4 * (ib2 * std::pow(beta(be, 1 - be), 2) * tp(k, 2 * e) + ie2 * std::pow(beta(be, 1 - e), 2) * tp(k, 2 * be));
      else
        f(k) = 4 * c * (ib2 * beta(2 * be, 1 - 2 * be) * tp(k, 2 * e) + ie2 * beta(2 * be, 1 - 2 * e) * tp(k, 2 * be));
    }
    return f;
  };
  auto forcing23 = [&](int comp) {
    if (comp > 0) return forcing22(comp);
    Vec f(N + 1);
    for (int k = 0; k <= N; ++k) f(k) = 4 * (i02 * tp(k, 2 * e) + ieb2 * tp(k, 2 * be));
    return f;
  };
  // E|dX|^2 majorant from q, right-node product integration of s^{-2 eta} q(s)
  auto full_bound = [&](int comp, const Vec& q) {
    Vec M(N + 1);
    double acc = 0.0;
    for (int k = 0; k <= N; ++k) {
      if (k > 0) {
        const double w = (std::pow(t(k), 1 - 2 * e) - std::pow(t(k - 1), 1 - 2 * e)) / (1 - 2 * e);
        acc += w * q(k);
      }
      const double base = comp == 0 ? 4 * i02
                          : comp == 1 ? 4 * i02 * std::pow(beta(be, 1), 2) * tp(k, 2 * be)
                                      : 4 * c * beta(2 * be, 1) * tp(k, 2 * be);
      M(k) = q(k) + base + 8 * i02 * cf2 * t(k) * acc;
    }
    return M;
  };
  for (int comp = 0; comp < 3; ++comp) {
    const Vec q22 = solve_volterra_majorant(t, forcing22(comp), 2 * e + 1, 2 * e, kern);
    const Vec M = full_bound(comp, q22);
    const Vec q23 = solve_volterra_majorant(t, forcing23(comp), 2 * e + 1, 2 * e, kern);
    for (int k = 1; k <= N; ++k) {
      const double R = comp == 0 ? 1.0 : std::pow(t(k), 2 * be);
      r.C22 = std::max(r.C22, M(k) / R);
      r.C23 = std::max(r.C23, q23(k) / std::pow(t(k), 2 * be));
    }
  }

  const bool no_data = r.D_xi == 0 && r.D_Axi == 0 && r.D_F == 0 && r.D_G == 0;
  r.pass = true;
  for (int k = 1; k <= N; ++k) {
    const double tk = t(k);
    const double l22 = std::pow(tk, 2 * e) * (m(0, k) + m(1, k)) + m(2, k);
    const double rhs22 = r.C22 * (r.D_xi + std::pow(tk, 2 * be) * (r.D_F + r.D_G));
    const double l23 = std::pow(tk, 2 * (e - be)) * (m(0, k) + m(1, k));
    const double rhs23 = r.C23 * (r.D_Axi + r.D_F + r.D_G);
    if (no_data && l22 > 0) throw Error("coupling", "identical data produced different solutions");
    r.t.push_back(tk);
    r.lhs22.push_back(l22);
    r.rhs22.push_back(rhs22);
    r.lhs23.push_back(l23);
    r.rhs23.push_back(rhs23);
    r.sup_lhs22 = std::max(r.sup_lhs22, l22);
    if (rhs22 > 0) r.max_ratio22 = std::max(r.max_ratio22, l22 / rhs22);
    if (rhs23 > 0) r.max_ratio23 = std::max(r.max_ratio23, l23 / rhs23);
    if (l22 > rhs22 || l23 > rhs23) r.pass = false;
  }
  return r;
}

CriticalReport solve_critical(const SemilinearSolver& solver, std::size_t paths, std::uint64_t seed,
                              const SemilinearOptions& opt, const EnsembleOptions& eo) {
  const SemilinearSpec& s = solver.spec();
  require(s.critical, "domain", "critical solve needs critical = true");
  const TimeGrid& g = solver.grid();
  CriticalReport r;
  r.study = semilinear_picard_study(solver, paths, seed, opt, eo);
  const SemilinearData d = semilinear_data(s, g);
  const LinearConstants lc = linear_constants(s.linear_part(), g);
  const double xi2 = s.xi.moment_bound(2.0, s.norm);
  const double e = s.eta, c2 = d.c_F1 * d.c_F1, k2 = solver.certificate().kappa2;
  const double i02 = d.iota_0 * d.iota_0;
  const MomentTable tab = norm_profile(solver, paths, seed, opt, eo, 0.0);
  r.moment_pass = true;
  for (int k = 1; k <= g.N; ++k) {
    const double t = g.node(k);
    r.t.push_back(t);
    r.second_moment.push_back(tab.mean()(0, k));
    r.eta_moment.push_back(tab.mean()(2, k));
    if (t > solver.certificate().T_local * (1 + 1e-12)) {
      r.bound.push_back(NAN);
      continue;
    }
    const double bd = 2 * lc.rho * (xi2 + d.F2_sq + d.G_sq) +
                      6 * i02 * (c2 * k2 * std::pow(t, 2 * (1 - e)) / (1 - 2 * e) + (c2 * k2 + d.F1_zero_sq) * t * t);
    r.bound.push_back(bd);
    if (tab.mean()(0, k) > bd) r.moment_pass = false;
  }
  r.eta_slope = loglog_slope(r.t, r.eta_moment, 0, std::max<std::size_t>(2, g.N / 4));
  r.pass = r.study.pass && r.moment_pass;
  return r;
}

}  // namespace spde
