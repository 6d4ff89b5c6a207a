#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "spde/registry.hpp"
#include "spde/semilinear.hpp"

#include <cmath>
#include <string>

using namespace spde;
using registry::Json;

namespace {

SemilinearSpec make_spec(const Json& F1, int d = 1, double scale = 1.0, bool critical = false) {
  const SpectralOperator A = d == 1 ? SpectralOperator(Vec::Constant(1, scale))
                                    : SpectralOperator::dirichlet_laplacian_1d(d, scale);
  SemilinearSpec s{A,
                   registry::make_nonlinearity(F1, A, 0.4, 0.35, critical),
                   TimeProfile::constant(Vec::Ones(d)),
                   TimeProfile::constant(Vec::Ones(d)),
                   InitialLaw::deterministic(Vec::Constant(d, 1.0 / std::sqrt(double(d))))};
  s.norm = NormSpec(2, d);
  s.constants = TypeConstants(1, 1);
  s.critical = critical;
  return s;
}

std::string error_of(const SemilinearSpec& s) {
  try {
    s.validate();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("exponent chain validation") {
  SemilinearSpec s = make_spec({{"family", "sin_eta"}});
  CHECK(error_of(s).empty());
  s.beta = 0.45;
  const std::string e = error_of(s);
  CHECK(e.find("schema") == 0);
  CHECK(e.find("beta") != std::string::npos);
  CHECK(e.find("eta") != std::string::npos);
  s = make_spec({{"family", "sin_eta"}});
  s.eta = 0.6;
  CHECK_FALSE(error_of(s).empty());
  s = make_spec({{"family", "sin_eta"}});
  s.sigma = 0.4;
  CHECK_FALSE(error_of(s).empty());
  s = make_spec({{"family", "sin_eta"}});
  s.gamma = 0.45;
  CHECK(error_of(s).empty());
  s.gamma = 0.05;
  CHECK_FALSE(error_of(s).empty());
  s.gamma = 0.55;
  CHECK_FALSE(error_of(s).empty());
}

TEST_CASE("certificate self-consistency") {
  const SemilinearSpec s = make_spec({{"family", "sin_eta"}, {"amp", 1}});
  const TimeGrid g(1.0, 256);
  const SemilinearData d = semilinear_data(s, g);
  CHECK(d.c_F1 == doctest::Approx(1.0));
  const KappaCertificate k = kappa_and_horizon(d);
  CHECK(k.kappa2 == doctest::Approx(2 * std::max(k.C1, k.C2) * (1 + d.margin)));
  CHECK(k.T_local > 0);
  CHECK(k.T_local <= 1.0);
  auto holds = [&](double S) {
    const auto v = certificate_inequalities(d, k.kappa2, S);
    return v[0] <= k.kappa2 / 2 && v[1] <= k.kappa2 / 2 && v[2] < 1;
  };
  if (!k.capped) {
    CHECK(holds(k.T_local));
    CHECK_FALSE(holds(1.1 * k.T_local));
    CHECK_FALSE(holds(k.T_local * (1 + 1e-6)));
    CHECK(k.hold_at_T_local);
    CHECK(k.violated_at_1_1);
  }
}

TEST_CASE("larger initial data do not enlarge the horizon") {
  SemilinearSpec s = make_spec({{"family", "sin_eta"}, {"amp", 1}});
  const TimeGrid g(1.0, 256);
  const KappaCertificate a = kappa_and_horizon(semilinear_data(s, g));
  s.xi = InitialLaw::deterministic(s.xi.mean * std::sqrt(2.0));
  const KappaCertificate b = kappa_and_horizon(semilinear_data(s, g));
  CHECK(b.C1 >= a.C1);
  CHECK(b.C2 >= a.C2);
  CHECK(b.kappa2 >= a.kappa2);
  CHECK(b.T_local <= a.T_local);
}

TEST_CASE("zero nonlinearity reduces to the linear solver") {
  const SemilinearSpec s = make_spec({{"family", "zero"}}, 4, 10.0);
  const TimeGrid g(1.0, 128);
  const SemilinearSolver solver(s, g);
  const LinearAdditiveSolver lin(s.linear_part(), g);
  for (std::size_t i = 0; i < 5; ++i) {
    const BrownianPath w = sample_brownian(g, 1, i);
    const Vec xi = s.xi.sample(1, i);
    const Mat diff = solver.solve(w, xi, {}).X.values - lin.solve(w, xi).X.values;
    CHECK(diff.cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("restart from an interior node reproduces the path") {
  const SemilinearSpec s = make_spec({{"family", "sin_eta"}, {"amp", 1}}, 4, 10.0);
  const TimeGrid g(1.0, 128);
  const SemilinearSolver solver(s, g);
  const BrownianPath w = sample_brownian(g, 2, 0);
  const SemilinearPath full = solver.solve(w, s.xi.mean, {});
  CHECK(full.converged);
  const Mat noise = solver.noise_increments(w);
  for (int k0 : {0, 1, 37, 100}) {
    // windows are aligned to the restart node; equality holds when k0 is a window boundary
    SemilinearOptions o;
    o.window_steps = 1;
    const SemilinearPath a = solver.solve_from(noise, 0, s.xi.mean, o);
    const SemilinearPath b = solver.solve_from(noise, k0, a.X.values.col(k0), o);
    for (int k = k0; k <= g.N; ++k) CHECK(b.X.values.col(k) == a.X.values.col(k));
  }
  const int ws = solver.window_steps({});
  if (2 * ws < g.N) {
    const SemilinearPath b = solver.solve_from(noise, 2 * ws, full.X.values.col(2 * ws), {});
    CHECK(b.X.values.rightCols(g.N + 1 - 2 * ws) == full.X.values.rightCols(g.N + 1 - 2 * ws));
  }
}

TEST_CASE("Picard study and moment profiles") {
  const SemilinearSpec s = make_spec({{"family", "sin_eta"}, {"amp", 1}}, 4, 10.0);
  const SemilinearSolver solver(s, TimeGrid(1.0, 256));
  SemilinearOptions o;
  o.record_iters = 6;
  const SemilinearStudy st = semilinear_picard_study(solver, 100, 3, o);
  CHECK(st.upsilon_ok);
  CHECK(st.pass);
  for (std::size_t m = 0; m < st.ratio.size(); ++m) CHECK(st.ratio[m] <= st.theoretical_ratio + 3 * st.ratio_se[m]);
  const MomentProfileReport mp = moment_profile_check(solver, 100, 4);
  CHECK(mp.pass);
}

TEST_CASE("ball violations are reported") {
  const SemilinearSpec s = make_spec({{"family", "sin_eta"}, {"amp", 1}}, 4, 10.0);
  try {
    dependence_check(s, s, Balls{1e-3, 1e-3, 1e-3}, 1.0, 64, 10, 1);
    FAIL("expected a ball error");
  } catch (const Error& e) {
    CHECK(e.kind() == "ball");
  }
}

TEST_CASE("dependence on F2") {
  const SemilinearSpec a = make_spec({{"family", "sin_eta"}, {"amp", 1}}, 4, 10.0);
  SemilinearSpec b = a;
  b.F2 = TimeProfile::constant(Vec::Constant(4, 1.05));
  const SemilinearDependenceReport r = dependence_check(a, b, Balls{10, 10, 10}, 1.0, 64, 200, 5);
  CHECK(r.pass);
  CHECK(r.max_ratio22 <= 1);
  CHECK(r.max_ratio23 <= 1);
  CHECK(r.D_F > 0);
  CHECK(r.D_xi == 0);
}

TEST_CASE("critical case") {
  const SemilinearSpec s = make_spec({{"family", "sin_eta_plus_x"}}, 4, 10.0, true);
  const SemilinearSolver solver(s, TimeGrid(1.0, 512));
  CHECK(solver.certificate().T_local > 0);
  const CriticalReport r = solve_critical(solver, 100, 6);
  CHECK(r.study.upsilon_ok);
  CHECK(r.moment_pass);
  CHECK(r.pass);
}

TEST_CASE("unknown nonlinearity family") {
  try {
    registry::make_nonlinearity({{"family", "tanh"}}, SpectralOperator(Vec::Ones(1)), 0.4, 0.35, false);
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("sin_eta") != std::string::npos);
  }
}
