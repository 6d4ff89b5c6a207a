#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "spde/sectorial.hpp"

#include <cmath>
#include <complex>

using namespace spde;

TEST_CASE("semigroup action") {
  const SpectralOperator a((Vec(1) << 2.0).finished());
  CHECK(semigroup_apply(a, 0.5, Vec::Ones(1))(0) == doctest::Approx(std::exp(-1.0)));
  const SpectralOperator b((Vec(2) << 1.0, 3.0).finished());
  const Vec y = semigroup_apply(b, 1.0, Vec::Ones(2));
  CHECK(y(0) == doctest::Approx(0.367879).epsilon(1e-6));
  CHECK(y(1) == doctest::Approx(0.049787).epsilon(1e-5));
  CHECK_THROWS_AS(semigroup_apply(b, -1.0, Vec::Ones(2)), Error);
}

TEST_CASE("semigroup law S(t)S(s) = S(t+s)") {
  const SpectralOperator a = SpectralOperator::dirichlet_laplacian_1d(6, 2.0);
  const Vec x = Vec::LinSpaced(6, -1, 2);
  for (double t : {0.0, 0.1, 0.7})
    for (double s : {0.0, 0.05, 1.3}) {
      const Vec lhs = semigroup_apply(a, t, semigroup_apply(a, s, x));
      const Vec rhs = semigroup_apply(a, t + s, x);
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("fractional powers") {
  const SpectralOperator a((Vec(2) << 2.0, 8.0).finished());
  const Vec y = fractional_power_apply(a, 1.0 / 3.0, Vec::Ones(2));
  CHECK(y(0) == doctest::Approx(1.259921).epsilon(1e-6));
  CHECK(y(1) == doctest::Approx(2.0));
  const Vec z = negative_power_apply(a, 1.0 / 3.0, y);
  CHECK((z - Vec::Ones(2)).norm() <= 1e-14);
}

TEST_CASE("dirichlet generator eigenvalues") {
  const SpectralOperator a = SpectralOperator::dirichlet_laplacian_1d(4, 3.0);
  for (int k = 1; k <= 4; ++k) CHECK(a.eigenvalues()(k - 1) == doctest::Approx(3.0 * std::pow(k * M_PI / 5, 2)));
}

TEST_CASE("symmetric input is diagonalised") {
  Mat m(2, 2);
  m << 2, 1, 1, 2;
  const SpectralOperator a = SpectralOperator::from_symmetric(m);
  CHECK(a.min_eigenvalue() == doctest::Approx(1.0));
  CHECK(a.max_eigenvalue() == doctest::Approx(3.0));
  const Vec x = (Vec(2) << 0.3, -1.1).finished();
  CHECK((a.from_spectral(a.to_spectral(x)) - x).norm() <= 1e-14);
  Mat bad(2, 2);
  bad << 2, 1, 0, 2;
  CHECK_THROWS_AS(SpectralOperator::from_symmetric(bad), Error);
}

TEST_CASE("iota closed form against 1-D maximisation") {
  const SpectralOperator a((Vec(1) << 1.0).finished());
  CHECK(iota_closed_form(a, 1.0, 2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(iota_closed_form(a, 0.5, 2.0) == doctest::Approx(std::sqrt(0.5) * std::exp(-0.5)).epsilon(1e-12));
  CHECK(iota_closed_form(a, 0.0, 2.0) == doctest::Approx(1.0));
  // brute force sup_t t^nu lambda^nu e^{-lambda t}
  const SpectralOperator b((Vec(3) << 0.2, 1.0, 7.0).finished());
  for (double nu : {0.25, 0.5, 1.0})
    for (double T : {0.1, 1.0, 10.0}) {
      double best = 0;
      for (int i = 1; i <= 200000; ++i) {
        const double t = T * i / 200000;
        for (int k = 0; k < 3; ++k) {
          const double l = b.eigenvalues()(k);
          best = std::max(best, std::pow(t * l, nu) * std::exp(-l * t));
        }
      }
      CHECK(iota_closed_form(b, nu, T) == doctest::Approx(best).epsilon(1e-6));
      CHECK(iota_grid(b, nu, T, 2000) == doctest::Approx(best).epsilon(1e-6));
    }
}

TEST_CASE("resolvent bound samples") {
  const SpectralOperator a((Vec(1) << 1.0).finished());
  CHECK(resolvent_bound_check(a, M_PI / 4, 0.5, {{-1.0, 0.0}}).pass);
  CHECK_FALSE(resolvent_bound_check(a, M_PI / 4, 0.4, {{-1.0, 0.0}}).pass);
  const ResolventReport far = resolvent_bound_check(a, M_PI / 4, 1.0, {{-1e6, 0.0}});
  CHECK(far.pass);
  CHECK(far.worst_ratio == doctest::Approx(1.0).epsilon(1e-5));
  const ResolventReport im = resolvent_bound_check(a, M_PI / 4, 1.0, {{0.0, -1.0}});
  CHECK(im.worst_ratio == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("S(t) - I against A^{-theta}") {
  const SpectralOperator a((Vec(1) << 1.0).finished());
  const SmiReport r1 = smi_bound_check(a, 1.0, 1.0, 2.0);
  CHECK(r1.lhs == doctest::Approx(1 - std::exp(-1.0)));
  CHECK(r1.pass);
  const SmiReport r2 = smi_bound_check(a, 0.5, 0.25, 2.0);
  CHECK(r2.lhs == doctest::Approx(1 - std::exp(-0.25)).epsilon(1e-6));
  CHECK(r2.rhs == doctest::Approx(std::sqrt(0.5) * std::exp(-0.5) / 0.5 * 0.5).epsilon(1e-6));
  CHECK(r2.pass);
}

TEST_CASE("phi1 weights") {
  const SpectralOperator a((Vec(3) << 1e-12, 1.0, 50.0).finished());
  const Vec w = phi1_weights(a, 0.1);
  CHECK(w(0) == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(w(1) == doctest::Approx(1 - std::exp(-0.1)).epsilon(1e-14));
  CHECK(w(2) == doctest::Approx((1 - std::exp(-5.0)) / 50).epsilon(1e-14));
}
