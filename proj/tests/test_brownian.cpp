#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "spde/brownian.hpp"
#include "spde/ensemble.hpp"
#include "spde/sectorial.hpp"

#include <cmath>
#include <sstream>

using namespace spde;

TEST_CASE("paths are pure functions of (seed, index)") {
  const TimeGrid g(1.0, 64);
  const BrownianPath a = sample_brownian(g, 5, 17), b = sample_brownian(g, 5, 17);
  CHECK(a.w == b.w);
  CHECK(a.w(0) == 0.0);
  CHECK(sample_brownian(g, 5, 18).w != a.w);
  CHECK(sample_brownian(g, 6, 17).w != a.w);
}

TEST_CASE("dyadic refinement passes through the coarse path") {
  const BrownianPath coarse = sample_brownian(TimeGrid(1.0, 64), 9, 3);
  const BrownianPath fine = sample_brownian(TimeGrid(1.0, 256), 9, 3);
  for (int k = 0; k <= 64; ++k) CHECK(fine.w(4 * k) == doctest::Approx(coarse.w(k)).epsilon(1e-14));
}

TEST_CASE("increment variance matches dt on a non-dyadic grid") {
  const TimeGrid g(2.0, 100);
  double s = 0;
  const int P = 2000;
  for (int i = 0; i < P; ++i) s += sample_brownian(g, 1, i).increments().squaredNorm();
  const double per = s / (P * g.N);
  CHECK(per == doctest::Approx(g.dt()).epsilon(0.02));
}

TEST_CASE("w(1) is standard normal") {
  const TimeGrid g(1.0, 1024);
  const MomentTable t = ensemble_moments(20000, 1, 2, [&](std::size_t i) {
    const double x = sample_brownian(g, 21, i).w(g.N);
    return (Mat(1, 2) << x, x * x).finished();
  });
  CHECK(std::abs(t.mean()(0, 0)) <= 3 * t.standard_error()(0, 0));
  CHECK(std::abs(t.mean()(0, 1) - 1) <= 3 * t.standard_error()(0, 1));
}

TEST_CASE("Ito integral of w against dw") {
  const TimeGrid g(1.0, 256);
  const MomentTable t = ensemble_moments(20000, 1, 2, [&](std::size_t i) {
    const BrownianPath w = sample_brownian(g, 22, i);
    AdaptedProcess f{g, w.w.transpose()};
    const double I = integrate_step(f, w)(0);
    double ref = 0;
    for (int k = 0; k < g.N; ++k) ref += w.w(k) * w.increment(k);
    REQUIRE(I == doctest::Approx(ref).epsilon(1e-12));
    return (Mat(1, 2) << I, I * I).finished();
  });
  CHECK(std::abs(t.mean()(0, 0)) <= 3 * t.standard_error()(0, 0));
  // E(int w dw)^2 = int_0^1 s ds, minus the O(dt) left-point term
  CHECK(std::abs(t.mean()(0, 1) - 0.5 * (1 - g.dt())) <= 3 * t.standard_error()(0, 1));
}

TEST_CASE("partial sums are adapted and end at the full integral") {
  const TimeGrid g(1.0, 32);
  const BrownianPath w = sample_brownian(g, 4, 0);
  AdaptedProcess f{g, Mat::Ones(2, g.N + 1)};
  f.values.row(1) = w.w.transpose();
  const AdaptedProcess I = integrate_partial(f, w);
  CHECK(I.values.col(0).norm() == 0.0);
  CHECK((I.values.col(g.N) - integrate_step(f, w)).norm() <= 1e-14);
  CHECK(I.values(0, g.N) == doctest::Approx(w.w(g.N)));
}

TEST_CASE("ensemble reduction does not depend on the worker count") {
  const TimeGrid g(1.0, 128);
  auto run = [&](unsigned workers) {
    return ensemble_moments(
        3000, 1, g.N + 1, [&](std::size_t i) { return Mat(sample_brownian(g, 8, i).w.transpose()); },
        EnsembleOptions{workers, 97});
  };
  const MomentTable a = run(1), b = run(4);
  CHECK(a.mean() == b.mean());
  CHECK(a.variance() == b.variance());
}

TEST_CASE("stochastic convolution covariance per mode") {
  const SpectralOperator a((Vec(2) << 1.0, 3.0).finished());
  const TimeGrid g(1.0, 64);
  const StepIntegrand phi = StepIntegrand::from_function(g, 2, [](double) { return Vec::Ones(2).eval(); });
  const ExactGaussKernel k = make_exact_gauss_kernel(a, g.dt());
  const MomentTable t = ensemble_moments(20000, 1, 3, [&](std::size_t i) {
    const AdaptedProcess y = stochastic_convolution(a, phi, sample_brownian(g, 33, i), k);
    return (Mat(1, 3) << y.values.col(16).squaredNorm(), y.values.col(32).squaredNorm(),
            y.values.col(64).squaredNorm())
        .finished();
  });
  int c = 0;
  for (double s : {0.25, 0.5, 1.0}) {
    double oracle = 0;
    for (double l : {1.0, 3.0}) oracle += (1 - std::exp(-2 * l * s)) / (2 * l);
    CHECK(std::abs(t.mean()(0, c) - oracle) <= 3 * t.standard_error()(0, c));
    ++c;
  }
}

TEST_CASE("exact kernel covariance") {
  const SpectralOperator a((Vec(2) << 1.0, 3.0).finished());
  const ExactGaussKernel k = make_exact_gauss_kernel(a, 0.1);
  const Mat cov = k.root * k.root.transpose();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double l = a.eigenvalues()(i) + a.eigenvalues()(j);
      CHECK(cov(i, j) == doctest::Approx((1 - std::exp(-l * 0.1)) / l).epsilon(1e-12));
    }
}

TEST_CASE("integral inequality with bounded adapted integrands") {
  const TimeGrid g(1.0, 64);
  const NormSpec ns(4, 1);
  const IntegralInequalityReport r = integral_inequality_report(
      [](const BrownianPath& w) {
        AdaptedProcess f{w.grid, Mat(1, w.grid.N + 1)};
        for (int k = 0; k <= w.grid.N; ++k) f.values(0, k) = std::cos(w.w(k));
        return f;
      },
      g, 4000, 12, ns, TypeConstants::defaults(ns, 4), 4);
  CHECK(r.pass);
  CHECK(r.lhs <= r.rhs);
}

TEST_CASE("process CSV rows") {
  const TimeGrid g(1.0, 2);
  AdaptedProcess x{g, (Mat(1, 3) << 0.0, 0.5, 1.0).finished()};
  std::ostringstream os;
  write_process_csv_header(os, 1);
  write_process_csv_rows(os, 7, x);
  CHECK(os.str().find("path_index,t,x1") == 0);
  CHECK(os.str().find("7,0.5,0.5") != std::string::npos);
}
