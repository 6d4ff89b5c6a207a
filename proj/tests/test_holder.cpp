#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "spde/brownian.hpp"
#include "spde/holder.hpp"

#include <cmath>

using namespace spde;

namespace {
Vec scalar(double v) { return Vec::Constant(1, v); }
}  // namespace

TEST_CASE("square root is 1/2-Holder with constant one") {
  const int n = 1024;
  const Vec t = Vec::LinSpaced(n + 1, 0, 1);
  Mat v(1, n + 1);
  for (int k = 0; k <= n; ++k) v(0, k) = std::sqrt(t(k));
  CHECK(holder_norm(t, v, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Lipschitz profile") {
  const Vec t = Vec::LinSpaced(101, 0, 1);
  const Mat v = (3 * t).transpose();
  CHECK(holder_norm(t, v, 1.0) == doctest::Approx(3.0));
}

TEST_CASE("weighted norm of t^{beta-1} t^sigma converges under refinement") {
  const double beta = 0.5, sigma = 0.25;
  const auto f = [&](double t) { return scalar(std::pow(t, beta - 1) * std::pow(t, sigma)); };
  const HolderReport r = fbeta_sigma_norm_refined(f, 1.0, 1 << 12, beta, sigma);
  CHECK(std::isfinite(r.norm));
  CHECK(r.nodes == (1 << 12));
  CHECK(r.refinement_delta <= 0.01 * r.norm);
  // weight_sup: sup t^{1-beta} |f| = sup t^sigma = 1
  CHECK(r.weight_sup == doctest::Approx(1.0));
  CHECK(r.smallest_node == doctest::Approx(1.0 / (1 << 12)));
}

TEST_CASE("membership of a regular profile") {
  const double beta = 0.5, sigma = 0.25;
  const auto f = [&](double t) { return scalar(std::pow(t, beta - 1) * std::pow(t, sigma)); };
  const MembershipReport m = membership_check(WeightedHolderSample::from_function(f, 1.0, 2048, beta, sigma), 0.05);
  CHECK(m.member);
  CHECK(m.limit_exists);
  CHECK(m.limit_value(0) == doctest::Approx(std::pow(1.0 / 2048, sigma)));
}

TEST_CASE("jump at T/2 diverges under refinement") {
  const double beta = 0.75, sigma = 0.5;
  const auto f = [&](double t) { return scalar(std::pow(t, beta - 1) * (t > 0.5 ? 2.0 : 1.0)); };
  const RefinementDivergence r = holder_refinement_test(f, 1.0, {64, 256, 1024, 4096, 16384}, beta, sigma);
  CHECK(r.diverging);
  CHECK(r.growth > 10);
  for (std::size_t i = 1; i < r.holder_sup.size(); ++i) CHECK(r.holder_sup[i] > r.holder_sup[i - 1]);
}

TEST_CASE("t^{beta-1} has weight sup one and limit one") {
  const auto f = [](double t) { return scalar(std::pow(t, -0.5)); };
  const WeightedHolderSample s = WeightedHolderSample::from_function(f, 1.0, 256, 0.5, 0.25);
  CHECK(fbeta_sigma_norm(s).weight_sup == doctest::Approx(1.0));
  CHECK(membership_check(s, 0.05).limit_value(0) == doctest::Approx(1.0));
  const auto z = [](double) { return scalar(0.0); };
  CHECK(fbeta_sigma_norm(WeightedHolderSample::from_function(z, 1.0, 64, 0.5, 0.25)).norm == 0.0);
}

TEST_CASE("embedding into a weaker weight") {
  // f in F^{gamma,sigma} with gamma > beta is in F^{beta,sigma} with no larger weight sup on (0,1]
  const double sigma = 0.2;
  const auto f = [&](double t) { return scalar(std::pow(t, 0.7 - 1) * std::pow(t, sigma)); };
  const HolderReport g = fbeta_sigma_norm(WeightedHolderSample::from_function(f, 1.0, 1024, 0.7, sigma));
  const HolderReport b = fbeta_sigma_norm(WeightedHolderSample::from_function(f, 1.0, 1024, 0.5, sigma));
  CHECK(std::isfinite(b.norm));
  CHECK(b.weight_sup <= g.weight_sup + 1e-12);
}

TEST_CASE("Kolmogorov exponent of Brownian motion") {
  const int N = 512;
  const TimeGrid g(1.0, N);
  KolmogorovAccumulator acc(1.0, N, KolmogorovAccumulator::dyadic_lags(N, 9, 4));
  for (std::size_t i = 0; i < 2000; ++i) acc.add(sample_brownian(g, 2, i).w.transpose());
  const KolmogorovEstimate e = acc.estimate();
  CHECK(acc.count() == 2000);
  CHECK(e.exponent == doctest::Approx(0.5).epsilon(0.1));
  CHECK(e.slope == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("report fields") {
  HolderReport r;
  CHECK(HolderReport::field_names().size() == r.field_values().size());
  CHECK(r.to_json().find("\"norm\"") != std::string::npos);
}
