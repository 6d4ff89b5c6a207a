#include "spde/state_space.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace spde {

std::uint64_t seed_from_env(std::uint64_t fallback) {
  const char* s = std::getenv("SPDE_SEED");
  if (!s || !*s) return fallback;
  char* end = nullptr;
  unsigned long long v = std::strtoull(s, &end, 10);
  require(end && *end == '\0', "config", std::string("SPDE_SEED is not an integer: ") + s);
  return static_cast<std::uint64_t>(v);
}

unsigned workers_from_env() {
  const char* s = std::getenv("SPDE_WORKERS");
  if (s && *s) {
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    require(end && *end == '\0' && v > 0, "config",
            std::string("SPDE_WORKERS must be a positive integer: ") + s);
    return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

NormSpec::NormSpec(double p_, int d_) : p(p_), d(d_) {
  require(p >= 2.0 && std::isfinite(p), "domain", "norm exponent p must be >= 2");
  require(d >= 1, "domain", "dimension d must be >= 1");
}

VectorState::VectorState(Vec c) : coords(std::move(c)) {
  require(coords.size() >= 1, "domain", "empty state");
  require(coords.allFinite(), "domain", "state has non-finite coordinates");
}

TypeConstants::TypeConstants(double c_, double c_p_) : c(c_), c_p(c_p_) {
  require(c > 0 && c_p > 0, "domain", "type constants must be positive");
}

TypeConstants TypeConstants::defaults(const NormSpec& spec, double q) {
  const double c = spec.p - 1.0;
  return TypeConstants(c, std::pow(std::max(q - 1.0, 1.0) * c, q / 2.0));
}

double norm(const Vec& x, const NormSpec& spec) {
  require(x.size() == spec.d, "dimension",
          "vector has " + std::to_string(x.size()) + " coordinates, spec expects " +
              std::to_string(spec.d));
  return lp_norm(x, spec.p);
}

MType2Accumulator::MType2Accumulator(const NormSpec& spec, int steps)
    : spec_(spec), steps_(steps), sum_m2_(Vec::Zero(steps + 1)),
      sumsq_m2_(Vec::Zero(steps + 1)), cross_(Vec::Zero(steps + 1)) {
  require(steps >= 1, "domain", "martingale needs at least one step");
}

void MType2Accumulator::add(const Mat& path) {
  require(path.rows() == spec_.d && path.cols() == steps_ + 1, "dimension",
          "martingale sample has wrong shape");
  double d = std::pow(norm(Vec(path.col(0)), spec_), 2);
  for (int n = 1; n <= steps_; ++n)
    d += std::pow(norm(Vec(path.col(n) - path.col(n - 1)), spec_), 2);
  for (int n = 0; n <= steps_; ++n) {
    const double m2 = std::pow(norm(Vec(path.col(n)), spec_), 2);
    sum_m2_(n) += m2;
    sumsq_m2_(n) += m2 * m2;
    cross_(n) += m2 * d;
  }
  sum_d_ += d;
  sumsq_d_ += d * d;
  ++n_;
}

MType2Report MType2Accumulator::report(double candidate_c) const {
  require(n_ > 0, "domain", "empty martingale ensemble");
  MType2Report r;
  const double n = static_cast<double>(n_);
  Eigen::Index arg = 0;
  r.sup_second_moment = sum_m2_.maxCoeff(&arg) / n;
  r.increment_sum = sum_d_ / n;
  r.samples = n_;
  r.candidate_c = candidate_c;
  r.ratio = r.increment_sum > 0 ? r.sup_second_moment / r.increment_sum : 0.0;
  if (n_ > 1 && r.increment_sum > 0) {
    // delta method for a ratio of means
    const double mx = r.sup_second_moment, my = r.increment_sum;
    const double vx = (sumsq_m2_(arg) / n - mx * mx) * n / (n - 1);
    const double vy = (sumsq_d_ / n - my * my) * n / (n - 1);
    const double cxy = (cross_(arg) / n - mx * my) * n / (n - 1);
    const double v = (vx / (my * my) - 2 * mx * cxy / (my * my * my) +
                      mx * mx * vy / (my * my * my * my)) / n;
    r.ratio_se = std::sqrt(std::max(v, 0.0));
  }
  r.pass = r.ratio <= candidate_c + 3.0 * r.ratio_se;
  return r;
}

MType2Report mtype2_empirical(const std::vector<Mat>& samples, const NormSpec& spec,
                              double candidate_c) {
  require(!samples.empty(), "domain", "empty martingale ensemble");
  MType2Accumulator acc(spec, static_cast<int>(samples.front().cols()) - 1);
  for (const auto& s : samples) acc.add(s);
  return acc.report(candidate_c);
}

}  // namespace spde
