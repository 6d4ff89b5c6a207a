#include "spde/holder.hpp"

#include "spde/state_space.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace spde {

WeightedHolderSample::WeightedHolderSample(Vec t_, Mat values_, double beta_, double sigma_,
                                           double p_)
    : t(std::move(t_)), values(std::move(values_)), beta(beta_), sigma(sigma_), p(p_) {
  require(sigma > 0 && sigma < beta && beta <= 1, "domain", "need 0 < sigma < beta <= 1");
  require(t.size() >= 2 && values.cols() == t.size(), "dimension", "sample needs >= 2 nodes");
  for (Eigen::Index k = 1; k < t.size(); ++k)
    require(t(k) > t(k - 1), "grid", "sample nodes must be strictly increasing");
  require(t(0) >= 0, "grid", "sample nodes must be nonnegative");
  require(!(t(0) == 0 && beta < 1), "grid", "grid contains t=0 while beta < 1");
  require(values.allFinite(), "domain", "sample has non-finite values");
}

WeightedHolderSample WeightedHolderSample::from_function(const std::function<Vec(double)>& f,
                                                         double T, int N, double beta,
                                                         double sigma, double p) {
  require(T > 0 && N >= 2, "domain", "invalid sampling grid");
  Vec t(N);
  Vec v0 = f(T / N);
  Mat vals(v0.size(), N);
  for (int k = 1; k <= N; ++k) {
    t(k - 1) = (k == N) ? T : T * k / N;
    vals.col(k - 1) = (k == 1) ? v0 : f(t(k - 1));
  }
  return WeightedHolderSample(std::move(t), std::move(vals), beta, sigma, p);
}

std::vector<std::string> HolderReport::field_names() {
  return {"weight_sup", "holder_sup", "limit_defect", "norm", "nodes", "smallest_node",
          "refinement_delta"};
}

std::vector<double> HolderReport::field_values() const {
  return {weight_sup, holder_sup, limit_defect, norm, static_cast<double>(nodes), smallest_node,
          refinement_delta};
}

std::string HolderReport::to_json() const {
  nlohmann::ordered_json j;
  const auto names = field_names();
  const auto vals = field_values();
  for (std::size_t i = 0; i < names.size(); ++i) j[names[i]] = vals[i];
  j["nodes"] = nodes;
  return j.dump();
}

namespace {

/// Pairwise weighted quotients; uniform grids reuse a (t-s)^sigma table.
struct PairKernel {
  const Vec& t;
  const Mat& v;
  double sigma, p, a;
  Vec sw;             // s^{a}
  Vec lag_pow;        // (k h)^{-sigma} for uniform grids
  bool uniform = false;

  PairKernel(const Vec& t_, const Mat& v_, double sigma_, double p_, double a_)
      : t(t_), v(v_), sigma(sigma_), p(p_), a(a_) {
    const Eigen::Index n = t.size();
    sw.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) sw(k) = a == 0 ? 1.0 : std::pow(t(k), a);
    const double h = t(1) - t(0);
    uniform = true;
    for (Eigen::Index k = 1; k < n && uniform; ++k)
      uniform = std::abs((t(k) - t(k - 1)) - h) <= 1e-9 * h;
    if (uniform) {
      lag_pow.resize(n);
      for (Eigen::Index m = 1; m < n; ++m) lag_pow(m) = std::pow(m * h, -sigma);
    }
  }
  double diff(Eigen::Index k, Eigen::Index j) const {
    if (v.rows() == 1) return std::abs(v(0, k) - v(0, j));
    return lp_norm(v.col(k) - v.col(j), p);
  }
  double q(Eigen::Index k, Eigen::Index j) const {  // j < k
    const double den = uniform ? lag_pow(k - j) : std::pow(t(k) - t(j), -sigma);
    return sw(j) * diff(k, j) * den;
  }
  /// sup_{s<t_k} of the quotient
  double row_sup(Eigen::Index k) const {
    double m = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) m = std::max(m, q(k, j));
    return m;
  }
};

double value_norm(const Mat& v, Eigen::Index k, double p) {
  return v.rows() == 1 ? std::abs(v(0, k)) : lp_norm(v.col(k), p);
}

std::vector<double> dyadic_windows(const Vec& t) {
  const Eigen::Index n = t.size();
  double w0 = t(std::min<Eigen::Index>(15, n - 1));
  std::vector<double> w;
  for (int j = 0; j < 4 && w0 * (1 << j) <= t(n - 1) * (1 + 1e-12); ++j) w.push_back(w0 * (1 << j));
  if (w.empty()) w.push_back(t(n - 1));
  return w;
}

}  // namespace

HolderReport fbeta_sigma_norm(const WeightedHolderSample& f) {
  const Eigen::Index n = f.t.size();
  PairKernel K(f.t, f.values, f.sigma, f.p, 1.0 - f.beta + f.sigma);
  HolderReport r;
  r.nodes = static_cast<int>(n);
  r.smallest_node = f.t(0);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double w = (f.beta == 1.0) ? 1.0 : std::pow(f.t(k), 1.0 - f.beta);
    r.weight_sup = std::max(r.weight_sup, w * value_norm(f.values, k, f.p));
    r.holder_sup = std::max(r.holder_sup, K.row_sup(k));
  }
  const auto windows = dyadic_windows(f.t);
  const double W = windows.front();
  for (Eigen::Index k = 0; k < n && f.t(k) <= W; ++k)
    if (f.t(k) > W / 2) r.limit_defect = std::max(r.limit_defect, K.row_sup(k));
  r.norm = r.weight_sup + r.holder_sup;
  return r;
}

HolderReport fbeta_sigma_norm_refined(const std::function<Vec(double)>& f, double T, int N,
                                      double beta, double sigma, double p) {
  require(N >= 4 && N % 2 == 0, "domain", "refinement study needs an even N >= 4");
  HolderReport fine = fbeta_sigma_norm(WeightedHolderSample::from_function(f, T, N, beta, sigma, p));
  HolderReport coarse =
      fbeta_sigma_norm(WeightedHolderSample::from_function(f, T, N / 2, beta, sigma, p));
  fine.refinement_delta = std::abs(fine.norm - coarse.norm);
  return fine;
}

MembershipReport membership_check(const WeightedHolderSample& f, double tolerance) {
  MembershipReport m;
  m.norm = fbeta_sigma_norm(f);
  PairKernel K(f.t, f.values, f.sigma, f.p, 1.0 - f.beta + f.sigma);
  const Eigen::Index n = f.t.size();
  auto scaled = [&](Eigen::Index k) -> Vec {
    const double w = (f.beta == 1.0) ? 1.0 : std::pow(f.t(k), 1.0 - f.beta);
    return w * f.values.col(k);
  };
  m.limit_value = scaled(0);
  m.windows = dyadic_windows(f.t);
  for (double W : m.windows) {
    double osc = 0.0, defect = 0.0;
    const Vec ref = scaled(0);
    for (Eigen::Index k = 0; k < n && f.t(k) <= W * (1 + 1e-12); ++k) {
      osc = std::max(osc, lp_norm(scaled(k) - ref, f.p));
      if (f.t(k) > W / 2) defect = std::max(defect, K.row_sup(k));
    }
    m.oscillation.push_back(osc);
    m.defects.push_back(defect);
  }
  auto vanishing = [&](const std::vector<double>& s) {
    const double scale = std::max(1.0, m.norm.norm);
    if (s.front() <= tolerance * scale) return true;
    if (s.size() < 2) return false;
    for (std::size_t j = 0; j + 1 < s.size(); ++j)
      if (!(s[j] <= (1.0 - tolerance) * s[j + 1])) return false;
    return true;
  };
  m.limit_exists = vanishing(m.oscillation);
  m.holder_finite = std::isfinite(m.norm.holder_sup) && std::isfinite(m.norm.weight_sup);
  m.defect_vanishing = vanishing(m.defects);
  m.member = m.limit_exists && m.holder_finite && m.defect_vanishing;
  return m;
}

RefinementDivergence holder_refinement_test(const std::function<Vec(double)>& f, double T,
                                            const std::vector<int>& N_list, double beta,
                                            double sigma, double p) {
  require(N_list.size() >= 2, "domain", "refinement test needs at least two grids");
  RefinementDivergence r;
  for (int N : N_list) {
    r.N.push_back(N);
    r.holder_sup.push_back(
        fbeta_sigma_norm(WeightedHolderSample::from_function(f, T, N, beta, sigma, p)).holder_sup);
  }
  r.growth = r.holder_sup.front() > 0 ? r.holder_sup.back() / r.holder_sup.front()
                                      : (r.holder_sup.back() > 0 ? INFINITY : 1.0);
  r.diverging = r.growth > 10.0;
  return r;
}

double holder_norm(const Vec& t, const Mat& values, double sigma, double p) {
  require(t.size() >= 2 && values.cols() == t.size(), "grid", "degenerate grid for holder_norm");
  for (Eigen::Index k = 1; k < t.size(); ++k)
    require(t(k) > t(k - 1), "grid", "degenerate grid for holder_norm");
  require(sigma > 0 && sigma <= 1, "domain", "sigma must lie in (0,1]");
  PairKernel K(t, values, sigma, p, 0.0);
  double m = 0.0;
  for (Eigen::Index k = 1; k < t.size(); ++k) m = std::max(m, K.row_sup(k));
  return m;
}

KolmogorovAccumulator::KolmogorovAccumulator(double T, int N, std::vector<int> lags, double p)
    : T_(T), N_(N), lags_(std::move(lags)), p_(p) {
  require(lags_.size() >= 2, "domain", "Kolmogorov regression needs at least two lags");
  for (int m : lags_) require(m >= 1 && m <= N / 2, "domain", "lag out of range");
  mean_ = Vec::Zero(lags_.size());
  m2_ = Vec::Zero(lags_.size());
}

std::vector<int> KolmogorovAccumulator::dyadic_lags(int N, int finest, int coarsest) {
  std::vector<int> l;
  for (int e = coarsest; e <= finest; ++e) {
    const double steps = N * std::ldexp(1.0, -e);
    require(steps >= 1 && std::abs(steps - std::round(steps)) < 1e-9, "domain",
            "dyadic lag not representable on the grid");
    l.push_back(static_cast<int>(std::round(steps)));
  }
  return l;
}

Vec KolmogorovAccumulator::path_record(const Mat& path) const {
  require(path.cols() == N_ + 1, "dimension", "path has wrong node count");
  const int k0 = static_cast<int>(std::ceil(N_ / 4.0 - 1e-9));
  const int k1 = static_cast<int>(std::floor(3.0 * N_ / 4.0 + 1e-9));
  Vec r(lags_.size());
  for (std::size_t j = 0; j < lags_.size(); ++j) {
    const int m = lags_[j];
    double s = 0.0;
    int cnt = 0;
    for (int k = k0; k + m <= k1; ++k, ++cnt) {
      const double d = path.rows() == 1 ? std::abs(path(0, k + m) - path(0, k))
                                        : lp_norm(path.col(k + m) - path.col(k), p_);
      s += d * d;
    }
    require(cnt > 0, "domain", "lag longer than the interior window");
    r(j) = s / cnt;
  }
  return r;
}

void KolmogorovAccumulator::add_record(const Vec& r) {
  ++n_;
  const Vec delta = r - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta.cwiseProduct(r - mean_);
}

KolmogorovEstimate KolmogorovAccumulator::estimate() const {
  require(n_ >= 1, "domain", "empty ensemble");
  KolmogorovEstimate e;
  const std::size_t L = lags_.size();
  Vec x(L), y(L);
  for (std::size_t j = 0; j < L; ++j) {
    const double h = T_ * lags_[j] / N_;
    e.lags.push_back(h);
    e.mean_sq_increment.push_back(mean_(j));
    e.mean_sq_increment_se.push_back(n_ > 1 ? std::sqrt(m2_(j) / (n_ - 1) / n_) : 0.0);
    require(mean_(j) > 0, "numeric", "zero mean squared increment; exponent undefined");
    x(j) = std::log(h);
    y(j) = std::log(mean_(j));
  }
  const double mx = x.mean(), my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  e.slope = sxy / sxx;
  const Vec resid = (y.array() - my - e.slope * (x.array() - mx)).matrix();
  const double syy = (y.array() - my).square().sum();
  e.r_squared = syy > 0 ? 1.0 - resid.squaredNorm() / syy : 1.0;
  e.slope_se = L > 2 ? std::sqrt(resid.squaredNorm() / (L - 2) / sxx) : 0.0;
  e.exponent = e.slope / 2;
  e.exponent_se = e.slope_se / 2;
  return e;
}

KolmogorovEstimate kolmogorov_exponent(const std::vector<Mat>& paths, double T,
                                       const std::vector<int>& lags, double p) {
  require(!paths.empty(), "domain", "empty ensemble");
  KolmogorovAccumulator acc(T, static_cast<int>(paths.front().cols()) - 1, lags, p);
  for (const auto& x : paths) acc.add(x);
  return acc.estimate();
}

}  // namespace spde
