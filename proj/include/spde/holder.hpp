#pragma once

#include "spde/common.hpp"

#include <functional>
#include <string>
#include <vector>

namespace spde {

/// Function on (0,T] sampled at increasing nodes, with the exponents of F^{beta,sigma}.
struct WeightedHolderSample {
  Vec t;        // nodes, t(0) > 0 unless beta == 1
  Mat values;   // d x n
  double beta = 1.0;
  double sigma = 0.5;
  double p = 2.0;  // l^p norm of the values

  WeightedHolderSample(Vec t_, Mat values_, double beta_, double sigma_, double p_ = 2.0);
  /// Sample f at t_k = k T / N, k = 1..N.
  static WeightedHolderSample from_function(const std::function<Vec(double)>& f, double T, int N,
                                            double beta, double sigma, double p = 2.0);
};

struct HolderReport {
  double weight_sup = 0.0;
  double holder_sup = 0.0;
  double limit_defect = 0.0;
  double norm = 0.0;
  int nodes = 0;
  double smallest_node = 0.0;
  double refinement_delta = 0.0;  // |norm(N) - norm(N/2)| when produced by a refinement study

  static std::vector<std::string> field_names();
  std::vector<double> field_values() const;
  std::string to_json() const;
};

HolderReport fbeta_sigma_norm(const WeightedHolderSample& f);

/// Norm at N and at N/2 on the uniform grid, with refinement_delta filled in.
HolderReport fbeta_sigma_norm_refined(const std::function<Vec(double)>& f, double T, int N,
                                      double beta, double sigma, double p = 2.0);

struct MembershipReport {
  bool member = false;
  bool limit_exists = false;     // property 1
  bool holder_finite = false;    // property 2
  bool defect_vanishing = false; // property 3
  Vec limit_value;               // t^{1-beta} f(t) at the smallest node
  std::vector<double> windows;   // dyadic windows, smallest first
  std::vector<double> oscillation;  // spread of t^{1-beta} f inside each window
  std::vector<double> defects;      // sup_{t in (W/2,W]} sup_{s<t} weighted quotient
  HolderReport norm;
};

MembershipReport membership_check(const WeightedHolderSample& f, double tolerance);

struct RefinementDivergence {
  std::vector<int> N;
  std::vector<double> holder_sup;
  double growth = 0.0;  // holder_sup(finest) / holder_sup(coarsest)
  bool diverging = false;
};

/// holder_sup across a refinement ladder; growth > 10 flags divergence.
RefinementDivergence holder_refinement_test(const std::function<Vec(double)>& f, double T,
                                            const std::vector<int>& N_list, double beta,
                                            double sigma, double p = 2.0);

/// sup over node pairs |f(t)-f(s)| / (t-s)^sigma.
double holder_norm(const Vec& t, const Mat& values, double sigma, double p = 2.0);

struct KolmogorovEstimate {
  double exponent = 0.0;  // slope / 2
  double exponent_se = 0.0;
  double slope = 0.0;
  double slope_se = 0.0;
  double r_squared = 0.0;
  std::vector<double> lags;
  std::vector<double> mean_sq_increment;
  std::vector<double> mean_sq_increment_se;
};

/// Accumulates, per lag, path-averaged squared increments over pairs (t, t+h)
/// inside [T/4, 3T/4]; paths are folded in call order.
class KolmogorovAccumulator {
public:
  /// lags_in_steps: positive step counts on a uniform grid of N steps over [0,T].
  KolmogorovAccumulator(double T, int N, std::vector<int> lags_in_steps, double p = 2.0);
  static std::vector<int> dyadic_lags(int N, int finest_power, int coarsest_power);

  /// path: d x (N+1)
  Vec path_record(const Mat& path) const;
  void add_record(const Vec& record);
  void add(const Mat& path) { add_record(path_record(path)); }
  KolmogorovEstimate estimate() const;
  std::size_t count() const { return n_; }

private:
  double T_;
  int N_;
  std::vector<int> lags_;
  double p_;
  std::size_t n_ = 0;
  Vec mean_, m2_;
};

KolmogorovEstimate kolmogorov_exponent(const std::vector<Mat>& paths, double T,
                                       const std::vector<int>& lags_in_steps, double p = 2.0);

}  // namespace spde
