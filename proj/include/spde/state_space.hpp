#pragma once

#include "spde/common.hpp"

#include <cmath>
#include <vector>

namespace spde {

/// The state space E = (R^d, l^p).
struct NormSpec {
  double p = 2.0;
  int d = 1;

  NormSpec() = default;
  NormSpec(double p_, int d_);
};

/// A finite element of E; NaN/Inf rejected on construction.
struct VectorState {
  Vec coords;

  explicit VectorState(Vec c);
  int dim() const { return static_cast<int>(coords.size()); }
};

/// M-type 2 constant c(E) and the BDG-style constant c_p(E).
struct TypeConstants {
  double c = 1.0;
  double c_p = 1.0;

  TypeConstants() = default;
  TypeConstants(double c_, double c_p_);
  /// c(E) = p - 1 and c_q = ((q-1) c(E))^{q/2} for moment order q.
  static TypeConstants defaults(const NormSpec& spec, double moment_order);
};

template <class Derived>
double lp_norm(const Eigen::MatrixBase<Derived>& x, double p) {
  if (p == 2.0) return x.norm();
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(std::abs(x(i)), p);
  return std::pow(s, 1.0 / p);
}

double norm(const Vec& x, const NormSpec& spec);
inline double norm(const VectorState& x, const NormSpec& spec) { return norm(x.coords, spec); }

struct MType2Report {
  std::size_t samples = 0;
  double sup_second_moment = 0.0;    // sup_n E|M_n|^2
  double increment_sum = 0.0;        // sum_n E|M_n - M_{n-1}|^2
  double ratio = 0.0;
  double ratio_se = 0.0;
  double candidate_c = 0.0;
  bool pass = false;
};

/// Streaming accumulator over martingale samples sharing a step count.
class MType2Accumulator {
public:
  MType2Accumulator(const NormSpec& spec, int steps);
  /// path: d x (steps+1), column n is M_n.
  void add(const Mat& path);
  MType2Report report(double candidate_c) const;

private:
  NormSpec spec_;
  int steps_;
  std::size_t n_ = 0;
  Vec sum_m2_, sumsq_m2_;   // per n: |M_n|^2 moments
  Vec cross_;                // per n: sum |M_n|^2 * D
  double sum_d_ = 0.0, sumsq_d_ = 0.0;  // D = sum_k |dM_k|^2
};

MType2Report mtype2_empirical(const std::vector<Mat>& samples, const NormSpec& spec,
                              double candidate_c);

}  // namespace spde
