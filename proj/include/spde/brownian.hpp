#pragma once

#include "spde/common.hpp"
#include "spde/ensemble.hpp"
#include "spde/sectorial.hpp"
#include "spde/state_space.hpp"

#include <functional>
#include <iosfwd>

namespace spde {

/// Uniform grid t_k = k T / N.
struct TimeGrid {
  double T = 1.0;
  int N = 1;

  TimeGrid() = default;
  TimeGrid(double T_, int N_);
  double dt() const { return T / N; }
  double node(int k) const { return k == N ? T : T * k / N; }
  bool dyadic() const { return (N & (N - 1)) == 0; }
  /// log2(N) for dyadic grids, -1 otherwise.
  int level() const;
  Vec nodes() const;
  bool operator==(const TimeGrid& o) const { return T == o.T && N == o.N; }
};

/// Brownian values w(t_k), k = 0..N, reproducible from (seed, path_index).
struct BrownianPath {
  TimeGrid grid;
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  Vec w;  // N+1 values, w(0) = 0

  double increment(int k) const { return w(k + 1) - w(k); }
  Vec increments() const { return w.tail(grid.N) - w.head(grid.N); }
};

/// Dyadic grids use a Brownian-bridge hierarchy keyed by (level, interval), so a
/// refined path passes through its coarse ancestor; other grids draw increment k
/// directly from key k.
BrownianPath sample_brownian(const TimeGrid& grid, std::uint64_t seed, std::uint64_t path_index);

/// Grid process; column k holds the value at t_k.
struct AdaptedProcess {
  TimeGrid grid;
  Mat values;  // d x (N+1)

  int dim() const { return static_cast<int>(values.rows()); }
};

/// Per-step integrand: column k is frozen on [t_k, t_{k+1}).
struct StepIntegrand {
  Mat cells;  // d x N
  bool deterministic = false;

  static StepIntegrand from_process(const AdaptedProcess& f);
  /// Deterministic profile sampled at cell midpoints (safe for t^a singularities at 0).
  static StepIntegrand from_function(const TimeGrid& grid, int d,
                                     const std::function<Vec(double)>& g);
};

/// sum_k f(t_k) dw_k.
Vec integrate_step(const AdaptedProcess& f, const BrownianPath& w);
/// Partial sums I(t_k), k = 0..N.
AdaptedProcess integrate_partial(const AdaptedProcess& f, const BrownianPath& w);

enum class ConvolutionMode { increment, exact_gauss };

/// Precomputed step kernel for exact_gauss mode: for a scalar Brownian motion
/// the mode integrals int e^{-lambda_i (dt-s)} dw_s are jointly Gaussian with
/// covariance (1 - e^{-(l_i+l_j) dt}) / (l_i + l_j); root is its symmetric square root.
struct ExactGaussKernel {
  double dt = 0.0;
  Vec decay;  // e^{-lambda dt}
  Mat root;   // root * root^T = covariance
};
ExactGaussKernel make_exact_gauss_kernel(const SpectralOperator& a, double dt);

AdaptedProcess stochastic_convolution(const SpectralOperator& a, const StepIntegrand& phi,
                                      const BrownianPath& w, ConvolutionMode mode);
AdaptedProcess stochastic_convolution(const SpectralOperator& a, const StepIntegrand& phi,
                                      const BrownianPath& w, const ExactGaussKernel& kernel);

struct IntegralInequalityReport {
  double p = 2.0;
  double lhs = 0.0;      // E sup_t |I_t|^p
  double lhs_se = 0.0;
  double rhs = 0.0;      // (p/(p-1))^p c_p E[int |f|^2]^{p/2}
  double rhs_se = 0.0;
  double ratio = 0.0;
  double ratio_rel_se = 0.0;
  bool pass = false;
};

/// integrand(path) must return a process adapted to that path.
IntegralInequalityReport integral_inequality_report(
    const std::function<AdaptedProcess(const BrownianPath&)>& integrand, const TimeGrid& grid,
    std::size_t paths, std::uint64_t seed, const NormSpec& spec, const TypeConstants& constants,
    double p, const EnsembleOptions& opt = {});

/// RFC-4180 rows "path_index,t,x1,...,xd".
void write_process_csv_header(std::ostream& os, int d);
void write_process_csv_rows(std::ostream& os, std::uint64_t path_index, const AdaptedProcess& x);

}  // namespace spde
