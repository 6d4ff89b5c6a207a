#pragma once

#include "spde/brownian.hpp"
#include "spde/ensemble.hpp"
#include "spde/sectorial.hpp"
#include "spde/state_space.hpp"

#include <functional>
#include <string>
#include <vector>

namespace spde {

/// Coefficient F(t,x) or G(t,x) with its declared constants.
struct Coefficient {
  std::string name = "zero";
  std::function<Vec(double, const Vec&)> eval;
  double c1 = 0.0;  // |f(t,x)| <= c1 (1 + |x|)
  double c2 = 0.0;  // |f(t,x) - f(t,y)| <= c2 |x - y|
  bool local = false;
  std::function<double(double)> c_n;     // Lipschitz constant on |x| <= n
  std::function<double(double)> cbar_n;  // growth constant on |x| <= n
  bool state_independent = false;

  Vec operator()(double t, const Vec& x) const { return eval(t, x); }
  double lipschitz_on(double n) const { return local ? c_n(n) : c2; }
  double growth_on(double n) const { return local ? cbar_n(n) : c1; }

  static Coefficient zero(int d);
};

/// Law of the initial value: mean + diag(std) * Z with Z drawn from the initial stream.
struct InitialLaw {
  Vec mean;
  Vec stddev;  // zero for a deterministic initial value

  static InitialLaw deterministic(Vec x);
  static InitialLaw gaussian(Vec mean, Vec stddev);
  Vec sample(std::uint64_t seed, std::uint64_t path) const;
  bool is_deterministic() const { return (stddev.array() == 0).all(); }
  /// Certified upper bound for E|xi|^q in the l^p norm.
  double moment_bound(double q, const NormSpec& spec) const;
};

struct ProblemSpec {
  SpectralOperator A;
  Coefficient F, G;
  InitialLaw xi;
  double T = 1.0;
  double p = 2.0;  // moment order
  NormSpec norm;
  TypeConstants constants;

  void validate() const;
  double c1() const { return F.c1 + G.c1; }
  double c2() const { return F.c2 + G.c2; }
};

/// Largest Tbar <= T_cap with c2 M sqrt(Tbar) (sqrt(Tbar) + p c_p^{1/p}/(p-1)) <= rho.
double contraction_horizon(double c2, double M_T, double p, double c_p, double rho,
                           double T_cap = INFINITY);
/// The contraction factor itself at a given horizon.
double contraction_factor(double c2, double M_T, double p, double c_p, double Tbar);

enum class InitialIterate { semigroup, zero };

struct PicardOptions {
  int max_iter = 400;
  double tol = 1e-12;
  double rho = 0.5;
  InitialIterate init = InitialIterate::semigroup;
  int record_iters = 0;  // record |X_{m+1} - X_m|^p per node for m < record_iters
  bool record_windows = false;
};

struct PicardResult {
  AdaptedProcess X;
  int iterations = 0;        // max over windows
  bool converged = false;    // tolerance reached in every window
  double window_length = 0;  // Tbar
  int windows = 0;
  Mat distance_record;       // record_iters x (N+1)
};

/// Exponential-Euler Picard iteration of Q on chained windows of length <= Tbar.
/// Iterates until bitwise stationarity, so the result is the exact discrete fixed point.
PicardResult solve_global_picard(const ProblemSpec& problem, const TimeGrid& grid,
                                 const BrownianPath& w, const Vec& xi, const PicardOptions& opt);

/// max_k |X(t_k) - [S(t_k) xi + Q1 + Q2](t_k)| with Q recomputed in sum form.
double mild_identity_residual(const ProblemSpec& problem, const BrownianPath& w, const Vec& xi,
                              const AdaptedProcess& X);

struct ContractionStudy {
  double rho = 0.0;
  double Tbar = 0.0;
  double theoretical_factor = 0.0;
  std::vector<double> distance;     // sup_t E|X_{m+1}-X_m|^p
  std::vector<double> distance_se;
  std::vector<double> ratio;        // (D_{m+1}/D_m)^{1/p}
  std::vector<double> ratio_se;
  bool pass = false;                // ratios <= rho + 3 SE for m = 1..5 and geometric decay
};

ContractionStudy picard_contraction_study(const ProblemSpec& problem, const TimeGrid& grid,
                                          std::size_t paths, std::uint64_t seed,
                                          PicardOptions opt, const EnsembleOptions& eo = {});

struct EnsembleSolution {
  TimeGrid grid;
  MomentTable moments;  // rows: |X|^p, |X|^2; columns: nodes
  double xi_moment_p = 0.0;  // empirical E|xi|^p
  double xi_moment_2 = 0.0;
  std::size_t paths = 0;
};

/// Per-path callback receives (path_index, path) for streaming output.
EnsembleSolution solve_ensemble(const ProblemSpec& problem, const TimeGrid& grid, std::size_t paths,
                                std::uint64_t seed, const PicardOptions& opt,
                                const EnsembleOptions& eo = {},
                                const std::function<void(std::size_t, const AdaptedProcess&)>& sink = {});

/// sup E|X|^p <= alpha (1 + E|xi|^p) with
///   K = (3 c1 M)^p (2T)^{p-1} + (3 c1 p M/(p-1))^p c_p T^{(p-2)/2} 2^{p-1},
///   alpha = max(3^p M^p, K T) e^{K T}.
double alpha_theory(double c1, double p, double M_T, double T, double c_p);

struct MomentBoundReport {
  double alpha_theory = 0.0;
  double alpha_empirical = 0.0;
  double sup_moment = 0.0;
  double sup_moment_se = 0.0;
  int argmax_node = 0;
  bool pass = false;
};

MomentBoundReport moment_bound_report(const ProblemSpec& problem, const EnsembleSolution& sol);

/// F_n = F (2 - |x|/n) on n < |x| <= 2n, 0 beyond; same for G. Declared global
/// constants: Lipschitz c_{2n} + cbar_{2n} (2 + 1/n), growth cbar_{2n}.
std::pair<Coefficient, Coefficient> truncate_coefficients(const Coefficient& F, const Coefficient& G,
                                                          double n, const NormSpec& spec);

struct LocalSolutionPath {
  AdaptedProcess X;               // glued path, valid on nodes before the last stopping index
  std::vector<double> levels;
  std::vector<int> tau_index;     // first node with |X_n| > n, N+1 if never
  std::vector<double> tau;        // stopping time on the grid (T if never)
  bool blow_up = false;
  bool glued = true;
  std::string gluing_detail;
};

LocalSolutionPath solve_local(const ProblemSpec& problem, const TimeGrid& grid,
                              const BrownianPath& w, const Vec& xi,
                              const std::vector<double>& n_schedule, const PicardOptions& opt);

struct DependenceReport {
  double C1_theory = 0.0;
  double sup_ratio = 0.0;        // sup_t E|X - Xbar|^2 / E|xi - xibar|^2
  double sup_ratio_se = 0.0;
  double xi_gap = 0.0;           // E|xi - xibar|^2
  std::vector<double> profile;   // E|X(t^tau) - Xbar(t^tau)|^2 per node
  bool pass = false;
};

DependenceReport dependence_experiment(const ProblemSpec& problem, const InitialLaw& xi_bar,
                                       const TimeGrid& grid, std::size_t paths,
                                       std::uint64_t seed, double n, const PicardOptions& opt,
                                       const EnsembleOptions& eo = {});

struct IncrementPairResult {
  double s = 0, t = 0;
  double lhs = 0, lhs_se = 0, rhs = 0;
  bool pass = false;
};
struct TimeIncrementReport {
  double C2_theory = 0.0;
  double alpha = 0.0;
  std::vector<IncrementPairResult> pairs;
  bool pass = true;
};

TimeIncrementReport time_increment_experiment(const ProblemSpec& problem, const TimeGrid& grid,
                                              std::size_t paths, std::uint64_t seed,
                                              const std::vector<std::pair<int, int>>& pairs,
                                              double n, const PicardOptions& opt,
                                              const EnsembleOptions& eo = {});

}  // namespace spde
