#pragma once

#include "spde/additive_linear.hpp"

#include <array>
#include <optional>

namespace spde {

/// F1 acting on spectral coordinates; receives x, A^eta x and A^beta x.
struct Nonlinearity {
  std::string name = "zero";
  std::function<Vec(const Vec&, const Vec&, const Vec&)> eval;
  double c_F1 = 0.0;  // |F1(x)-F1(y)| <= c_F1 (|A^eta(x-y)| + |A^{beta~}(x-y)|)
  bool zero = true;

  static Nonlinearity none(int d);
};

struct SemilinearSpec {
  SpectralOperator A;
  Nonlinearity F1;
  TimeProfile F2, G;
  InitialLaw xi;
  double eta = 0.4, beta = 0.35, sigma = 0.1;
  std::optional<double> gamma;
  bool critical = false;  // beta~ = 0
  NormSpec norm;
  TypeConstants constants;
  ConvolutionMode mode = ConvolutionMode::exact_gauss;
  double kappa_margin = 0.1;

  void validate() const;
  /// Linear part (F1 dropped) as an additive-linear spec under condition F1.
  AdditiveLinearSpec linear_part() const;
};

/// Squared data norms entering the certificate.
struct SemilinearData {
  double eta = 0, beta = 0, T = 1, c_E = 1;
  double c_F1 = 0;
  double F2_sq = 0;    // |F2|^2 in F^{beta,sigma}
  double G_sq = 0;     // |G|^2 in F^{beta+1/2,sigma}
  double F1_zero_sq = 0;
  double xi_sq = 0;    // E|A^beta xi|^2, or E|xi|^2 in the critical case
  double iota_eta = 0, iota_beta = 0, iota_0 = 1, iota_eta_beta = 0;
  bool critical = false;
  double margin = 0.1;
};

SemilinearData semilinear_data(const SemilinearSpec& spec, const TimeGrid& grid);

struct KappaCertificate {
  double C1 = 0, C2 = 0, kappa2 = 0;
  double T_local = 0;
  bool capped = false;  // all three inequalities hold on the whole horizon
  std::array<double, 3> at_T_local{};   // eta-preservation, beta-preservation, contraction
  std::array<double, 3> at_1_1{};
  std::array<double, 3> thresholds{};   // kappa^2/2, kappa^2/2, 1
  bool hold_at_T_local = false;
  bool violated_at_1_1 = false;
  double contraction_factor = 0;        // squared Xi-norm factor at T_local
};

/// Left-hand sides of the three smallness inequalities at horizon S.
std::array<double, 3> certificate_inequalities(const SemilinearData& d, double kappa2, double S);
KappaCertificate kappa_and_horizon(const SemilinearData& d);

struct WeightedSolutionNorm {
  double eta_term = 0;   // sup t^{2(eta-beta)} E|A^eta Y|^2 (t^{2 eta} in the critical case)
  double beta_term = 0;  // sup E|A^beta Y|^2 (E|Y|^2 in the critical case)
  double total() const { return std::sqrt(eta_term + beta_term); }
};

struct SemilinearOptions {
  int max_iter = 400;
  double tol = 1e-12;
  int window_steps = 0;  // 0: derived from T_local
  int record_iters = 0;
};

struct SemilinearPath {
  AdaptedProcess X;
  int iterations = 0;
  bool converged = false;
  Mat record;  // 4 R x (N+1): per iteration m rows 4m..4m+3 =
               // |A^eta dY|^2, |A^b dY|^2, |A^eta Y_m|^2, |A^b Y_m|^2 (b = beta or 0)
};

/// Exponential-Euler Picard iteration of Phi on chained windows; each window is
/// iterated to bitwise stationarity.
class SemilinearSolver {
public:
  SemilinearSolver(SemilinearSpec spec, const TimeGrid& grid);
  /// Per-step noise increments n_k = I2(t_{k+1}) - S(dt) I2(t_k).
  Mat noise_increments(const BrownianPath& w) const;
  SemilinearPath solve(const BrownianPath& w, const Vec& xi, const SemilinearOptions& opt) const;
  /// Restart from node k0 with value x0 and the same noise.
  SemilinearPath solve_from(const Mat& noise, int k0, const Vec& x0, const SemilinearOptions& opt) const;
  const SemilinearSpec& spec() const { return spec_; }
  const TimeGrid& grid() const { return grid_; }
  const KappaCertificate& certificate() const { return cert_; }
  const LinearAdditiveSolver& linear() const { return linear_; }
  int window_steps(const SemilinearOptions& opt) const;

private:
  SemilinearSpec spec_;
  TimeGrid grid_;
  LinearAdditiveSolver linear_;
  KappaCertificate cert_;
  Vec decay_, phi1_, lam_eta_, lam_b_;
};

struct SemilinearStudy {
  KappaCertificate certificate;
  std::vector<double> distance, distance_se;  // Xi-norm squared distance per iteration
  std::vector<double> ratio, ratio_se;        // sqrt(D_{m+1}/D_m)
  double theoretical_ratio = 0;               // sqrt of the contraction factor at the grid horizon
  std::vector<WeightedSolutionNorm> iterate_norms;
  bool upsilon_ok = true;
  bool pass = false;
};

/// Contraction and Upsilon-preservation over an ensemble on the first window.
SemilinearStudy semilinear_picard_study(const SemilinearSolver& solver, std::size_t paths,
                                        std::uint64_t seed, SemilinearOptions opt,
                                        const EnsembleOptions& eo = {});

struct MomentProfileReport {
  std::vector<double> t, beta_moment, beta_bound, eta_moment, eta_bound;
  double beta_slack = 0, eta_slack = 0;  // min (bound - moment) / bound
  bool pass = false;
};

MomentProfileReport moment_profile_check(const SemilinearSolver& solver, std::size_t paths,
                                         std::uint64_t seed, const SemilinearOptions& opt = {},
                                         const EnsembleOptions& eo = {});

struct MoreRegularReport {
  double varrho = 0;
  std::vector<double> t, eta_moment, gamma_profile;  // E|A^eta X|^2, E|X|^2 + t^{2(g-b)} E|A^g X|^2
  double eta_decay_slope = 0;      // log-log slope of E|A^eta X|^2 over the first quarter
  double gamma_profile_sup = 0;
  bool pass = false;
};

MoreRegularReport more_regular_check(const SemilinearSolver& solver, std::size_t paths,
                                     std::uint64_t seed, const SemilinearOptions& opt = {},
                                     const EnsembleOptions& eo = {});

struct Balls {
  double R1 = 1, R2 = 1, R3 = 1;
};

struct SemilinearDependenceReport {
  double T_B = 0;
  double C22 = 0, C23 = 0;
  double D_xi = 0, D_Axi = 0, D_F = 0, D_G = 0;
  std::vector<double> t, lhs22, rhs22, lhs23, rhs23;
  double max_ratio22 = 0, max_ratio23 = 0;
  double sup_lhs22 = 0;
  bool pass = false;
};

/// Coupled pair (same noise) on [0, T_B]; constants from the Volterra majorant.
SemilinearDependenceReport dependence_check(const SemilinearSpec& a, const SemilinearSpec& b,
                                            const Balls& balls, double T, int N, std::size_t paths,
                                            std::uint64_t seed, const SemilinearOptions& opt = {},
                                            const EnsembleOptions& eo = {});

struct CriticalReport {
  SemilinearStudy study;
  std::vector<double> t, second_moment, bound, eta_moment;
  double eta_slope = 0;  // log-log slope of E|A^eta X|^2 against t
  bool moment_pass = false;
  bool pass = false;
};

CriticalReport solve_critical(const SemilinearSolver& solver, std::size_t paths, std::uint64_t seed,
                              const SemilinearOptions& opt = {}, const EnsembleOptions& eo = {});

}  // namespace spde
