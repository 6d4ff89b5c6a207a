#pragma once

#include "spde/brownian.hpp"
#include "spde/holder.hpp"
#include "spde/multiplicative.hpp"
#include "spde/sectorial.hpp"
#include "spde/state_space.hpp"

#include <functional>
#include <string>
#include <vector>

namespace spde {

/// Deterministic E-valued profile f(t) = t^a h(t) on (0,T]; a > -1, h bounded near 0.
struct TimeProfile {
  std::string name = "zero";
  double a = 0.0;
  std::function<Vec(double)> h;

  Vec operator()(double t) const;
  static TimeProfile zero(int d);
  static TimeProfile constant(Vec v);
  static TimeProfile power(Vec amp, double exponent);
};

enum class LinearCondition { F1, F2 };

struct AdditiveLinearSpec {
  SpectralOperator A;
  TimeProfile F, G;
  InitialLaw xi;
  double beta = 0.25;
  double sigma = 0.1;
  LinearCondition flag = LinearCondition::F2;
  NormSpec norm;
  TypeConstants constants;
  ConvolutionMode mode = ConvolutionMode::exact_gauss;

  void validate() const;
};

struct SolutionDecomposition {
  AdaptedProcess I1, I2, X;
};

/// int_{t_k}^{t_{k+1}} e^{-lambda (t_{k+1}-s)} f(s) ds per coordinate, cell 0 by the
/// exact weight against h(mid), other cells by 8-point Gauss-Legendre. lambda = 0 allowed.
Mat semigroup_cell_integrals(const Vec& lambda, const TimeProfile& f, const TimeGrid& grid);

/// Precomputes the deterministic drive and the noise kernel shared by all paths.
class LinearAdditiveSolver {
public:
  LinearAdditiveSolver(AdditiveLinearSpec spec, const TimeGrid& grid);
  SolutionDecomposition solve(const BrownianPath& w, const Vec& xi) const;
  SolutionDecomposition solve(const BrownianPath& w) const {
    return solve(w, spec_.xi.sample(w.seed, w.path_index));
  }
  const AdditiveLinearSpec& spec() const { return spec_; }
  const TimeGrid& grid() const { return grid_; }
  const Mat& drive_cells() const { return drive_; }     // d x N
  const StepIntegrand& noise_integrand() const { return g_; }

private:
  AdditiveLinearSpec spec_;
  TimeGrid grid_;
  Mat drive_;
  StepIntegrand g_;
  ExactGaussKernel kernel_;
};

SolutionDecomposition solve_linear_additive(const AdditiveLinearSpec& spec, const TimeGrid& grid,
                                            const BrownianPath& w);

struct StrictResidualReport {
  double delta = 0.5;
  double c_delta_measured = 0.0;    // sup_t t^delta max_i lambda_i e^{-lambda_i t} on the grid
  double c_delta_configured = INFINITY;
  bool assumption_ok = false;
  std::vector<double> profile;      // residual per node
  double max_residual = 0.0;
};

/// X(t) + int_0^t AX - xi - int_0^t F - int_0^t G dw, trapezoid for int AX.
StrictResidualReport strict_residual(const SolutionDecomposition& sol, const LinearAdditiveSolver& solver,
                                     const BrownianPath& w, const Vec& xi, double delta = 0.5,
                                     double c_delta = INFINITY);

/// sum_i int_0^t e^{-2 lambda_i (t-s)} G_i(s)^2 ds by tanh-sinh quadrature.
double convolution_covariance_oracle(const SpectralOperator& a, const TimeProfile& G, double t,
                                     double tol = 1e-10);

struct LinearConstants {
  double F_norm = 0.0;      // |F| in F^{beta,sigma}
  double G_norm = 0.0;      // |G| in F^{beta+1/2,sigma} (F1) or sup |G| (F2)
  double iota0 = 1.0, iota1 = 0.0;
  double nu = 0.0;
  double c1 = 0.0;          // E|I1|^2 <= c1 (E|xi|^2 + |F|^2)
  double c_nu_beta = 0.0;   // sup_t int_0^t e^{-2 nu (t-s)} s^{2 beta - 1} ds
  double rho = 0.0;         // rho_1 or rho_2 by flag
  double K_increment = 0.0; // E|I2(t)-I2(s)|^2 <= K (t-s)^{2 beta} (flag F1)
};

LinearConstants linear_constants(const AdditiveLinearSpec& spec, const TimeGrid& grid);

struct RegularityReport {
  LinearConstants constants;
  double xi_moment2 = 0.0;
  std::vector<double> t, second_moment, second_moment_se, beta_moment, bound;
  bool moment_pass = false;
  double jump_fine = 0.0, jump_coarse = 0.0;   // E max_k |A^beta (X_{k+1}-X_k)| at N and N/2
  bool continuity_pass = false;
  KolmogorovEstimate kolmogorov;
  bool exponent_pass = false;
  std::vector<double> increment_lag, increment_lhs, increment_lhs_se, increment_rhs;
  bool increment_pass = true;
  bool pass = false;
};

RegularityReport regularity_report(const LinearAdditiveSolver& solver, std::size_t paths,
                                   std::uint64_t seed, const EnsembleOptions& eo = {});

}  // namespace spde
