#include "spde/sectorial.hpp"

#include <algorithm>
#include <cmath>

namespace spde {

SpectralOperator::SpectralOperator(Vec eigenvalues) : lambda_(std::move(eigenvalues)) {
  require(lambda_.size() >= 1, "domain", "operator needs at least one eigenvalue");
  require(lambda_.allFinite(), "domain", "eigenvalues must be finite");
  require((lambda_.array() > 0).all(), "domain", "eigenvalues must be strictly positive");
}

SpectralOperator SpectralOperator::from_symmetric(const Mat& a, double sym_tol) {
  require(a.rows() == a.cols() && a.rows() >= 1, "dimension", "operator matrix must be square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  require((a - a.transpose()).cwiseAbs().maxCoeff() <= sym_tol * scale, "domain",
          "operator matrix is not symmetric within tolerance");
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  require(es.info() == Eigen::Success, "numeric", "eigendecomposition failed");
  SpectralOperator op(es.eigenvalues());
  op.basis_ = es.eigenvectors();
  return op;
}

SpectralOperator SpectralOperator::dirichlet_laplacian_1d(int d, double scale) {
  require(d >= 1, "domain", "dirichlet_laplacian_1d needs d >= 1");
  require(scale > 0, "domain", "scale must be positive");
  Vec l(d);
  for (int k = 1; k <= d; ++k) {
    const double r = k * M_PI / (d + 1);
    l(k - 1) = scale * r * r;
  }
  return SpectralOperator(l);
}

Vec SpectralOperator::to_spectral(const Vec& x) const {
  return has_basis() ? Vec(basis_.transpose() * x) : x;
}
Vec SpectralOperator::from_spectral(const Vec& y) const {
  return has_basis() ? Vec(basis_ * y) : y;
}

double iota_closed_form(const SpectralOperator& a, double nu, double T) {
  require(nu >= 0, "domain", "iota exponent must be >= 0");
  require(T > 0, "domain", "iota horizon must be positive");
  if (nu == 0.0) return 1.0;
  double best = 0.0;
  for (double l : a.eigenvalues()) {
    const double v = (nu / l <= T) ? std::pow(nu, nu) * std::exp(-nu)
                                   : std::pow(T * l, nu) * std::exp(-l * T);
    best = std::max(best, v);
  }
  return best;
}

namespace {
double iota_profile(const Vec& lambda, double nu, double t) {
  double m = 0.0;
  for (double l : lambda) m = std::max(m, std::pow(t * l, nu) * std::exp(-l * t));
  return m;
}
}  // namespace

double iota_grid(const SpectralOperator& a, double nu, double T, int n) {
  require(nu >= 0 && T > 0 && n >= 10, "domain", "invalid iota grid request");
  if (nu == 0.0) return 1.0;
  const Vec& lam = a.eigenvalues();
  const double lo = std::min(T, nu / a.max_eigenvalue()) * 1e-3;
  const double llo = std::log(lo), lhi = std::log(T);
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = iota_profile(lam, nu, std::exp(llo + (lhi - llo) * i / (n - 1)));
  double best = *std::max_element(v.begin(), v.end());
  // golden-section polish inside every bracket that holds a local maximum
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int i = 1; i + 1 < n; ++i) {
    if (!(v[i] >= v[i - 1] && v[i] >= v[i + 1])) continue;
    double x0 = llo + (lhi - llo) * (i - 1) / (n - 1), x3 = llo + (lhi - llo) * (i + 1) / (n - 1);
    double x1 = x3 - g * (x3 - x0), x2 = x0 + g * (x3 - x0);
    double f1 = iota_profile(lam, nu, std::exp(x1)), f2 = iota_profile(lam, nu, std::exp(x2));
    for (int it = 0; it < 80; ++it) {
      if (f1 > f2) { x3 = x2; x2 = x1; f2 = f1; x1 = x3 - g * (x3 - x0); f1 = iota_profile(lam, nu, std::exp(x1)); }
      else { x0 = x1; x1 = x2; f1 = f2; x2 = x0 + g * (x3 - x0); f2 = iota_profile(lam, nu, std::exp(x2)); }
    }
    best = std::max({best, f1, f2});
  }
  return best;
}

double iota_constant(const SpectralOperator& a, double nu, double T, int grid_resolution) {
  const double closed = iota_closed_form(a, nu, T);
  const double grid = iota_grid(a, nu, T, grid_resolution);
  require(std::abs(grid - closed) <= 1e-6 * std::max(closed, 1e-300), "internal",
          "iota grid cross-check failed for nu=" + std::to_string(nu));
  return closed;
}

double SemigroupConstants::at(double nu) const {
  auto it = iota.find(nu);
  require(it != iota.end(), "domain", "iota not tabulated for nu=" + std::to_string(nu));
  return it->second;
}

SemigroupConstants semigroup_constants(const SpectralOperator& a, const std::vector<double>& nus,
                                       double T, double varpi, double M_varpi) {
  SemigroupConstants c;
  c.iota[0.0] = 1.0;
  for (double nu : nus) c.iota[nu] = iota_constant(a, nu, T);
  c.M_T = 1.0;
  c.nu_decay = a.min_eigenvalue();
  c.varpi = varpi;
  // for positive spectrum and |arg l| >= varpi, |l - lambda| >= |l| sin(varpi)
  c.M_varpi = M_varpi > 0 ? M_varpi : 1.0 / std::sin(varpi);
  return c;
}

ResolventReport resolvent_bound_check(const SpectralOperator& a, double varpi, double M_varpi,
                                      const std::vector<std::complex<double>>& samples) {
  require(varpi > 0 && varpi < M_PI / 2, "domain", "sector half-angle must lie in (0, pi/2)");
  ResolventReport r;
  r.worst_margin = std::numeric_limits<double>::infinity();
  for (auto z : samples) {
    require(std::abs(z) > 0, "domain", "resolvent sample at the origin");
    require(std::abs(std::arg(z)) >= varpi, "domain", "resolvent sample lies inside the sector");
    double res = 0.0;
    for (double l : a.eigenvalues()) res = std::max(res, 1.0 / std::abs(z - l));
    r.worst_margin = std::min(r.worst_margin, M_varpi / std::abs(z) - res);
    r.worst_ratio = std::max(r.worst_ratio, res * std::abs(z));
  }
  r.pass = r.worst_margin >= 0;
  return r;
}

SmiReport smi_bound_check(const SpectralOperator& a, double theta, double t, double T) {
  require(theta > 0 && theta <= 1, "domain", "theta must lie in (0,1]");
  require(t >= 0 && t <= T, "domain", "t must lie in [0,T]");
  SmiReport r;
  for (double l : a.eigenvalues())
    r.lhs = std::max(r.lhs, std::abs(std::expm1(-l * t)) * std::pow(l, -theta));
  r.rhs = iota_closed_form(a, 1.0 - theta, T) / theta * std::pow(t, theta);
  r.pass = r.lhs <= r.rhs * (1 + 1e-12);
  return r;
}

Vec phi1_weights(const SpectralOperator& a, double h) {
  Vec w(a.dim());
  for (int i = 0; i < a.dim(); ++i) {
    const double l = a.eigenvalues()(i);
    w(i) = -std::expm1(-l * h) / l;
  }
  return w;
}

}  // namespace spde
