#include "spde/brownian.hpp"

#include "spde/csv.hpp"
#include "spde/rng.hpp"

#include <cmath>
#include <ostream>

namespace spde {

TimeGrid::TimeGrid(double T_, int N_) : T(T_), N(N_) {
  require(T > 0 && std::isfinite(T), "domain", "grid horizon must be positive");
  require(N >= 1, "domain", "grid needs at least one step");
}

int TimeGrid::level() const {
  if (!dyadic()) return -1;
  int l = 0;
  while ((1 << l) < N) ++l;
  return l;
}

Vec TimeGrid::nodes() const {
  Vec t(N + 1);
  for (int k = 0; k <= N; ++k) t(k) = node(k);
  return t;
}

namespace {
constexpr std::uint32_t kDirectLevel = 0xffffffffu;
}

BrownianPath sample_brownian(const TimeGrid& grid, std::uint64_t seed, std::uint64_t path_index) {
  BrownianPath b{grid, seed, path_index, Vec::Zero(grid.N + 1)};
  const int L = grid.level();
  if (L < 0) {
    const double s = std::sqrt(grid.dt());
    for (int k = 0; k < grid.N; ++k)
      b.w(k + 1) = b.w(k) + s * rng::normal(seed, path_index, rng::Stream::brownian, kDirectLevel, k);
    return b;
  }
  b.w(grid.N) = std::sqrt(grid.T) * rng::normal(seed, path_index, rng::Stream::brownian, 0, 0);
  for (int l = 1; l <= L; ++l) {
    const int stride = grid.N >> (l - 1);  // nodes per parent interval
    const double len = grid.T / (1 << (l - 1));
    const double s = std::sqrt(0.25 * len);
    for (int j = 0; j < (1 << (l - 1)); ++j) {
      const int a = j * stride, c = a + stride, m = a + stride / 2;
      b.w(m) = 0.5 * (b.w(a) + b.w(c)) +
               s * rng::normal(seed, path_index, rng::Stream::brownian, static_cast<std::uint32_t>(l), j);
    }
  }
  return b;
}

StepIntegrand StepIntegrand::from_process(const AdaptedProcess& f) {
  return StepIntegrand{f.values.leftCols(f.grid.N), false};
}

StepIntegrand StepIntegrand::from_function(const TimeGrid& grid, int d,
                                           const std::function<Vec(double)>& g) {
  StepIntegrand s{Mat(d, grid.N), true};
  for (int k = 0; k < grid.N; ++k) {
    Vec v = g((k + 0.5) * grid.dt());
    require(v.size() == d, "dimension", "profile dimension mismatch");
    s.cells.col(k) = v;
  }
  require(s.cells.allFinite(), "domain", "profile is not finite on the grid cells");
  return s;
}

Vec integrate_step(const AdaptedProcess& f, const BrownianPath& w) {
  require(f.grid == w.grid && f.values.cols() == f.grid.N + 1, "grid", "integrand and path grids differ");
  Vec s = Vec::Zero(f.dim());
  for (int k = 0; k < f.grid.N; ++k) s += f.values.col(k) * w.increment(k);
  return s;
}

AdaptedProcess integrate_partial(const AdaptedProcess& f, const BrownianPath& w) {
  require(f.grid == w.grid && f.values.cols() == f.grid.N + 1, "grid", "integrand and path grids differ");
  AdaptedProcess out{f.grid, Mat::Zero(f.dim(), f.grid.N + 1)};
  for (int k = 0; k < f.grid.N; ++k)
    out.values.col(k + 1) = out.values.col(k) + f.values.col(k) * w.increment(k);
  return out;
}

ExactGaussKernel make_exact_gauss_kernel(const SpectralOperator& a, double dt) {
  require(dt > 0, "domain", "step must be positive");
  const int d = a.dim();
  const Vec& l = a.eigenvalues();
  ExactGaussKernel k;
  k.dt = dt;
  k.decay = (-dt * l.array()).exp().matrix();
  Mat c(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) c(i, j) = -std::expm1(-(l(i) + l(j)) * dt) / (l(i) + l(j));
  if (d == 1) {
    k.root = c.cwiseSqrt();
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> es(c);
    const Vec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    k.root = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  }
  return k;
}

AdaptedProcess stochastic_convolution(const SpectralOperator& a, const StepIntegrand& phi,
                                      const BrownianPath& w, ConvolutionMode mode) {
  if (mode == ConvolutionMode::exact_gauss)
    return stochastic_convolution(a, phi, w, make_exact_gauss_kernel(a, w.grid.dt()));
  const int d = a.dim(), N = w.grid.N;
  require(phi.cells.rows() == d && phi.cells.cols() == N, "dimension", "integrand shape mismatch");
  const Vec decay = (-w.grid.dt() * a.eigenvalues().array()).exp().matrix();
  AdaptedProcess y{w.grid, Mat::Zero(d, N + 1)};
  for (int k = 0; k < N; ++k)
    y.values.col(k + 1) =
        decay.cwiseProduct(y.values.col(k) + phi.cells.col(k) * w.increment(k));
  return y;
}

AdaptedProcess stochastic_convolution(const SpectralOperator& a, const StepIntegrand& phi,
                                      const BrownianPath& w, const ExactGaussKernel& kernel) {
  require(phi.deterministic, "mode", "exact_gauss mode needs a deterministic integrand");
  const int d = a.dim(), N = w.grid.N;
  require(phi.cells.rows() == d && phi.cells.cols() == N, "dimension", "integrand shape mismatch");
  require(std::abs(kernel.dt - w.grid.dt()) <= 1e-15 * w.grid.dt() && kernel.decay.size() == d,
          "mode", "exact_gauss kernel does not match grid/operator");
  AdaptedProcess y{w.grid, Mat::Zero(d, N + 1)};
  Vec z(d);
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < d; ++i)
      z(i) = rng::normal(w.seed, w.path_index, rng::Stream::exact_gauss, 0,
                         static_cast<std::uint64_t>(k) * d + i);
    if (d == 1)
      y.values(0, k + 1) = kernel.decay(0) * y.values(0, k) + phi.cells(0, k) * kernel.root(0, 0) * z(0);
    else
      y.values.col(k + 1) = kernel.decay.cwiseProduct(y.values.col(k)) +
                            phi.cells.col(k).cwiseProduct(kernel.root * z);
  }
  return y;
}

IntegralInequalityReport integral_inequality_report(
    const std::function<AdaptedProcess(const BrownianPath&)>& integrand, const TimeGrid& grid,
    std::size_t paths, std::uint64_t seed, const NormSpec& spec, const TypeConstants& constants,
    double p, const EnsembleOptions& opt) {
  require(p > 1, "domain", "moment order must exceed 1");
  require(paths >= 2, "domain", "need at least two paths");
  // record: [sup |I|^p, (int |f|^2)^{p/2}]
  MomentTable t = ensemble_moments(
      paths, 2, 1,
      [&](std::size_t i) {
        BrownianPath w = sample_brownian(grid, seed, i);
        AdaptedProcess f = integrand(w);
        require(f.grid == grid, "grid", "integrand grid mismatch");
        Vec r(2);
        double sup = 0.0, q = 0.0, energy = 0.0;
        Vec acc = Vec::Zero(f.dim());
        for (int k = 0; k < grid.N; ++k) {
          energy += std::pow(norm(Vec(f.values.col(k)), spec), 2) * grid.dt();
          acc += f.values.col(k) * w.increment(k);
          q = norm(acc, spec);
          sup = std::max(sup, q);
        }
        r << std::pow(sup, p), std::pow(energy, p / 2);
        return r;
      },
      opt);
  IntegralInequalityReport r;
  r.p = p;
  const double k = std::pow(p / (p - 1), p) * constants.c_p;
  r.lhs = t.mean()(0, 0);
  r.lhs_se = t.standard_error()(0, 0);
  r.rhs = k * t.mean()(1, 0);
  r.rhs_se = k * t.standard_error()(1, 0);
  r.ratio = r.rhs > 0 ? r.lhs / r.rhs : 0.0;
  const double rel_l = r.lhs > 0 ? r.lhs_se / r.lhs : 0.0;
  const double rel_r = r.rhs > 0 ? r.rhs_se / r.rhs : 0.0;
  r.ratio_rel_se = std::sqrt(rel_l * rel_l + rel_r * rel_r);
  r.pass = r.ratio <= 1.0 + 3.0 * r.ratio_rel_se;
  return r;
}

void write_process_csv_header(std::ostream& os, int d) {
  std::vector<std::string> h{"path_index", "t"};
  for (int i = 1; i <= d; ++i) h.push_back("x" + std::to_string(i));
  csv::row(os, h);
}

void write_process_csv_rows(std::ostream& os, std::uint64_t path_index, const AdaptedProcess& x) {
  for (int k = 0; k <= x.grid.N; ++k) {
    std::vector<std::string> f{std::to_string(path_index), csv::num(x.grid.node(k))};
    for (int i = 0; i < x.dim(); ++i) f.push_back(csv::num(x.values(i, k)));
    csv::row(os, f);
  }
}

}  // namespace spde
