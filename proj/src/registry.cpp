#include "spde/registry.hpp"

#include <cmath>
#include <limits>

namespace spde::registry {

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

std::string family_of(const Json& j, const char* what) {
  require(j.is_object() && j.contains("family") && j["family"].is_string(), "schema",
          std::string(what) + " needs a string key 'family'");
  return j["family"].get<std::string>();
}

double num(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  require(j[key].is_number(), "schema", std::string("key '") + key + "' must be a number");
  return j[key].get<double>();
}

}  // namespace

Vec vector_param(const Json& j, const char* key, int d, double fallback) {
  if (!j.contains(key)) return Vec::Constant(d, fallback);
  const Json& v = j[key];
  if (v.is_number()) return Vec::Constant(d, v.get<double>());
  require(v.is_array() && static_cast<int>(v.size()) == d, "schema",
          std::string("key '") + key + "' must be a number or a list of length " + std::to_string(d));
  Vec out(d);
  for (int i = 0; i < d; ++i) {
    require(v[i].is_number(), "schema", std::string("key '") + key + "' holds a non-number");
    out(i) = v[i].get<double>();
  }
  return out;
}

SpectralOperator make_operator(const Json& j) {
  require(j.is_object(), "schema", "operator must be an object");
  if (j.contains("eigenvalues")) {
    const Json& e = j["eigenvalues"];
    require(e.is_array() && !e.empty(), "schema", "operator.eigenvalues must be a non-empty list");
    Vec l(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) l(i) = e[i].get<double>();
    return SpectralOperator(l);
  }
  if (j.contains("generator")) {
    const std::string g = j["generator"].get<std::string>();
    require(g == "dirichlet_laplacian_1d", "schema",
            "unknown operator generator '" + g + "'; available: dirichlet_laplacian_1d");
    require(j.contains("d") && j["d"].is_number_integer(), "schema", "operator.d must be an integer");
    return SpectralOperator::dirichlet_laplacian_1d(j["d"].get<int>(), num(j, "scale", 1.0));
  }
  if (j.contains("matrix")) {
    const Json& m = j["matrix"];
    const std::size_t n = m.size();
    require(m.is_array() && n > 0, "schema", "operator.matrix must be a square list of lists");
    Mat a(n, n);
    for (std::size_t r = 0; r < n; ++r) {
      require(m[r].is_array() && m[r].size() == n, "schema", "operator.matrix must be square");
      for (std::size_t c = 0; c < n; ++c) a(r, c) = m[r][c].get<double>();
    }
    return SpectralOperator::from_symmetric(a);
  }
  throw Error("schema", "operator needs one of 'eigenvalues', 'generator', 'matrix'");
}

std::vector<std::string> coefficient_families() {
  return {"zero", "constant", "linear", "sin", "square", "cubic"};
}

Coefficient make_coefficient(const Json& j, int d) {
  const std::string f = family_of(j, "coefficient");
  const double inf = std::numeric_limits<double>::infinity();
  Coefficient c;
  c.name = f;
  if (f == "zero") {
    c = Coefficient::zero(d);
  } else if (f == "constant") {
    const Vec v = vector_param(j, "value", d, 1.0);
    c.eval = [v](double, const Vec&) { return v; };
    c.c1 = v.lpNorm<Eigen::Infinity>() * std::sqrt(double(d));
    c.c2 = 0;
    c.state_independent = true;
  } else if (f == "linear") {
    const double a = num(j, "a", 1.0);
    c.eval = [a](double, const Vec& x) { return Vec(a * x); };
    c.c1 = c.c2 = std::abs(a);
  } else if (f == "sin") {
    const double a = num(j, "amp", 1.0);
    c.eval = [a](double, const Vec& x) { return Vec(a * x.array().sin()); };
    c.c1 = c.c2 = std::abs(a);
  } else if (f == "square") {
    const double a = num(j, "a", 1.0);
    c.eval = [a](double, const Vec& x) { return Vec(a * x.array().square()); };
    c.c1 = c.c2 = inf;
    c.local = true;
    c.c_n = [a](double n) { return 2 * std::abs(a) * n; };
    c.cbar_n = [a](double n) { return std::abs(a) * n; };
  } else if (f == "cubic") {
    const double a = num(j, "a", 1.0);
    c.eval = [a](double, const Vec& x) { return Vec(a * x.array().cube()); };
    c.c1 = c.c2 = inf;
    c.local = true;
    c.c_n = [a](double n) { return 3 * std::abs(a) * n * n; };
    c.cbar_n = [a](double n) { return std::abs(a) * n * n; };
  } else {
    throw Error("schema", "unknown coefficient family '" + f + "'; available: " + join(coefficient_families()));
  }
  c.name = f;
  return c;
}

std::vector<std::string> profile_families() { return {"zero", "constant", "power", "sin"}; }

TimeProfile make_profile(const Json& j, int d) {
  const std::string f = family_of(j, "profile");
  if (f == "zero") return TimeProfile::zero(d);
  if (f == "constant") return TimeProfile::constant(vector_param(j, "value", d, 1.0));
  if (f == "power") {
    require(j.contains("exponent"), "schema", "power profile needs 'exponent'");
    return TimeProfile::power(vector_param(j, "amp", d, 1.0), num(j, "exponent", 0.0));
  }
  if (f == "sin") {
    const Vec amp = vector_param(j, "amp", d, 1.0);
    const double om = num(j, "omega", 1.0), a = num(j, "exponent", 0.0);
    require(a > -1, "schema", "sin profile exponent must exceed -1");
    return {"sin", a, [amp, om](double t) { return Vec(amp * std::sin(om * t)); }};
  }
  throw Error("schema", "unknown profile family '" + f + "'; available: " + join(profile_families()));
}

std::vector<std::string> nonlinearity_families() {
  return {"zero", "sin_eta", "linear_shift", "sin_eta_plus_x"};
}

Nonlinearity make_nonlinearity(const Json& j, const SpectralOperator& A, double, double beta,
                               bool critical) {
  const std::string f = family_of(j, "F1");
  const int d = A.dim();
  if (f == "zero") return Nonlinearity::none(d);
  Nonlinearity n;
  n.name = f;
  n.zero = false;
  if (f == "sin_eta") {
    const double a = num(j, "amp", 1.0);
    n.eval = [a](const Vec&, const Vec& ae, const Vec&) { return Vec(a * ae.array().sin()); };
    n.c_F1 = std::abs(a);
  } else if (f == "linear_shift") {
    const double c = num(j, "c", 1.0);
    n.eval = [c](const Vec&, const Vec&, const Vec& ab) { return Vec(-c * ab); };
    n.c_F1 = std::abs(c);
  } else if (f == "sin_eta_plus_x") {
    n.eval = [](const Vec& x, const Vec& ae, const Vec&) { return Vec(ae.array().sin().matrix() + x); };
    n.c_F1 = critical ? 1.0 : std::max(1.0, std::pow(A.min_eigenvalue(), -beta));
  } else {
    throw Error("schema", "unknown F1 family '" + f + "'; available: " + join(nonlinearity_families()));
  }
  return n;
}

std::vector<std::string> initial_families() { return {"deterministic", "gaussian", "rough"}; }

InitialLaw make_initial(const Json& j, int d) {
  const std::string f = family_of(j, "xi");
  if (f == "deterministic") return InitialLaw::deterministic(vector_param(j, "value", d, 0.0));
  if (f == "gaussian")
    return InitialLaw::gaussian(vector_param(j, "mean", d, 0.0), vector_param(j, "std", d, 1.0));
  if (f == "rough") {
    const double v = num(j, "variance", 2.0);
    require(v >= 0, "schema", "rough variance must be >= 0");
    Vec sd(d);
    for (int k = 0; k < d; ++k) sd(k) = std::sqrt(v / (k + 1));
    return InitialLaw::gaussian(Vec::Zero(d), sd);
  }
  throw Error("schema", "unknown xi family '" + f + "'; available: " + join(initial_families()));
}

}  // namespace spde::registry
