#pragma once

#include "spde/semilinear.hpp"

#include "json.hpp"

#include <string>
#include <vector>

/// Named families selectable from JSON config. Every entry declares its constants.
namespace spde::registry {

using Json = nlohmann::json;

/// {"eigenvalues": [...]} | {"generator": "dirichlet_laplacian_1d", "d": n, "scale": s}
/// | {"matrix": [[...], ...]}
SpectralOperator make_operator(const Json& j);

/// F or G of the multiplicative solver, componentwise in x:
///   zero | constant{value} | linear{a} | sin{amp} | square{a} | cubic{a}
Coefficient make_coefficient(const Json& j, int d);

/// Deterministic profiles t^a h(t): zero | constant{value} | power{amp, exponent}
/// | sin{amp, omega, exponent}
TimeProfile make_profile(const Json& j, int d);

/// F1: zero | sin_eta{amp} | linear_shift{c} | sin_eta_plus_x
Nonlinearity make_nonlinearity(const Json& j, const SpectralOperator& A, double eta, double beta,
                               bool critical);

/// deterministic{value} | gaussian{mean, std} | rough{variance}: xi_k ~ N(0, variance / k)
InitialLaw make_initial(const Json& j, int d);

std::vector<std::string> coefficient_families();
std::vector<std::string> profile_families();
std::vector<std::string> nonlinearity_families();
std::vector<std::string> initial_families();

/// Scalar broadcast or list of length d.
Vec vector_param(const Json& j, const char* key, int d, double fallback);

}  // namespace spde::registry
