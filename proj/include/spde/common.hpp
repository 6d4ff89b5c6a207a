#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace spde {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Structured error carrying a short machine-readable kind.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

inline void require(bool cond, const char* kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

/// Seed from SPDE_SEED if set, otherwise the fallback.
std::uint64_t seed_from_env(std::uint64_t fallback);
/// Worker count from SPDE_WORKERS if set, otherwise hardware concurrency.
unsigned workers_from_env();

}  // namespace spde
