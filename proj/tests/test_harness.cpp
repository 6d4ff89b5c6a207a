#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "spde/harness.hpp"
#include "spde/registry.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace spde;
using harness::Json;
namespace fs = std::filesystem;

namespace {

std::string schema_error(const Json& cfg) {
  try {
    harness::resolve_config(cfg);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("spde_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

const Json ou{{"scenario", "ou-small"}, {"target", "simulate"}, {"N", 64}, {"paths", 400}, {"seed", 11}};

}  // namespace

TEST_CASE("unknown keys are named") {
  const std::string e = schema_error({{"target", "simulate"}, {"pathz", 10}, {"sed", 1}});
  CHECK(e.find("schema") == 0);
  CHECK(e.find("pathz") != std::string::npos);
  CHECK(e.find("sed") != std::string::npos);
  CHECK(schema_error({{"target", "linear"}, {"paths", 0}}).find("paths") != std::string::npos);
  CHECK(schema_error({{"target", "nope"}}).find("available") != std::string::npos);
}

TEST_CASE("exponent chain in semilinear configs") {
  Json cfg{{"target", "semilinear"}, {"eta", 0.3}, {"beta", 0.35}, {"N", 32}, {"paths", 2}};
  try {
    harness::run_scenario(cfg, {{}, false, ""});
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.kind() == "schema");
    const std::string w = e.what();
    CHECK(w.find("beta") != std::string::npos);
    CHECK(w.find("eta") != std::string::npos);
  }
}

TEST_CASE("unknown suite lists the available ones") {
  try {
    harness::suite_configs("section9");
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string w = e.what();
    for (const auto& s : harness::suite_names()) CHECK(w.find(s) != std::string::npos);
  }
  CHECK(harness::suite_configs("all").size() ==
        harness::suite_configs("section2").size() + harness::suite_configs("section3").size() +
            harness::suite_configs("section4").size() + harness::suite_configs("section5").size());
}

TEST_CASE("ou-baseline carries the OU oracle") {
  bool found = false;
  for (const Json& c : harness::suite_configs("section3"))
    if (c["scenario"] == "ou-baseline") {
      found = true;
      Json small = c;
      small["paths"] = 500;
      small["N"] = 64;
      const harness::RunReport r = harness::run_scenario(small, {{}, false, ""});
      bool has = false;
      for (const auto& ch : r.checks)
        if (std::abs(ch.theoretical - (1 - std::exp(-2.0)) / 2) < 1e-12) has = true;
      CHECK(has);
    }
  CHECK(found);
}

TEST_CASE("repeat runs write byte-identical artifacts") {
  const fs::path a = temp_dir("a"), b = temp_dir("b");
  harness::run_scenario(ou, {{1, 256}, true, a.string()});
  harness::run_scenario(ou, {{1, 64}, true, b.string()});
  const std::string ca = slurp(a / "ou-small.csv");
  CHECK_FALSE(ca.empty());
  CHECK(ca == slurp(b / "ou-small.csv"));
  CHECK(ca.find("\r\n") != std::string::npos);
  CHECK(ca.rfind("t,mean_abs_p,se_abs_p,mean_sq,se_sq", 0) == 0);
  CHECK(fs::exists(a / "ou-small.json"));
  CHECK(fs::exists(a / "ou-small.plot.dat"));
}

TEST_CASE("the echoed config re-runs to the same result") {
  const harness::RunReport r1 = harness::run_scenario(ou, {{}, false, ""});
  const Json echoed = Json::parse(r1.to_json().dump())["config"];
  CHECK(echoed == harness::resolve_config(echoed));
  const harness::RunReport r2 = harness::run_scenario(echoed, {{}, false, ""});
  REQUIRE(r1.checks.size() == r2.checks.size());
  for (std::size_t i = 0; i < r1.checks.size(); ++i) CHECK(r1.checks[i].empirical == r2.checks[i].empirical);
  CHECK(r1.version == harness::version());
}

TEST_CASE("seed precedence: config over environment") {
  ::setenv("SPDE_SEED", "77", 1);
  CHECK(harness::resolve_config({{"target", "volterra"}})["seed"] == 77);
  CHECK(harness::resolve_config({{"target", "volterra"}, {"seed", 5}})["seed"] == 5);
  ::unsetenv("SPDE_SEED");
  CHECK(harness::resolve_config({{"target", "volterra"}})["seed"] == 1);
}

TEST_CASE("non-finite numbers serialise as strings") {
  CHECK(harness::number(INFINITY) == "inf");
  CHECK(harness::number(-INFINITY) == "-inf");
  CHECK(harness::number(NAN) == "nan");
  CHECK(harness::number(1.5) == 1.5);
}

TEST_CASE("Gaussian absolute moments") {
  CHECK(harness::gaussian_abs_moment(0, 2, 2) == doctest::Approx(2));
  CHECK(harness::gaussian_abs_moment(0, 2, 4) == doctest::Approx(12));
  CHECK(harness::gaussian_abs_moment(1, 0.5, 2) == doctest::Approx(1.5));
  CHECK(harness::gaussian_abs_moment(0, 1, 1) == doctest::Approx(std::sqrt(2 / M_PI)));
}

TEST_CASE("empty directory has nothing to run") {
  const harness::SuiteReport r = harness::run_directory(temp_dir("empty").string(), {{}, false, ""});
  CHECK(r.nothing_to_run);
  CHECK(r.runs.empty());
  CHECK(r.to_json()["status"] == "nothing to run");
}

TEST_CASE("directory runs pick up every scenario file") {
  const fs::path d = temp_dir("dir");
  std::ofstream(d / "b.json") << Json{{"scenario", "vol"}, {"target", "volterra"}}.dump();
  std::ofstream(d / "a.json") << ou.dump();
  std::ofstream(d / "notes.txt") << "ignored";
  const harness::SuiteReport r = harness::run_directory(d.string(), {{}, false, ""});
  REQUIRE(r.runs.size() == 2);
  CHECK(r.runs[0].scenario == "ou-small");
  CHECK(r.runs[1].target == "volterra");
}

TEST_CASE("volterra and holder targets pass on defaults") {
  const harness::RunReport v = harness::run_scenario({{"target", "volterra"}}, {{}, false, ""});
  CHECK(v.pass());
  const harness::RunReport h = harness::run_scenario({{"target", "holder"}, {"N", 512}}, {{}, false, ""});
  CHECK(h.pass());
}

TEST_CASE("registry families") {
  const SpectralOperator A = registry::make_operator({{"generator", "dirichlet_laplacian_1d"}, {"d", 3}, {"scale", 2}});
  CHECK(A.eigenvalues()(0) == doctest::Approx(2 * std::pow(M_PI / 4, 2)));
  CHECK(registry::make_operator({{"eigenvalues", {1, 2}}}).dim() == 2);
  CHECK(registry::vector_param({{"v", 2.0}}, "v", 3, 0) == Vec::Constant(3, 2.0));
  const Coefficient c = registry::make_coefficient({{"family", "cubic"}, {"a", 2}}, 1);
  CHECK(c.local);
  CHECK(c.c_n(2) == doctest::Approx(24));
  const InitialLaw r = registry::make_initial({{"family", "rough"}, {"variance", 4}}, 4);
  CHECK(r.stddev(3) == doctest::Approx(1.0));
  try {
    registry::make_coefficient({{"family", "quartic"}}, 1);
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("square") != std::string::npos);
  }
}
