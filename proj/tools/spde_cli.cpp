#include "spde/harness.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

namespace {

using spde::harness::Json;

struct Common {
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
  bool print_config = false, no_artifacts = false;
};

void add_common(CLI::App* app, Common& c, bool config_required) {
  auto* o = app->add_option("-c,--config", c.config_path, "scenario config (JSON)");
  if (config_required) o->required();
  app->add_option("-o,--out", c.out_dir, "output directory (overrides output_dir)");
  app->add_option("--seed", c.seed, "seed (overrides config and SPDE_SEED)");
  app->add_option("--workers", c.workers, "worker threads (overrides SPDE_WORKERS)");
  app->add_flag("--print-config", c.print_config, "print the resolved config and exit");
  app->add_flag("--no-artifacts", c.no_artifacts, "do not write CSV/JSON/plot files");
}

Json load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw spde::Error("io", "cannot open config: " + path);
  try {
    return Json::parse(is);
  } catch (const Json::exception& e) {
    throw spde::Error("schema", path + ": " + e.what());
  }
}

void print_report(const spde::harness::RunReport& r) {
  std::cout << "scenario " << r.scenario << " (" << r.target << ")\n";
  for (const auto& c : r.checks)
    std::cout << (c.pass ? "  PASS " : "  FAIL ") << c.name << " theoretical=" << spde::harness::number(c.theoretical)
              << " empirical=" << spde::harness::number(c.empirical) << " se=" << spde::harness::number(c.se)
              << (c.note.empty() ? "" : " [" + c.note + "]") << '\n';
  if (r.failure) std::cout << "  failure: " << *r.failure << '\n';
  for (const auto& a : r.artifacts) std::cout << "  wrote " << a << '\n';
}

int run_config(Json cfg, const std::string& target, const Common& c) {
  if (cfg.contains("target") && cfg["target"] != target)
    throw spde::Error("schema", "offending keys: target (config says '" + cfg["target"].get<std::string>() +
                                    "', subcommand is '" + target + "')");
  cfg["target"] = target;
  if (c.seed) cfg["seed"] = *c.seed;
  if (c.print_config) {
    std::cout << spde::harness::resolve_config(cfg).dump(2) << '\n';
    return 0;
  }
  spde::harness::RunOptions opt;
  opt.ensemble.workers = c.workers;
  opt.output_dir = c.out_dir;
  opt.write_artifacts = !c.no_artifacts;
  const auto rep = spde::harness::run_scenario(cfg, opt);
  print_report(rep);
  if (target == "semilinear" && rep.extra.contains("certificate"))
    std::cout << rep.extra["certificate"].dump(2) << '\n';
  if (rep.failure) return 2;
  return rep.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semigroup-method solvers and estimate verifiers for stochastic evolution equations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", spde::harness::version());

  Common sim, lin, sem, hol, vol, ver;
  auto* s_sim = app.add_subcommand("simulate", "multiplicative-noise Picard solver");
  add_common(s_sim, sim, true);

  auto* s_lin = app.add_subcommand("linear", "additive-noise linear problem");
  add_common(s_lin, lin, false);
  std::optional<std::string> flag, mode;
  std::optional<double> lbeta, lsigma;
  s_lin->add_option("--flag", flag, "condition F1 or F2");
  s_lin->add_option("--beta", lbeta);
  s_lin->add_option("--sigma", lsigma);
  s_lin->add_option("--mode", mode, "exact_gauss or increment");

  auto* s_sem = app.add_subcommand("semilinear", "semilinear problem with F1 and the kappa certificate");
  add_common(s_sem, sem, false);
  std::optional<double> eta, sbeta, ssigma, gamma;
  bool critical = false;
  s_sem->add_option("--eta", eta);
  s_sem->add_option("--beta", sbeta);
  s_sem->add_option("--sigma", ssigma);
  s_sem->add_option("--gamma", gamma);
  s_sem->add_flag("--critical", critical, "beta~ = 0");

  auto* s_hol = app.add_subcommand("holder", "F^{beta,sigma} membership and Kolmogorov control");
  add_common(s_hol, hol, false);
  auto* s_vol = app.add_subcommand("volterra", "E series, its bound, and the integral inequality");
  add_common(s_vol, vol, false);

  auto* s_ver = app.add_subcommand("verify", "M-type 2 / isometry checks, named suites, scenario directories");
  add_common(s_ver, ver, false);
  std::string suite, dir;
  s_ver->add_option("--suite", suite, "section2 | section3 | section4 | section5 | all");
  s_ver->add_option("--dir", dir, "run every *.json scenario in a directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    auto cfg_or_empty = [](const Common& c) { return c.config_path.empty() ? Json::object() : load(c.config_path); };
    if (s_sim->parsed()) return run_config(load(sim.config_path), "simulate", sim);
    if (s_lin->parsed()) {
      Json cfg = cfg_or_empty(lin);
      if (flag) cfg["flag"] = *flag;
      if (mode) cfg["mode"] = *mode;
      if (lbeta) cfg["beta"] = *lbeta;
      if (lsigma) cfg["sigma"] = *lsigma;
      return run_config(cfg, "linear", lin);
    }
    if (s_sem->parsed()) {
      Json cfg = cfg_or_empty(sem);
      if (eta) cfg["eta"] = *eta;
      if (sbeta) cfg["beta"] = *sbeta;
      if (ssigma) cfg["sigma"] = *ssigma;
      if (gamma) cfg["gamma"] = *gamma;
      if (critical) cfg["critical"] = true;
      return run_config(cfg, "semilinear", sem);
    }
    if (s_hol->parsed()) return run_config(cfg_or_empty(hol), "holder", hol);
    if (s_vol->parsed()) return run_config(cfg_or_empty(vol), "volterra", vol);
    if (!suite.empty() || !dir.empty()) {
      spde::harness::RunOptions opt;
      opt.ensemble.workers = ver.workers;
      opt.output_dir = ver.out_dir;
      opt.write_artifacts = !ver.no_artifacts;
      const auto rep = suite.empty() ? spde::harness::run_directory(dir, opt) : spde::harness::run_suite(suite, opt);
      for (const auto& r : rep.runs) print_report(r);
      if (rep.nothing_to_run) std::cout << "nothing to run\n";
      std::cout << rep.to_json().dump(2) << '\n';
      for (const auto& r : rep.runs)
        if (r.failure) return 2;
      return rep.pass() ? 0 : 1;
    }
    return run_config(cfg_or_empty(ver), "verify", ver);
  } catch (const spde::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
