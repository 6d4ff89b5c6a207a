#include "spde/harness.hpp"

#include "spde/csv.hpp"
#include "spde/holder.hpp"
#include "spde/multiplicative.hpp"
#include "spde/rng.hpp"
#include "spde/special.hpp"
#include "spde/volterra.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#ifndef SPDE_VERSION
#define SPDE_VERSION "0.0.0"
#endif

namespace spde::harness {

namespace fs = std::filesystem;
using registry::make_coefficient;
using registry::make_initial;
using registry::make_nonlinearity;
using registry::make_operator;
using registry::make_profile;

std::string version() { return std::string("spde ") + SPDE_VERSION; }

Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double gaussian_abs_moment(double m, double v, double q) {
  if (m == 0.0) return std::pow(2 * v, q / 2) * std::exp(special::lgamma((q + 1) / 2)) / std::sqrt(M_PI);
  if (q == 2.0) return m * m + v;
  if (q == 4.0) return m * m * m * m + 6 * m * m * v + 3 * v * v;
  return NAN;
}

bool RunReport::pass() const {
  if (failure) return false;
  return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.pass; });
}

Json RunReport::to_json() const {
  Json j;
  j["scenario"] = scenario;
  j["target"] = target;
  j["version"] = version;
  j["wall_seconds"] = wall_seconds;
  j["pass"] = pass();
  j["config"] = config;
  Json cs = Json::array();
  for (const auto& c : checks) {
    Json r{{"name", c.name}, {"theoretical", number(c.theoretical)}, {"empirical", number(c.empirical)},
           {"se", number(c.se)}, {"pass", c.pass}};
    if (!c.note.empty()) r["note"] = c.note;
    cs.push_back(r);
  }
  j["checks"] = cs;
  if (!extra.empty()) j["extra"] = extra;
  if (failure) j["failure"] = *failure;
  j["artifacts"] = artifacts;
  return j;
}

bool SuiteReport::pass() const {
  return std::all_of(runs.begin(), runs.end(), [](const RunReport& r) { return r.pass(); });
}

Json SuiteReport::to_json() const {
  Json j{{"suite", suite}, {"pass", pass()}};
  if (nothing_to_run) j["status"] = "nothing to run";
  Json rs = Json::array();
  for (const auto& r : runs) rs.push_back({{"scenario", r.scenario}, {"target", r.target}, {"pass", r.pass()}});
  j["runs"] = rs;
  return j;
}

// ---------------------------------------------------------------------------
// schema

std::vector<std::string> targets() { return {"simulate", "linear", "semilinear", "holder", "volterra", "verify"}; }

namespace {

Json common_defaults() {
  return {{"scenario", "unnamed"}, {"target", ""},     {"output_dir", "out"},  {"seed", 1},
          {"T", 1.0},              {"N", 256},         {"paths", 1000},        {"norm_p", 2.0},
          {"constants", Json::object()},               {"operator", {{"eigenvalues", {1.0}}}}};
}

Json target_defaults(const std::string& t) {
  const Json det0 = {{"family", "deterministic"}, {"value", 0.0}};
  if (t == "simulate")
    return {{"F", {{"family", "zero"}}},
            {"G", {{"family", "constant"}, {"value", 1.0}}},
            {"xi", det0},
            {"p", 2.0},
            {"picard", {{"rho", 0.5}, {"tol", 1e-12}, {"max_iter", 400}}},
            {"contraction", nullptr},
            {"truncation", nullptr},
            {"dependence", nullptr},
            {"increment", nullptr}};
  if (t == "linear")
    return {{"F", {{"family", "zero"}}},
            {"G", {{"family", "constant"}, {"value", 1.0}}},
            {"xi", det0},
            {"beta", 0.25},
            {"sigma", 0.1},
            {"flag", "F1"},
            {"mode", "exact_gauss"},
            {"residual", nullptr}};
  if (t == "semilinear")
    return {{"F1", {{"family", "zero"}}},
            {"F2", {{"family", "zero"}}},
            {"G", {{"family", "constant"}, {"value", 1.0}}},
            {"xi", det0},
            {"eta", 0.4},
            {"beta", 0.35},
            {"sigma", 0.1},
            {"gamma", nullptr},
            {"critical", false},
            {"kappa_margin", 0.1},
            {"mode", "exact_gauss"},
            {"study_paths", 200},
            {"dependence", nullptr}};
  if (t == "holder")
    return {{"profile", {{"family", "power"}, {"amp", 1.0}, {"exponent", -0.25}}},
            {"beta", 0.5},
            {"sigma", 0.25},
            {"tolerance", 0.05},
            {"expect_member", true},
            {"brownian_control", nullptr}};
  if (t == "volterra")
    return {{"mu1", {0.5, 1.0, 1.5}},
            {"mu2", {0.5, 1.0}},
            {"t", {0.0, 0.5, 1.0, 2.0, 5.0}},
            {"identity_tmax", 10.0},
            {"equality_N", 1000},
            {"tolerance", 1e-6}};
  if (t == "verify")
    return {{"p_list", {2.0, 3.0, 4.0}}, {"d", 4}, {"steps", 16}, {"samples", 100000}, {"candidate_c", nullptr}};
  std::string avail;
  for (const auto& x : targets()) avail += (avail.empty() ? "" : ", ") + x;
  throw Error("schema", "unknown target '" + t + "'; available: " + avail);
}

bool same_kind(const Json& def, const Json& v) {
  if (def.is_null()) return true;
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_number()) return v.is_number();
  if (def.is_string()) return v.is_string();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_object()) return v.is_object();
  if (def.is_array()) return v.is_array();
  return true;
}

}  // namespace

Json resolve_config(const Json& config) {
  require(config.is_object(), "schema", "config must be a JSON object");
  require(config.contains("target") && config["target"].is_string(), "schema",
          "offending keys: target (missing or not a string)");
  const std::string target = config["target"].get<std::string>();
  Json defs = common_defaults();
  defs.update(target_defaults(target));
  if (!config.contains("seed")) defs["seed"] = seed_from_env(1);
  std::vector<std::string> bad;
  for (auto it = config.begin(); it != config.end(); ++it) {
    if (!defs.contains(it.key())) {
      bad.push_back(it.key() + " (unknown)");
    } else if (!it.value().is_null() && !same_kind(defs[it.key()], it.value())) {
      bad.push_back(it.key() + " (expected " + std::string(defs[it.key()].type_name()) + ")");
    }
  }
  if (!bad.empty()) {
    std::string s;
    for (const auto& b : bad) s += (s.empty() ? "" : ", ") + b;
    throw Error("schema", "offending keys: " + s);
  }
  Json out = defs;
  for (auto it = config.begin(); it != config.end(); ++it) out[it.key()] = it.value();
  for (auto it = out.begin(); it != out.end();) {
    if (it.value().is_null()) it = out.erase(it); else ++it;
  }
  std::vector<std::string> range;
  if (out["T"].get<double>() <= 0) range.push_back("T (must be > 0)");
  if (out["N"].get<long>() < 1) range.push_back("N (must be >= 1)");
  if (out["paths"].get<long>() < 1) range.push_back("paths (must be >= 1)");
  if (out["norm_p"].get<double>() < 2) range.push_back("norm_p (must be >= 2)");
  if (!range.empty()) {
    std::string s;
    for (const auto& b : range) s += (s.empty() ? "" : ", ") + b;
    throw Error("schema", "offending keys: " + s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// targets

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct Ctx {
  const Json& cfg;
  RunReport& rep;
  Table& table;
  const EnsembleOptions& eo;
  std::uint64_t seed;
};

CheckRecord check(std::string name, double th, double em, double se, bool pass, std::string note = {}) {
  return {std::move(name), th, em, se, pass, std::move(note)};
}

TypeConstants constants_from(const Json& cfg, const NormSpec& ns, double q) {
  TypeConstants c = TypeConstants::defaults(ns, q);
  const Json& j = cfg["constants"];
  for (auto it = j.begin(); it != j.end(); ++it)
    require(it.key() == "c" || it.key() == "c_p", "schema", "offending keys: constants." + it.key() + " (unknown)");
  if (j.contains("c")) c.c = j["c"].get<double>();
  if (j.contains("c_p")) c.c_p = j["c_p"].get<double>();
  return TypeConstants(c.c, c.c_p);
}

ConvolutionMode mode_from(const Json& cfg) {
  const std::string m = cfg["mode"].get<std::string>();
  if (m == "exact_gauss") return ConvolutionMode::exact_gauss;
  if (m == "increment") return ConvolutionMode::increment;
  throw Error("schema", "offending keys: mode (expected exact_gauss or increment, got '" + m + "')");
}

std::size_t count_of(const Json& j, const char* key, std::size_t fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  require(j[key].is_number_integer() && j[key].get<long long>() > 0, "schema",
          std::string("offending keys: ") + key + " (positive integer expected)");
  return j[key].get<std::size_t>();
}

double num_of(const Json& j, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  require(j[key].is_number(), "schema", std::string("offending keys: ") + key + " (number expected)");
  return j[key].get<double>();
}

bool is_family(const Json& j, const char* f) { return j.value("family", std::string()) == f; }

// ---- simulate ----

void run_simulate(Ctx& c) {
  const Json& cfg = c.cfg;
  const SpectralOperator A = make_operator(cfg["operator"]);
  const int d = A.dim();
  const NormSpec ns(cfg["norm_p"].get<double>(), d);
  const double p = cfg["p"].get<double>(), T = cfg["T"].get<double>();
  const int N = cfg["N"].get<int>();
  ProblemSpec pr{A, make_coefficient(cfg["F"], d), make_coefficient(cfg["G"], d), make_initial(cfg["xi"], d),
                 T, p, ns, constants_from(cfg, ns, p)};
  pr.validate();
  const TimeGrid grid(T, N);
  PicardOptions po;
  const Json& pj = cfg["picard"];
  po.rho = num_of(pj, "rho", 0.5);
  po.tol = num_of(pj, "tol", 1e-12);
  po.max_iter = static_cast<int>(count_of(pj, "max_iter", 400));
  const std::size_t paths = cfg["paths"].get<std::size_t>();
  const bool global = !pr.F.local && !pr.G.local;

  if (global) {
    const EnsembleSolution ens = solve_ensemble(pr, grid, paths, c.seed, po, c.eo);
    const Mat mean = ens.moments.mean(), se = ens.moments.standard_error();
    c.table.header = {"t", "mean_abs_p", "se_abs_p", "mean_sq", "se_sq"};
    for (int k = 0; k <= N; ++k)
      c.table.rows.push_back({grid.node(k), mean(0, k), se(0, k), mean(1, k), se(1, k)});
    const MomentBoundReport mb = moment_bound_report(pr, ens);
    c.rep.checks.push_back(check("moment_bound_alpha", mb.alpha_theory, mb.alpha_empirical, 0.0, mb.pass));
    // additive Gaussian case: X(T) ~ N(S(T) xi, sum g^2 (1 - e^{-2 lambda T}) / (2 lambda))
    if (is_family(cfg["F"], "zero") && pr.G.state_independent && pr.xi.is_deterministic() && d == 1) {
      const Vec g = pr.G(0.0, Vec::Zero(d));
      const double lam = A.eigenvalues()(0);
      const double m = std::exp(-lam * T) * pr.xi.mean(0);
      const double v = g(0) * g(0) * (1 - std::exp(-2 * lam * T)) / (2 * lam);
      for (const double q : {2.0, p}) {
        const int row = q == 2.0 ? 1 : 0;
        const double th = gaussian_abs_moment(m, v, q);
        if (!std::isfinite(th)) continue;
        const double em = mean(row, N), s = se(row, N);
        c.rep.checks.push_back(check("gaussian_oracle_p" + csv::num(q), th, em, s, std::abs(em - th) <= 3 * s));
        if (q == p) break;
      }
    }
  }
  if (cfg.contains("contraction")) {
    require(global, "schema", "offending keys: contraction (needs globally Lipschitz coefficients)");
    const Json& j = cfg["contraction"];
    PicardOptions o = po;
    o.rho = num_of(j, "rho", po.rho);
    o.record_iters = static_cast<int>(count_of(j, "record_iters", 7));
    const ContractionStudy st = picard_contraction_study(pr, grid, count_of(j, "paths", paths), c.seed, o, c.eo);
    double worst = 0, worst_se = 0;
    for (std::size_t m = 0; m < st.ratio.size() && m < 5; ++m)
      if (st.ratio[m] > worst) worst = st.ratio[m], worst_se = st.ratio_se[m];
    c.rep.checks.push_back(check("picard_contraction", st.rho, worst, worst_se, st.pass,
                                 "window " + csv::num(st.Tbar)));
    Json r = Json::array();
    for (double x : st.ratio) r.push_back(number(x));
    Json dd = Json::array();
    for (double x : st.distance) dd.push_back(number(x));
    c.rep.extra["contraction"] = {{"Tbar", st.Tbar}, {"theoretical_factor", number(st.theoretical_factor)},
                                  {"ratio", r}, {"distance", dd}};
  }
  if (cfg.contains("dependence")) {
    const Json& j = cfg["dependence"];
    require(j.is_object() && j.contains("xi_bar"), "schema", "offending keys: dependence.xi_bar (missing)");
    const double n = num_of(j, "level", INFINITY);
    const DependenceReport dr = dependence_experiment(pr, make_initial(j["xi_bar"], d), grid,
                                                      count_of(j, "paths", paths), c.seed, n, po, c.eo);
    c.rep.checks.push_back(check("dependence_on_xi", dr.C1_theory, dr.sup_ratio, dr.sup_ratio_se, dr.pass));
  }
  if (cfg.contains("increment")) {
    const Json& j = cfg["increment"];
    require(j.is_object() && j.contains("pairs") && j["pairs"].is_array(), "schema",
            "offending keys: increment.pairs (list of [s_index, t_index])");
    std::vector<std::pair<int, int>> pairs;
    for (const auto& pp : j["pairs"]) pairs.emplace_back(pp.at(0).get<int>(), pp.at(1).get<int>());
    const double n = num_of(j, "level", INFINITY);
    const TimeIncrementReport ti =
        time_increment_experiment(pr, grid, count_of(j, "paths", paths), c.seed, pairs, n, po, c.eo);
    for (const auto& q : ti.pairs)
      c.rep.checks.push_back(check("time_increment_" + csv::num(q.s) + "_" + csv::num(q.t), q.rhs, q.lhs,
                                   q.lhs_se, q.pass));
  }
  if (cfg.contains("truncation")) {
    const Json& j = cfg["truncation"];
    require(j.is_object() && j.contains("levels") && j["levels"].is_array() && !j["levels"].empty(), "schema",
            "offending keys: truncation.levels (non-empty list)");
    std::vector<double> levels;
    for (const auto& l : j["levels"]) levels.push_back(l.get<double>());
    const std::size_t tp = count_of(j, "paths", paths);
    struct Rec {
      bool glued, blow_up;
      std::vector<int> tau;
    };
    std::size_t glued = 0, blown = 0;
    std::vector<int> tau0;
    ordered_ensemble(
        tp,
        [&](std::size_t i) {
          const BrownianPath w = sample_brownian(grid, c.seed, i);
          const LocalSolutionPath lp = solve_local(pr, grid, w, pr.xi.sample(c.seed, i), levels, po);
          return Rec{lp.glued, lp.blow_up, lp.tau_index};
        },
        [&](std::size_t i, Rec&& r) {
          glued += r.glued;
          blown += r.blow_up;
          if (i == 0) tau0 = r.tau;
        },
        c.eo);
    c.rep.checks.push_back(check("truncation_gluing", double(tp), double(glued), 0.0, glued == tp));
    c.rep.extra["truncation"] = {{"levels", levels}, {"blow_up_paths", blown}, {"tau_index_path0", tau0}};
    // deterministic x' = -lambda x + a x^2 from xi > lambda / a: level n reached at
    // t_n = ln((a - lambda/n) / (a - lambda/xi)) / lambda
    if (d == 1 && is_family(cfg["F"], "square") && is_family(cfg["G"], "zero") && pr.xi.is_deterministic()) {
      const double a = num_of(cfg["F"], "a", 1.0), lam = A.eigenvalues()(0), x0 = pr.xi.mean(0);
      const double dt = grid.dt();
      const bool oracle_blows = a * x0 > lam && std::log(a / (a - lam / x0)) / lam < T;
      c.rep.checks.push_back(check("blow_up_flag", oracle_blows, blown == tp, 0.0, (blown == tp) == oracle_blows));
      for (std::size_t l = 0; l < levels.size(); ++l) {
        const double n = levels[l];
        if (!(a * x0 > lam) || x0 > n) continue;
        const double tn = std::log((a - lam / n) / (a - lam / x0)) / lam;
        if (tn > T) continue;
        const double proj = std::ceil(tn / dt - 1e-12) * dt;
        const double got = tau0[l] <= N ? tau0[l] * dt : INFINITY;
        c.rep.checks.push_back(check("tau_vs_ode_n" + csv::num(n), proj, got, 0.0, std::abs(got - proj) <= 2 * dt));
      }
    }
  }
}

// ---- linear ----

AdditiveLinearSpec linear_spec(const Json& cfg) {
  const SpectralOperator A = make_operator(cfg["operator"]);
  const int d = A.dim();
  const NormSpec ns(cfg["norm_p"].get<double>(), d);
  AdditiveLinearSpec s{A, make_profile(cfg["F"], d), make_profile(cfg["G"], d), make_initial(cfg["xi"], d),
                       cfg["beta"].get<double>(), cfg["sigma"].get<double>(), LinearCondition::F1, ns,
                       constants_from(cfg, ns, 2.0), mode_from(cfg)};
  const std::string f = cfg["flag"].get<std::string>();
  require(f == "F1" || f == "F2", "schema", "offending keys: flag (expected F1 or F2, got '" + f + "')");
  s.flag = f == "F1" ? LinearCondition::F1 : LinearCondition::F2;
  s.validate();
  return s;
}

void run_linear(Ctx& c) {
  const Json& cfg = c.cfg;
  const AdditiveLinearSpec spec = linear_spec(cfg);
  const double T = cfg["T"].get<double>();
  const int N = cfg["N"].get<int>();
  const TimeGrid grid(T, N);
  const LinearAdditiveSolver solver(spec, grid);
  const RegularityReport r = regularity_report(solver, cfg["paths"].get<std::size_t>(), c.seed, c.eo);
  c.table.header = {"t", "mean_sq", "se_sq", "mean_beta_sq", "bound", "pass"};
  double worst = -INFINITY;
  std::size_t arg = 0;
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    c.table.rows.push_back({r.t[k], r.second_moment[k], r.second_moment_se[k], r.beta_moment[k], r.bound[k],
                            r.second_moment[k] <= r.bound[k] ? 1.0 : 0.0});
    const double q = r.second_moment[k] / r.bound[k];
    if (q > worst) worst = q, arg = k;
  }
  c.rep.checks.push_back(check("moment_bound", r.bound[arg], r.second_moment[arg], r.second_moment_se[arg],
                               r.moment_pass, "rho " + csv::num(r.constants.rho)));
  c.rep.checks.push_back(check("continuity_max_jump", r.jump_coarse, r.jump_fine, 0.0, r.continuity_pass));
  c.rep.checks.push_back(check("holder_exponent", spec.beta - 0.1, r.kolmogorov.exponent, r.kolmogorov.exponent_se,
                               r.exponent_pass));
  if (!r.increment_lag.empty()) {
    double wr = 0;
    std::size_t wa = 0;
    for (std::size_t j = 0; j < r.increment_lag.size(); ++j)
      if (r.increment_lhs[j] / r.increment_rhs[j] > wr) wr = r.increment_lhs[j] / r.increment_rhs[j], wa = j;
    c.rep.checks.push_back(check("increment_bound", r.increment_rhs[wa], r.increment_lhs[wa], r.increment_lhs_se[wa],
                                 r.increment_pass));
  }
  c.rep.extra["constants"] = {{"F_norm", number(r.constants.F_norm)}, {"G_norm", number(r.constants.G_norm)},
                              {"c1", number(r.constants.c1)},         {"rho", number(r.constants.rho)},
                              {"K_increment", number(r.constants.K_increment)}};
  if (is_family(cfg["F"], "zero") && spec.xi.is_deterministic() && spec.norm.p == 2.0) {
    const double m = semigroup_apply(spec.A, T, spec.xi.mean).squaredNorm();
    const double th = m + convolution_covariance_oracle(spec.A, spec.G, T);
    const double em = r.second_moment.back(), se = r.second_moment_se.back();
    c.rep.checks.push_back(check("variance_oracle", th, em, se, std::abs(em - th) <= 3 * se));
  }
  if (cfg.contains("residual")) {
    const Json& j = cfg["residual"];
    std::vector<int> Ns{512, 1024, 2048, 4096};
    if (j.contains("N")) Ns = j["N"].get<std::vector<int>>();
    const double delta = num_of(j, "delta", 0.5), cd = num_of(j, "c_delta", INFINITY);
    const std::size_t rp = count_of(j, "paths", 8);
    const Vec xi = spec.xi.sample(c.seed, 0);
    std::vector<double> res;
    for (int n : Ns) {
      const TimeGrid g(T, n);
      const LinearAdditiveSolver s(spec, g);
      double acc = 0;
      for (std::size_t i = 0; i < rp; ++i) {
        const BrownianPath w = sample_brownian(g, c.seed, i);
        const Vec x = spec.xi.sample(c.seed, i);
        const StrictResidualReport sr = strict_residual(s.solve(w, x), s, w, x, delta, cd);
        require(sr.assumption_ok, "domain",
                "operator bound t^delta |A S(t)| exceeds c_delta: measured " + csv::num(sr.c_delta_measured));
        acc += sr.max_residual;
      }
      res.push_back(acc / rp);
    }
    const bool deterministic = is_family(cfg["G"], "zero");
    if (deterministic) {
      c.rep.checks.push_back(check("strict_residual_abs", 1e-6, res.back(), 0.0, res.back() < 1e-6));
    } else {
      for (std::size_t i = 0; i + 1 < res.size(); ++i) {
        const double q = res[i] / res[i + 1];
        c.rep.checks.push_back(check("residual_halving_N" + std::to_string(Ns[i + 1]), 2.0, q, 0.0,
                                     q >= 2.0 / 1.5 && q <= 2.0 * 1.5));
      }
    }
    c.rep.extra["residual"] = {{"N", Ns}, {"max_residual", res}};
  }
}

// ---- semilinear ----

SemilinearSpec semilinear_spec(const Json& cfg) {
  const SpectralOperator A = make_operator(cfg["operator"]);
  const int d = A.dim();
  const NormSpec ns(cfg["norm_p"].get<double>(), d);
  SemilinearSpec s{A, Nonlinearity::none(d), TimeProfile::zero(d), TimeProfile::zero(d),
                   InitialLaw::deterministic(Vec::Zero(d)), 0.4, 0.35, 0.1, std::nullopt, false,
                   ns, TypeConstants{}};
  s.eta = cfg["eta"].get<double>();
  s.beta = cfg["beta"].get<double>();
  s.sigma = cfg["sigma"].get<double>();
  if (cfg.contains("gamma")) s.gamma = cfg["gamma"].get<double>();
  s.critical = cfg["critical"].get<bool>();
  s.F1 = make_nonlinearity(cfg["F1"], A, s.eta, s.beta, s.critical);
  s.F2 = make_profile(cfg["F2"], d);
  s.G = make_profile(cfg["G"], d);
  s.xi = make_initial(cfg["xi"], d);
  s.norm = ns;
  s.constants = constants_from(cfg, ns, 2.0);
  s.mode = mode_from(cfg);
  s.kappa_margin = cfg["kappa_margin"].get<double>();
  s.validate();
  return s;
}

Json certificate_json(const KappaCertificate& k) {
  auto arr = [](const std::array<double, 3>& a) { return Json{number(a[0]), number(a[1]), number(a[2])}; };
  return {{"C1", number(k.C1)},           {"C2", number(k.C2)},
          {"kappa2", number(k.kappa2)},   {"T_local", number(k.T_local)},
          {"capped", k.capped},           {"at_T_local", arr(k.at_T_local)},
          {"at_1_1_T_local", arr(k.at_1_1)}, {"thresholds", arr(k.thresholds)},
          {"hold_at_T_local", k.hold_at_T_local}, {"violated_at_1_1", k.violated_at_1_1},
          {"contraction_factor", number(k.contraction_factor)}};
}

void run_semilinear(Ctx& c) {
  const Json& cfg = c.cfg;
  const SemilinearSpec spec = semilinear_spec(cfg);
  const double T = cfg["T"].get<double>();
  const int N = cfg["N"].get<int>();
  const std::size_t paths = cfg["paths"].get<std::size_t>();
  const TimeGrid grid(T, N);
  const SemilinearSolver solver(spec, grid);
  const KappaCertificate& k = solver.certificate();
  c.rep.extra["certificate"] = certificate_json(k);
  double worst = -INFINITY;
  for (int i = 0; i < 3; ++i) worst = std::max(worst, k.at_T_local[i] / k.thresholds[i]);
  c.rep.checks.push_back(check("certificate_holds", 1.0, worst, 0.0, k.hold_at_T_local));
  double over = -INFINITY;
  for (int i = 0; i < 3; ++i) over = std::max(over, k.at_1_1[i] / k.thresholds[i]);
  c.rep.checks.push_back(check("certificate_tight", 1.0, over, 0.0, k.violated_at_1_1 || k.capped,
                               k.capped ? "capped at T" : ""));
  const SemilinearOptions so;
  if (spec.F1.zero) {
    double diff = 0;
    for (std::size_t i = 0; i < std::min<std::size_t>(paths, 8); ++i) {
      const BrownianPath w = sample_brownian(grid, c.seed, i);
      const Vec x = spec.xi.sample(c.seed, i);
      diff = std::max(diff, (solver.solve(w, x, so).X.values - solver.linear().solve(w, x).X.values)
                                .cwiseAbs()
                                .maxCoeff());
    }
    c.rep.checks.push_back(check("reduction_to_linear", 1e-10, diff, 0.0, diff <= 1e-10));
  }
  const std::size_t sp = std::max<std::size_t>(2, cfg["study_paths"].get<std::size_t>());
  if (spec.critical) {
    const CriticalReport cr = solve_critical(solver, sp, c.seed, so, c.eo);
    c.table.header = {"t", "mean_sq", "bound", "mean_eta_sq"};
    for (std::size_t i = 0; i < cr.t.size(); ++i)
      c.table.rows.push_back({cr.t[i], cr.second_moment[i], cr.bound[i], cr.eta_moment[i]});
    double wr = 0, ws = 0;
    for (std::size_t m = 0; m < cr.study.ratio.size() && m < 5; ++m)
      if (cr.study.ratio[m] > wr) wr = cr.study.ratio[m], ws = cr.study.ratio_se[m];
    c.rep.checks.push_back(check("picard_contraction", cr.study.theoretical_ratio, wr, ws, cr.study.pass));
    c.rep.checks.push_back(check("critical_moment_bound", 1.0, 0.0, 0.0, cr.moment_pass));
    c.rep.extra["eta_slope"] = number(cr.eta_slope);
  } else {
    const SemilinearStudy st = semilinear_picard_study(solver, sp, c.seed, so, c.eo);
    double wr = 0, ws = 0;
    for (std::size_t m = 0; m < st.ratio.size() && m < 5; ++m)
      if (st.ratio[m] > wr) wr = st.ratio[m], ws = st.ratio_se[m];
    c.rep.checks.push_back(check("picard_contraction", st.theoretical_ratio, wr, ws, st.pass));
    double un = 0;
    for (const auto& n : st.iterate_norms) un = std::max({un, n.eta_term, n.beta_term});
    c.rep.checks.push_back(check("upsilon_preserved", k.kappa2, un, 0.0, st.upsilon_ok));
    const MomentProfileReport mp = moment_profile_check(solver, paths, c.seed, so, c.eo);
    c.table.header = {"t", "beta_moment", "beta_bound", "eta_moment", "eta_bound"};
    for (std::size_t i = 0; i < mp.t.size(); ++i)
      c.table.rows.push_back({mp.t[i], mp.beta_moment[i], mp.beta_bound[i], mp.eta_moment[i], mp.eta_bound[i]});
    c.rep.checks.push_back(check("moment_profile_beta", 0.0, mp.beta_slack, 0.0, mp.beta_slack >= 0));
    c.rep.checks.push_back(check("moment_profile_eta", 0.0, mp.eta_slack, 0.0, mp.eta_slack >= 0));
    if (spec.gamma) {
      const MoreRegularReport mr = more_regular_check(solver, paths, c.seed, so, c.eo);
      c.rep.checks.push_back(check("more_regular_decay", -2 * mr.varrho - 0.1, mr.eta_decay_slope, 0.0, mr.pass,
                                   "gamma profile sup " + csv::num(mr.gamma_profile_sup)));
    }
  }
  if (cfg.contains("dependence")) {
    const Json& j = cfg["dependence"];
    const std::string what = j.value("perturb", std::string("xi"));
    require(what == "xi" || what == "F2", "schema", "offending keys: dependence.perturb (xi or F2)");
    const Json& bj = j.value("balls", Json::object());
    const Balls balls{num_of(bj, "R1", 1.0), num_of(bj, "R2", 1.0), num_of(bj, "R3", 1.0)};
    const std::size_t dp = count_of(j, "paths", paths);
    const int dN = static_cast<int>(count_of(j, "N", N));
    auto perturbed = [&](double eps) {
      SemilinearSpec b = spec;
      if (what == "xi") {
        b.xi = InitialLaw::gaussian((1 + eps) * spec.xi.mean, (1 + eps) * spec.xi.stddev);
      } else {
        const TimeProfile f = spec.F2;
        b.F2 = {f.name, f.a, [f, eps](double t) { return Vec((1 + eps) * f.h(t)); }};
      }
      return b;
    };
    const double eps = num_of(j, "eps", 0.1);
    const SemilinearDependenceReport dr = dependence_check(spec, perturbed(eps), balls, T, dN, dp, c.seed, so, c.eo);
    c.rep.checks.push_back(check("dependence_22_" + what, 1.0, dr.max_ratio22, 0.0, dr.max_ratio22 <= 1.0));
    c.rep.checks.push_back(check("dependence_23_" + what, 1.0, dr.max_ratio23, 0.0, dr.max_ratio23 <= 1.0));
    c.rep.extra["dependence"] = {{"T_B", dr.T_B}, {"C22", number(dr.C22)}, {"C23", number(dr.C23)},
                                 {"D_xi", dr.D_xi}, {"D_F", dr.D_F}};
    if (j.contains("sweep")) {
      const std::vector<double> eps_list = j["sweep"].get<std::vector<double>>();
      std::vector<double> sups;
      for (double e : eps_list)
        sups.push_back(dependence_check(spec, perturbed(e), balls, T, dN, dp, c.seed, so, c.eo).sup_lhs22);
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      const double n = double(eps_list.size());
      for (std::size_t i = 0; i < eps_list.size(); ++i) {
        const double x = std::log(eps_list[i]), y = std::log(sups[i]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
      }
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      c.rep.checks.push_back(check("eps_sweep_exponent", 2.0, slope, 0.0, std::abs(slope - 2.0) <= 0.1));
      c.rep.extra["sweep"] = {{"eps", eps_list}, {"sup_lhs22", sups}};
    }
  }
}

// ---- holder ----

void run_holder(Ctx& c) {
  const Json& cfg = c.cfg;
  const double T = cfg["T"].get<double>();
  const int N = cfg["N"].get<int>();
  const TimeProfile f = make_profile(cfg["profile"], 1);
  const double beta = cfg["beta"].get<double>(), sigma = cfg["sigma"].get<double>();
  require(0 < sigma && sigma < beta && beta <= 1, "schema",
          "offending keys: beta, sigma (need 0 < sigma < beta <= 1)");
  const WeightedHolderSample s =
      WeightedHolderSample::from_function([&](double t) { return f(t); }, T, N, beta, sigma, cfg["norm_p"].get<double>());
  const MembershipReport m = membership_check(s, cfg["tolerance"].get<double>());
  const bool expect = cfg["expect_member"].get<bool>();
  c.rep.checks.push_back(check("membership", expect, m.member, 0.0, m.member == expect,
                               "norm " + csv::num(m.norm.norm)));
  c.table.header = {"window", "oscillation", "defect"};
  for (std::size_t i = 0; i < m.windows.size(); ++i)
    c.table.rows.push_back({m.windows[i], i < m.oscillation.size() ? m.oscillation[i] : NAN,
                            i < m.defects.size() ? m.defects[i] : NAN});
  c.rep.extra["norm"] = {{"weight_sup", number(m.norm.weight_sup)}, {"holder_sup", number(m.norm.holder_sup)},
                         {"limit_defect", number(m.norm.limit_defect)}, {"norm", number(m.norm.norm)}};
  if (cfg.contains("brownian_control")) {
    const Json& j = cfg["brownian_control"];
    const int bN = static_cast<int>(count_of(j, "N", 1024));
    const TimeGrid g(1.0, bN);
    KolmogorovAccumulator acc(1.0, bN, KolmogorovAccumulator::dyadic_lags(bN, 10, 4));
    ordered_ensemble(
        count_of(j, "paths", 10000),
        [&](std::size_t i) { return acc.path_record(sample_brownian(g, c.seed, i).w.transpose()); },
        [&](std::size_t, Vec&& r) { acc.add_record(r); }, c.eo);
    const KolmogorovEstimate e = acc.estimate();
    c.rep.checks.push_back(check("brownian_kolmogorov", 0.5, e.exponent, e.exponent_se,
                                 std::abs(e.exponent - 0.5) <= 0.05));
  }
}

// ---- volterra ----

void run_volterra(Ctx& c) {
  const Json& cfg = c.cfg;
  const double tmax = cfg["identity_tmax"].get<double>();
  double worst = 0;
  for (int i = 0; i <= 100; ++i) {
    const double t = tmax * i / 100;
    worst = std::max(worst, std::abs(e_series(1.0, 1.0, t).value - std::exp(t)));
  }
  c.rep.checks.push_back(check("e_series_exp_identity", 1e-10, worst, 0.0, worst < 1e-10));
  const auto mu1 = cfg["mu1"].get<std::vector<double>>(), mu2 = cfg["mu2"].get<std::vector<double>>(),
             ts = cfg["t"].get<std::vector<double>>();
  c.table.header = {"mu1", "mu2", "t", "series", "bound"};
  for (double a : mu1)
    for (double b : mu2) {
      const EBoundReport r = e_bound_check(a, b, ts);
      for (std::size_t i = 0; i < r.t.size(); ++i) c.table.rows.push_back({a, b, r.t[i], r.series[i], r.bound[i]});
      c.rep.checks.push_back(check("e_bound_mu1_" + csv::num(a) + "_mu2_" + csv::num(b), 1.0, r.worst_ratio, 0.0, r.pass));
    }
  const int n = cfg["equality_N"].get<int>();
  VolterraSample ph;
  ph.t = Vec::LinSpaced(n + 1, 0.0, 1.0);
  ph.values = Mat::Constant(n + 1, n + 1, NAN);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= i; ++j) ph.values(i, j) = std::exp(ph.t(i) - ph.t(j));
  const double tol = cfg["tolerance"].get<double>();
  const VolterraReport vr = volterra_verify(ph, {1.0, 1.0, 1.0, 1.0, 1.0}, tol, tol);
  c.rep.checks.push_back(check("volterra_equality_case", tol, vr.max_rel_gap, 0.0,
                               vr.applicable && vr.conclusion_holds && vr.max_rel_gap <= tol, vr.status()));
}

// ---- verify ----

void run_verify(Ctx& c) {
  const Json& cfg = c.cfg;
  const std::size_t S = cfg["samples"].get<std::size_t>();
  const int d = cfg["d"].get<int>(), steps = cfg["steps"].get<int>();
  const std::uint64_t seed = c.seed;
  auto martingale = [&](int dim, std::size_t i) {
    Mat m = Mat::Zero(dim, steps + 1);
    for (int k = 0; k < steps; ++k)
      for (int r = 0; r < dim; ++r)
        m(r, k + 1) = m(r, k) + rng::normal(seed, i, rng::Stream::auxiliary, static_cast<std::uint32_t>(r),
                                             static_cast<std::uint64_t>(k));
    return m;
  };
  auto mtype2 = [&](int dim, double p) {
    MType2Accumulator acc(NormSpec(p, dim), steps);
    ordered_ensemble(S, [&](std::size_t i) { return martingale(dim, i); }, [&](std::size_t, Mat&& m) { acc.add(m); },
                     c.eo);
    return acc;
  };
  c.table.header = {"p", "d", "ratio", "ratio_se", "candidate_c"};
  for (double p : cfg["p_list"].get<std::vector<double>>()) {
    const double cand = cfg.contains("candidate_c") ? cfg["candidate_c"].get<double>() : p - 1;
    const MType2Report r = mtype2(d, p).report(cand);
    c.table.rows.push_back({p, double(d), r.ratio, r.ratio_se, cand});
    c.rep.checks.push_back(check("mtype2_p" + csv::num(p), cand, r.ratio, r.ratio_se, r.pass));
  }
  {
    const MType2Report r = mtype2(1, 2.0).report(1.0);
    c.rep.checks.push_back(check("mtype2_scalar_isometry", 1.0, r.ratio, r.ratio_se,
                                 std::abs(r.ratio - 1) <= 3 * r.ratio_se && r.ratio >= 0.97 && r.ratio <= 1.03));
  }
  const double T = cfg["T"].get<double>();
  const int N = cfg["N"].get<int>();
  const TimeGrid g(T, N);
  const MomentTable tab = ensemble_moments(
      cfg["paths"].get<std::size_t>(), 1, 3,
      [&](std::size_t i) {
        const BrownianPath w = sample_brownian(g, seed, i);
        double I = 0;
        for (int k = 0; k < N; ++k) I += w.w(k) * w.increment(k);
        Mat r(1, 3);
        r << w.w(N) * w.w(N), I, I * I;
        return r;
      },
      c.eo);
  const Mat m = tab.mean(), se = tab.standard_error();
  c.rep.checks.push_back(check("ito_isometry_const", T, m(0, 0), se(0, 0), std::abs(m(0, 0) - T) <= 3 * se(0, 0)));
  c.rep.checks.push_back(check("ito_w_dw_mean", 0.0, m(0, 1), se(0, 1), std::abs(m(0, 1)) <= 3 * se(0, 1)));
  c.rep.checks.push_back(check("ito_w_dw_isometry", T * T / 2, m(0, 2), se(0, 2),
                               std::abs(m(0, 2) - T * T / 2) <= 3 * se(0, 2)));
  const NormSpec ns(cfg["norm_p"].get<double>(), 1);
  const TypeConstants tc = constants_from(cfg, ns, 4.0);
  const IntegralInequalityReport ir = integral_inequality_report(
      [&](const BrownianPath& w) { return AdaptedProcess{w.grid, Mat::Ones(1, w.grid.N + 1)}; }, g,
      cfg["paths"].get<std::size_t>(), seed, ns, tc, 4.0, c.eo);
  c.rep.checks.push_back(check("integral_inequality_p4", ir.rhs, ir.lhs, ir.lhs_se, ir.pass));
}

void write_artifacts(const RunReport& rep, const Table& t, const fs::path& dir, std::vector<std::string>& files) {
  fs::create_directories(dir);
  const fs::path csvp = dir / (rep.scenario + ".csv"), plot = dir / (rep.scenario + ".plot.dat");
  {
    std::ofstream os(csvp, std::ios::binary);
    csv::row(os, t.header);
    for (const auto& r : t.rows) {
      std::vector<std::string> f;
      for (double v : r) f.push_back(csv::num(v));
      csv::row(os, f);
    }
  }
  {
    std::ofstream os(plot, std::ios::binary);
    os << '#';
    for (const auto& h : t.header) os << ' ' << h;
    os << '\n';
    for (const auto& r : t.rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? " " : "") << csv::num(r[i]);
      os << '\n';
    }
  }
  files.push_back(csvp.string());
  files.push_back(plot.string());
  files.push_back((dir / (rep.scenario + ".json")).string());
}

}  // namespace

RunReport run_scenario(const Json& config, const RunOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const Json cfg = resolve_config(config);
  RunReport rep;
  rep.scenario = cfg["scenario"].get<std::string>();
  rep.target = cfg["target"].get<std::string>();
  rep.config = cfg;
  rep.version = version();
  Table table;
  Ctx c{cfg, rep, table, opt.ensemble, cfg["seed"].get<std::uint64_t>()};
  try {
    if (rep.target == "simulate") run_simulate(c);
    else if (rep.target == "linear") run_linear(c);
    else if (rep.target == "semilinear") run_semilinear(c);
    else if (rep.target == "holder") run_holder(c);
    else if (rep.target == "volterra") run_volterra(c);
    else run_verify(c);
  } catch (const Error& e) {
    if (e.kind() == "schema") throw;
    rep.failure = e.what();
    rep.checks.push_back(check("failure:" + e.kind(), 0, 0, 0, false, e.what()));
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (opt.write_artifacts) {
    const fs::path dir = opt.output_dir.empty() ? fs::path(cfg["output_dir"].get<std::string>()) : fs::path(opt.output_dir);
    write_artifacts(rep, table, dir, rep.artifacts);
    std::ofstream os(dir / (rep.scenario + ".json"), std::ios::binary);
    os << rep.to_json().dump(2) << '\n';
  }
  return rep;
}

// ---------------------------------------------------------------------------
// suites

std::vector<std::string> suite_names() { return {"section2", "section3", "section4", "section5", "all"}; }

std::vector<Json> suite_configs(const std::string& name) {
  const Json lap8 = {{"generator", "dirichlet_laplacian_1d"}, {"d", 8}, {"scale", 81.0}};
  std::map<std::string, std::vector<Json>> s;
  s["section2"] = {
      {{"scenario", "mtype2"}, {"target", "verify"}, {"samples", 20000}, {"paths", 20000}, {"N", 256}},
      {{"scenario", "volterra-lemma"}, {"target", "volterra"}},
      {{"scenario", "holder-power"}, {"target", "holder"}, {"N", 1024},
       {"brownian_control", {{"paths", 4000}, {"N", 1024}}}},
  };
  s["section3"] = {
      {{"scenario", "ou-baseline"}, {"target", "simulate"}, {"N", 1024}, {"paths", 20000}},
      {{"scenario", "sin-contraction"}, {"target", "simulate"}, {"operator", {{"eigenvalues", {1.0, 4.0}}}},
       {"F", {{"family", "sin"}, {"amp", 0.5}}}, {"G", {{"family", "sin"}, {"amp", 0.5}}},
       {"xi", {{"family", "deterministic"}, {"value", 1.0}}}, {"N", 1024}, {"paths", 1000},
       {"contraction", {{"paths", 500}}}},
      {{"scenario", "geometric-moments"}, {"target", "simulate"}, {"F", {{"family", "linear"}, {"a", -0.5}}},
       {"G", {{"family", "linear"}, {"a", 0.5}}}, {"xi", {{"family", "gaussian"}, {"mean", 1.0}, {"std", 0.5}}},
       {"p", 4.0}, {"N", 128}, {"paths", 2000}},
      {{"scenario", "blow-up"}, {"target", "simulate"}, {"F", {{"family", "square"}, {"a", 1.0}}},
       {"G", {{"family", "zero"}}}, {"xi", {{"family", "deterministic"}, {"value", 2.0}}}, {"N", 4096},
       {"paths", 4}, {"truncation", {{"levels", {3.0, 4.0, 6.0}}, {"paths", 4}}}},
  };
  s["section4"] = {
      {{"scenario", "linear-holder"}, {"target", "linear"}, {"operator", lap8},
       {"G", {{"family", "power"}, {"amp", 1.0}, {"exponent", -0.25}}}, {"beta", 0.25}, {"sigma", 0.1},
       {"N", 512}, {"paths", 2000}},
      {{"scenario", "linear-residual"}, {"target", "linear"}, {"operator", {{"eigenvalues", {1.0, 2.0}}}},
       {"F", {{"family", "constant"}, {"value", 1.0}}}, {"mode", "increment"},
       {"xi", {{"family", "deterministic"}, {"value", 1.0}}}, {"N", 256}, {"paths", 500},
       {"residual", {{"N", {512, 1024, 2048, 4096}}, {"paths", 8}}}},
      {{"scenario", "linear-residual-deterministic"}, {"target", "linear"},
       {"operator", {{"eigenvalues", {1.0, 2.0}}}}, {"F", {{"family", "constant"}, {"value", 1.0}}},
       {"G", {{"family", "zero"}}}, {"xi", {{"family", "deterministic"}, {"value", 1.0}}}, {"N", 256},
       {"paths", 2}, {"residual", {{"N", {512, 1024, 2048, 4096}}, {"paths", 1}}}},
  };
  s["section5"] = {
      {{"scenario", "semilinear-reduction"}, {"target", "semilinear"}, {"operator", lap8},
       {"F2", {{"family", "constant"}, {"value", 1.0}}}, {"N", 256}, {"paths", 500}},
      {{"scenario", "semilinear-sin"}, {"target", "semilinear"}, {"operator", lap8},
       {"F1", {{"family", "sin_eta"}, {"amp", 1.0}}}, {"F2", {{"family", "constant"}, {"value", 1.0}}},
       {"gamma", 0.4}, {"N", 256}, {"paths", 500}},
      {{"scenario", "semilinear-dependence"}, {"target", "semilinear"}, {"operator", lap8},
       {"F1", {{"family", "sin_eta"}, {"amp", 1.0}}}, {"F2", {{"family", "constant"}, {"value", 1.0}}},
       {"xi", {{"family", "deterministic"}, {"value", 0.1}}}, {"N", 128}, {"paths", 200},
       {"dependence", {{"perturb", "F2"}, {"eps", 0.1}, {"paths", 500},
                       {"balls", {{"R1", 10.0}, {"R2", 10.0}, {"R3", 10.0}}}}}},
      {{"scenario", "semilinear-critical"}, {"target", "semilinear"}, {"operator", lap8},
       {"F1", {{"family", "sin_eta_plus_x"}}}, {"critical", true}, {"N", 1024}, {"paths", 300}},
  };
  if (name == "all") {
    std::vector<Json> all;
    for (const char* k : {"section2", "section3", "section4", "section5"})
      all.insert(all.end(), s[k].begin(), s[k].end());
    return all;
  }
  auto it = s.find(name);
  if (it == s.end()) {
    std::string avail;
    for (const auto& x : suite_names()) avail += (avail.empty() ? "" : ", ") + x;
    throw Error("unknown-suite", "unknown suite '" + name + "'; available: " + avail);
  }
  return it->second;
}

SuiteReport run_suite(const std::string& name, const RunOptions& opt) {
  SuiteReport s;
  s.suite = name;
  for (const Json& c : suite_configs(name)) s.runs.push_back(run_scenario(c, opt));
  return s;
}

SuiteReport run_directory(const std::string& dir, const RunOptions& opt) {
  require(fs::is_directory(dir), "io", "scenario directory not found: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  SuiteReport s;
  s.suite = dir;
  s.nothing_to_run = files.empty();
  for (const auto& f : files) {
    std::ifstream is(f);
    Json j;
    try {
      j = Json::parse(is);
    } catch (const Json::exception& e) {
      throw Error("schema", f.string() + ": " + e.what());
    }
    s.runs.push_back(run_scenario(j, opt));
  }
  return s;
}

}  // namespace spde::harness
