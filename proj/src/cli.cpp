// Copyright 2026-present the rsaa authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rsaa/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>

#include <fmt/format.h>
#include <tbb/global_control.h>

#include "CLI11.hpp"
#include "rsaa/asymptotics.hpp"
#include "rsaa/error.hpp"
#include "rsaa/kernels.hpp"
#include "rsaa/rng.hpp"
#include "rsaa/risk.hpp"
#include "rsaa/saa.hpp"

namespace rsaa::cli {
namespace {

using io::json;

double pnum(const json& p, const char* key) {
  if (!p.contains(key) || !p.at(key).is_number()) throw ConfigError(fmt::format("params: '{}' must be a number", key));
  return p.at(key).get<double>();
}

double pnum_or(const json& p, const char* key, double fallback) { return p.contains(key) ? pnum(p, key) : fallback; }

std::size_t pcount(const json& v, const char* key) {
  if (!(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0))) {
    throw ConfigError(fmt::format("params: '{}' must be a non-negative integer", key));
  }
  return v.get<std::size_t>();
}

std::size_t pcount(const json& p, const char* key, std::optional<std::size_t> fallback) {
  if (!p.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(fmt::format("params: missing '{}'", key));
  }
  return pcount(p.at(key), key);
}

std::vector<std::size_t> pcounts(const json& p, const char* key) {
  if (!p.contains(key)) throw ConfigError(fmt::format("params: missing '{}'", key));
  const json& v = p.at(key);
  std::vector<std::size_t> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(pcount(e, key));
  } else {
    out.push_back(pcount(v, key));
  }
  return out;
}

std::vector<double> pnums(const json& p, const char* key) {
  if (!p.contains(key)) throw ConfigError(fmt::format("params: missing '{}'", key));
  const json& v = p.at(key);
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(fmt::format("params: '{}' must hold numbers", key));
      out.push_back(e.get<double>());
    }
  } else if (v.is_number()) {
    out.push_back(v.get<double>());
  } else {
    throw ConfigError(fmt::format("params: '{}' must be a number or an array", key));
  }
  return out;
}

bool pflag(const json& p, const char* key) {
  if (!p.contains(key)) return false;
  if (!p.at(key).is_boolean()) throw ConfigError(fmt::format("params: '{}' must be a boolean", key));
  return p.at(key).get<bool>();
}

std::uint64_t need_seed(const ExperimentConfig& cfg) {
  if (!cfg.master_seed) throw ConfigError(fmt::format("command '{}' is stochastic and needs a master seed", cfg.command));
  return *cfg.master_seed;
}

Divergence pick_pair(const ExperimentConfig& cfg, const io::Problem& prob) {
  if (cfg.params.contains("divergence")) return Divergence::make(io::parse_divergence(cfg.params.at("divergence")));
  return prob.need_pair();
}

GridConfig pick_grid(const ExperimentConfig& cfg, const io::Problem& prob) {
  return cfg.params.contains("grid") ? io::parse_grid(cfg.params.at("grid")) : prob.grid;
}

json risk_json(const RiskValue& r) {
  return {{"value", r.value},         {"x_star", r.x_star},       {"x_lo", r.x_lo},
          {"x_hi", r.x_hi},           {"search_lo", r.search_lo}, {"search_hi", r.search_hi},
          {"iterations", r.iterations}, {"quadrature_converged", r.quadrature_converged}, {"quad_nodes", r.quad_nodes}};
}

json truth_json(const TrueValue& t) {
  json mins = json::array();
  for (const auto& m : t.minimizers) {
    mins.push_back({{"theta", m.theta}, {"x", m.x}, {"value", m.value}, {"sigma2", m.sigma2}});
  }
  return {{"v_star", t.v_star},
          {"theta_star", t.theta_star},
          {"x_star", t.x_star},
          {"x_lo", t.x_lo},
          {"x_hi", t.x_hi},
          {"sigma2", t.sigma2},
          {"sigma2_uncentered", t.sigma2_uncentered},
          {"mean_h", t.mean_h},
          {"unique", t.unique},
          {"minimizers", mins},
          {"quadrature_converged", t.quadrature_converged},
          {"quad_nodes", t.quad_nodes}};
}

json constants_json(const BoundConstants& c) {
  return {{"x_bar", c.x_bar}, {"eta", c.eta}, {"delta_bar", c.delta_bar}, {"eta_bar", c.eta_bar},
          {"V", c.V},         {"K", c.K},     {"D", c.D},                 {"K_k", c.K_k},
          {"beta", c.beta},   {"m", c.m},     {"phi_at_0", c.phi_at_0}};
}

// Tail-bound constants from params: V, D and eta, or L (with the pair) for eta.
BoundConstants parse_constants(const json& j, const std::optional<Divergence>& pair) {
  BoundConstants c;
  c.V = pnum_or(j, "V", c.V);
  c.K = pnum_or(j, "K", c.K);
  c.D = pnum_or(j, "D", c.D);
  if (j.contains("eta")) {
    c.eta = pnum(j, "eta");
  } else if (j.contains("L")) {
    if (!pair) throw ConfigError("constants: 'L' needs a divergence");
    const double L = pnum(j, "L");
    c.x_bar = xbar_constant(*pair, L, pair->conj(L));
    c.eta = eta_bounded(*pair, L);
  }
  c.eta_bar = pnum_or(j, "eta_bar", c.eta_bar);
  c.delta_bar = pnum_or(j, "delta_bar", c.delta_bar);
  if (j.contains("phi_at_0")) {
    c.phi_at_0 = pnum(j, "phi_at_0");
  } else if (pair) {
    c.phi_at_0 = pair->phi_at_0();
  }
  if (!(c.V > 0.0)) throw InvalidParameter("constants: V must be positive");
  if (!(c.D >= 0.0)) throw InvalidParameter("constants: D must be non-negative");
  return c;
}

json run_oce(const ExperimentConfig& cfg, const io::Problem& prob) {
  const Divergence pair = pick_pair(cfg, prob);
  const json& p = cfg.params;
  if (p.contains("sample") || (prob.sample && !p.contains("distribution"))) {
    const ZSample s = p.contains("sample") ? io::parse_sample(p.at("sample")) : prob.need_sample();
    if (s.d != 1) throw ConfigError("oce: the sample must be univariate");
    const RiskValue r = oce_empirical(EmpiricalSample(s.data), pair);
    json out = risk_json(r);
    out["n"] = s.size();
    out["law"] = "empirical";
    return out;
  }
  const ZDistribution dist =
      p.contains("distribution") ? io::parse_distribution(p.at("distribution")) : prob.need_distribution();
  if (dist.dim() != 1) throw ConfigError("oce: the distribution must be univariate");
  const RiskValue r = oce_analytic(dist.marginals.front(), pair, pcount(p, "quad_nodes", 4096));
  json out = risk_json(r);
  out["law"] = "analytic";
  return out;
}

json run_solve(const ExperimentConfig& cfg, const io::Problem& prob) {
  const SaaProblem sp{prob.need_goal(), prob.need_box(), pick_pair(cfg, prob), prob.need_sample()};
  const SaaResult r = solve_saa(sp, pick_grid(cfg, prob));
  return {{"value", r.value},
          {"theta_star", r.theta_star},
          {"x_star", r.x_star},
          {"x_interval_used", {r.x_interval_used.x_l, r.x_interval_used.x_u}},
          {"coarse_points", r.coarse_points},
          {"refinement_rounds", r.refinement_rounds},
          {"objective_evals", r.objective_evals},
          {"n", sp.z.size()}};
}

TrueValue truth_for(const ExperimentConfig& cfg, const io::Problem& prob, const Divergence& pair) {
  return true_value(prob.need_goal(), prob.need_box(), pair, prob.need_distribution(),
                    pcount(cfg.params, "quad_nodes", 4096), pick_grid(cfg, prob));
}

json run_true_value(const ExperimentConfig& cfg, const io::Problem& prob) {
  return truth_json(truth_for(cfg, prob, pick_pair(cfg, prob)));
}

json run_clt_cmd(const ExperimentConfig& cfg, const io::Problem& prob) {
  const std::uint64_t seed = need_seed(cfg);
  const Divergence pair = pick_pair(cfg, prob);
  const TrueValue truth = truth_for(cfg, prob, pair);
  const ProblemTemplate pt{prob.need_goal(), prob.need_box(), pair, pick_grid(cfg, prob)};
  CltOptions opt;
  opt.estimated_variance = pflag(cfg.params, "estimated_variance");
  const CltReport r = run_clt(pt, prob.need_distribution(), pcount(cfg.params, "n", std::nullopt),
                              pcount(cfg.params, "R", std::nullopt), seed, truth, opt);
  std::vector<double> idx(r.errors.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<double>(i + 1);
  io::write_csv(cfg.out_dir / "errors.csv", {"replication", "error"}, {idx, r.errors});
  return {{"n", r.n},
          {"R", r.R},
          {"truth", truth_json(truth)},
          {"sigma2_theory", r.sigma2_theory},
          {"sigma2_uncentered", r.sigma2_uncentered},
          {"ks_stat", r.ks_stat},
          {"ks_uncentered", r.ks_uncentered},
          {"estimated_variance", r.estimated_variance},
          {"degenerate", r.degenerate},
          {"mean_err", r.mean_err},
          {"var_err", r.var_err},
          {"var_ratio", r.var_ratio},
          {"var_ratio_uncentered", r.var_ratio_uncentered},
          {"errors", r.errors}};
}

json run_deviation_cmd(const ExperimentConfig& cfg, const io::Problem& prob) {
  const std::uint64_t seed = need_seed(cfg);
  const Divergence pair = pick_pair(cfg, prob);
  const TrueValue truth = truth_for(cfg, prob, pair);
  const ProblemTemplate pt{prob.need_goal(), prob.need_box(), pair, pick_grid(cfg, prob)};
  std::optional<BoundConstants> constants;
  if (cfg.params.contains("constants")) constants = parse_constants(cfg.params.at("constants"), pair);
  const DeviationReport r = run_deviation(pt, prob.need_distribution(), pnum(cfg.params, "eps"),
                                          pcounts(cfg.params, "n_grid"), pcount(cfg.params, "R", std::nullopt), seed,
                                          truth.v_star, constants);

  json rows = json::array();
  std::vector<double> cn, ck, cp, clo, chi, crad, cb, cbm;
  std::vector<double> en, er, ee;
  for (std::size_t i = 0; i < r.n_grid.size(); ++i) {
    const auto& w = r.p_hat[i];
    json row = {{"n", r.n_grid[i]}, {"exceedances", r.exceedances[i]}, {"p_hat", w.p_hat},
                {"lo", w.lo},       {"hi", w.hi},                      {"radius", w.radius}};
    if (constants) {
      row["bound"] = r.bound_curve[i];
      row["bound_minimal_D"] = r.bound_curve_minimal_D[i];
    }
    rows.push_back(row);
    cn.push_back(static_cast<double>(r.n_grid[i]));
    ck.push_back(static_cast<double>(r.exceedances[i]));
    cp.push_back(w.p_hat);
    clo.push_back(w.lo);
    chi.push_back(w.hi);
    crad.push_back(w.radius);
    cb.push_back(constants ? r.bound_curve[i] : std::numeric_limits<double>::quiet_NaN());
    cbm.push_back(constants ? r.bound_curve_minimal_D[i] : std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k < r.errors[i].size(); ++k) {
      en.push_back(static_cast<double>(r.n_grid[i]));
      er.push_back(static_cast<double>(k + 1));
      ee.push_back(r.errors[i][k]);
    }
  }
  io::write_csv(cfg.out_dir / "deviation.csv", {"n", "exceedances", "p_hat", "lo", "hi", "radius", "bound", "bound_minimal_D"},
                {cn, ck, cp, clo, chi, crad, cb, cbm});
  io::write_csv(cfg.out_dir / "errors.csv", {"n", "replication", "error"}, {en, er, ee});

  json out = {{"epsilon", r.epsilon},
              {"R", r.R},
              {"truth", truth_json(truth)},
              {"v_star", r.v_star},
              {"rows", rows},
              {"fitted_slope", r.fitted_slope},
              {"slope_status", std::isinf(r.fitted_slope) ? "no_exceedances"
                                                          : (std::isnan(r.fitted_slope) ? "undetermined" : "fitted")},
              {"nonincreasing_within_noise", r.nonincreasing_within_noise}};
  if (constants) {
    out["constants"] = constants_json(*constants);
    out["minimal_D"] = r.minimal_D;
    out["dominance"] = r.dominance;
    out["dominance_minimal_D"] = r.dominance_minimal_D;
  }
  return out;
}

json run_bounds(const ExperimentConfig& cfg, const io::Problem& prob) {
  const json& p = cfg.params;
  std::optional<Divergence> pair;
  if (p.contains("divergence") || prob.pair) pair = pick_pair(cfg, prob);
  if (!p.contains("kind") || !p.at("kind").is_string()) throw ConfigError("bounds: params.kind must be a string");
  const std::string kind = p.at("kind").get<std::string>();
  auto need_pair = [&]() -> const Divergence& {
    if (!pair) throw ConfigError(fmt::format("bounds '{}' needs a divergence", kind));
    return *pair;
  };
  if (kind == "bounded" || kind == "envelope") {
    const BoundConstants c = parse_constants(p, pair);
    const double eps = pnum(p, "eps");
    std::optional<VarianceTerms> vt;
    if (p.contains("var_terms")) {
      const auto v = pnums(p, "var_terms");
      if (v.size() != 3) throw ConfigError("bounds: var_terms needs three numbers");
      vt = VarianceTerms{v[0], v[1], v[2]};
    }
    json rows = json::array();
    for (std::size_t n : pcounts(p, "n")) {
      const double b = kind == "bounded" ? tail_bound_bounded(n, eps, c) : tail_bound_envelope(n, eps, c, vt);
      rows.push_back({{"n", n}, {"bound", b}});
    }
    return {{"kind", kind}, {"eps", eps}, {"constants", constants_json(c)}, {"bounds", rows}};
  }
  if (kind == "xbar") {
    return {{"kind", kind}, {"x_bar", xbar_constant(need_pair(), pnum(p, "e_xi"), pnum(p, "e_phistar_xi"))}};
  }
  if (kind == "eta") {
    const Divergence& d = need_pair();
    const double L = pnum(p, "L");
    return {{"kind", kind}, {"L", L}, {"x_bar", xbar_constant(d, L, d.conj(L))}, {"eta", eta_bounded(d, L)}};
  }
  if (kind == "localization") {
    const LocalizationBounds b = population_x_bounds(need_pair(), pnum(p, "e_xi1"), pnum(p, "e_xi2"));
    return {{"kind", kind}, {"x_l", b.x_l}, {"x_u", b.x_u}};
  }
  if (kind == "bracketing") {
    const BracketingConstant bc = bracketing_constant(pnum(p, "ck_l2_norm"), prob.need_box(),
                                                      static_cast<int>(pcount(p, "k", 1)), pnum_or(p, "beta", 1.0));
    json rows = json::array();
    for (double e : pnums(p, "eps")) rows.push_back({{"eps", e}, {"bound", bc.bound(e)}});
    return {{"kind", kind}, {"K_k", bc.K_k}, {"delta", bc.delta}, {"bounds", rows}};
  }
  throw ConfigError(fmt::format("bounds: unknown kind '{}'", kind));
}

json run_bracket_check(const ExperimentConfig& cfg, const io::Problem& prob) {
  const auto* holder = std::get_if<HolderGoal>(&prob.need_goal().kind());
  if (!holder) throw ConfigError("bracket-check needs a holder goal");
  const Divergence pair = pick_pair(cfg, prob);
  const ZQuadrature q = tensor_quadrature(prob.need_distribution(), pcount(cfg.params, "nodes", 256));
  const int k = static_cast<int>(pcount(cfg.params, "k", 1));
  json rows = json::array();
  for (double eps : pnums(cfg.params, "eps")) {
    const BracketReport r = construct_brackets(*holder, prob.need_box(), pair, k, eps, q.z, q.weights,
                                               pcount(cfg.params, "check_cells", 2000));
    rows.push_back({{"eps", r.eps},
                    {"ck_l2_norm", r.ck_l2_norm},
                    {"spacing", r.spacing},
                    {"half_diagonal", r.half_diagonal},
                    {"count", r.count},
                    {"bound", r.bound},
                    {"max_width", r.max_width},
                    {"cells_checked", r.cells_checked},
                    {"containment_violations", r.containment_violations},
                    {"within_bound", r.within_bound}});
  }
  const BracketingConstant bc =
      bracketing_constant(rows.empty() ? 0.0 : rows.front().at("ck_l2_norm").get<double>(), prob.need_box(), k, holder->beta);
  return {{"k", k}, {"K_k", bc.K_k}, {"brackets", rows}};
}

}  // namespace

ExperimentConfig parse_experiment(const json& j, const std::filesystem::path& base) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  ExperimentConfig cfg;
  if (j.contains("command")) {
    if (!j.at("command").is_string()) throw ConfigError("config: 'command' must be a string");
    cfg.command = j.at("command").get<std::string>();
  }
  if (j.contains("problem")) {
    const json& p = j.at("problem");
    if (p.is_string()) {
      const std::filesystem::path path = base / p.get<std::string>();
      cfg.problem = io::resolve_problem(io::load_json_file(path), path.parent_path());
    } else {
      cfg.problem = io::resolve_problem(p, base);
    }
  }
  if (j.contains("params")) {
    if (!j.at("params").is_object()) throw ConfigError("config: 'params' must be an object");
    cfg.params = j.at("params");
  }
  if (j.contains("master_seed") && !j.at("master_seed").is_null()) {
    const json& s = j.at("master_seed");
    if (!s.is_number_unsigned()) throw ConfigError("config: 'master_seed' must be an unsigned 64-bit integer");
    cfg.master_seed = s.get<std::uint64_t>();
  }
  if (j.contains("out_dir")) {
    if (!j.at("out_dir").is_string()) throw ConfigError("config: 'out_dir' must be a string");
    cfg.out_dir = base / j.at("out_dir").get<std::string>();
  }
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  return parse_experiment(io::load_json_file(path), path.parent_path());
}

json resolved_config(const ExperimentConfig& cfg) {
  json j = {{"command", cfg.command}, {"problem", cfg.problem}, {"params", cfg.params}};
  j["master_seed"] = cfg.master_seed ? json(*cfg.master_seed) : json(nullptr);
  return j;
}

json execute(const ExperimentConfig& cfg) {
  if (cfg.out_dir.empty()) throw ConfigError("no output directory (use --out or out_dir)");
  const io::Problem prob = io::parse_problem(cfg.problem);
  std::filesystem::create_directories(cfg.out_dir);

  json payload;
  const std::string& c = cfg.command;
  if (c == "oce") {
    payload = run_oce(cfg, prob);
  } else if (c == "solve") {
    payload = run_solve(cfg, prob);
  } else if (c == "true-value") {
    payload = run_true_value(cfg, prob);
  } else if (c == "clt") {
    payload = run_clt_cmd(cfg, prob);
  } else if (c == "deviation") {
    payload = run_deviation_cmd(cfg, prob);
  } else if (c == "bounds") {
    payload = run_bounds(cfg, prob);
  } else if (c == "bracket-check") {
    payload = run_bracket_check(cfg, prob);
  } else {
    throw ConfigError(fmt::format("unknown command '{}'", c));
  }

  const json config = resolved_config(cfg);
  json report = {{"tool", "rsaa"},
                 {"version", kVersion},
                 {"rng", kRngVersion},
                 {"kernels", kernels::active_kernels().name},
                 {"command", c},
                 {"config", config},
                 {"config_hash", io::fnv1a_hex(config.dump())},
                 {"seeds", {{"master_seed", config.at("master_seed")}, {"replication_seed", "derive_seed(master_seed, r)"}}},
                 {"payload", payload}};
  std::ofstream out(cfg.out_dir / "report.json");
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", (cfg.out_dir / "report.json").string()));
  out << report.dump(2) << '\n';
  return report;
}

int exit_code_for(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError&) {
    return 2;
  } catch (const InvalidParameter&) {
    return 2;
  } catch (const json::exception&) {
    return 2;
  } catch (const Refusal&) {
    return 4;
  } catch (const NumericalError&) {
    return 3;
  } catch (const Error&) {
    return 3;
  } catch (...) {
    return 1;
  }
}

namespace {

std::string error_kind(int code) {
  switch (code) {
    case 2:
      return "config";
    case 3:
      return "numerical";
    case 4:
      return "refusal";
    default:
      return "internal";
  }
}

void report_error(int code, const std::string& message) {
  std::cerr << json{{"error", error_kind(code)}, {"exit", code}, {"message", message}}.dump() << std::endl;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Risk-averse SAA solver and asymptotics harness", "rsaa"};
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string out;
  app.add_option("command", command, "oce | solve | true-value | clt | deviation | bounds | bracket-check");
  app.add_option("--config", config_path, "experiment config (JSON)")->required();
  app.add_option("--seed", seed, "master seed (unsigned 64-bit)");
  app.add_option("--threads", threads, "concurrency cap")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "output directory");
  app.set_version_flag("--version", std::string(kVersion));
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error(2, e.what());
    return 2;
  }

  try {
    if (!threads) {
      if (const char* env = std::getenv("RISK_SAA_THREADS"); env && *env) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (*end != '\0' || v == 0) throw ConfigError(fmt::format("RISK_SAA_THREADS='{}' is not a positive integer", env));
        threads = static_cast<std::size_t>(v);
      }
    }
    std::optional<tbb::global_control> cap;
    if (threads) cap.emplace(tbb::global_control::max_allowed_parallelism, *threads);

    ExperimentConfig cfg = load_experiment(config_path);
    if (!command.empty()) {
      if (!cfg.command.empty() && cfg.command != command) {
        throw ConfigError(fmt::format("command '{}' conflicts with config command '{}'", command, cfg.command));
      }
      cfg.command = command;
    }
    if (cfg.command.empty()) throw ConfigError("no command given");
    if (seed) cfg.master_seed = seed;
    if (!out.empty()) cfg.out_dir = out;
    const json report = execute(cfg);
    std::cout << (cfg.out_dir / "report.json").string() << '\n';
    return 0;
  } catch (...) {
    const std::exception_ptr e = std::current_exception();
    const int code = exit_code_for(e);
    std::string message = "unknown error";
    try {
      std::rethrow_exception(e);
    } catch (const std::exception& ex) {
      message = ex.what();
    } catch (...) {
    }
    report_error(code, message);
    return code;
  }
}

}  // namespace rsaa::cli
