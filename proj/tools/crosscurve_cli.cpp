// Command-line driver over the crosscurve C API: builds JSON requests from
// flags, dispatches them, and writes deterministic JSON/CSV outputs.
//
// Exit codes: 0 success, 1 check failure, 2 usage, 3 IO.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "crosscurve.h"

namespace {

using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct OutputOptions {
  std::string out_path;
  bool overwrite = false;
};

int write_file(const std::string& path, const std::string& data, bool overwrite) {
  if (!overwrite && std::filesystem::exists(path)) {
    std::cerr << "refusing to overwrite " << path << " (pass --overwrite)\n";
    return kExitIo;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "cannot open " << path << " for writing\n";
    return kExitIo;
  }
  out << data;
  return out ? kExitPass : kExitIo;
}

int dispatch(const json& request, const OutputOptions& opts, bool expect_fail = false) {
  cc_report* report = nullptr;
  cc_status status = cc_run(request.dump().c_str(), &report);
  if (status == CC_USAGE_ERROR) {
    std::cerr << "usage error: " << cc_last_error() << "\n";
    return kExitUsage;
  }
  if (!report) {
    std::cerr << "error: " << cc_last_error() << "\n";
    return expect_fail ? kExitPass : kExitCheckFailed;
  }

  std::string body = cc_report_json(report);
  int rc = kExitPass;
  if (!opts.out_path.empty()) {
    rc = write_file(opts.out_path, body + "\n", opts.overwrite);
    std::filesystem::path base(opts.out_path);
    for (int i = 0; rc == kExitPass && i < cc_report_artifact_count(report); ++i) {
      std::filesystem::path side = base.parent_path() / cc_report_artifact_name(report, i);
      rc = write_file(side.string(), cc_report_artifact_data(report, i), opts.overwrite);
    }
  } else {
    std::cout << body << "\n";
    for (int i = 0; i < cc_report_artifact_count(report); ++i)
      std::cerr << "artifact available: " << cc_report_artifact_name(report, i)
                << " (pass --out to write it)\n";
  }
  bool passed = cc_report_passed(report) != 0;
  cc_report_free(report);
  if (rc != kExitPass) return rc;
  if (expect_fail) return passed ? kExitCheckFailed : kExitPass;
  return passed ? kExitPass : kExitCheckFailed;
}

json family_from_flags(const std::string& family, int dim, int n, double eps, double g,
                       const std::string& potential, const std::string& mode) {
  json f{{"family", family}};
  if (family == "sphere" || family == "hellinger" || family == "fisher_rao" || family == "kl" ||
      family == "bw" || family == "monge_finite") {
    f["n"] = n;
  } else {
    f["dim"] = dim;
  }
  if (family == "soft_threshold") f["eps"] = eps;
  if (family == "semi_geostrophic") f["g"] = g;
  if (family == "bregman") {
    f["potential"] = potential;
    f["mode"] = mode;
  }
  return f;
}

json load_config(const std::string& path, int& exit_code) {
  exit_code = kExitPass;
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot read config " << path << "\n";
    exit_code = kExitIo;
    return json::object();
  }
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    std::cerr << "malformed JSON config " << path << "\n";
    exit_code = kExitUsage;
    return json::object();
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crosscurve: numerical laboratory for nonnegative cross-curvature"};
  app.require_subcommand(1);

  // shared flags
  std::string config_path, out_path;
  bool overwrite = false;
  app.add_option("--config", config_path, "JSON config merged under the flags");
  app.add_option("--out", out_path, "write the JSON report here (CSV artifacts alongside)");
  app.add_flag("--overwrite", overwrite, "allow clobbering existing outputs");

  // verify
  auto* verify = app.add_subcommand("verify", "run a chord-type check over random trials");
  std::string v_check = "nncc", v_family = "hilbert", v_potential = "entropy", v_mode = "forward";
  int v_dim = 2, v_n = 3, v_trials = 100, v_ycount = 48;
  double v_eps = 0.5, v_g = 9.81, v_tol = 1e-9;
  std::uint64_t v_seed = 0;
  bool v_expect_fail = false;
  verify->add_option("--check", v_check, "nncc|lmp|conv|one_convex|pc");
  verify->add_option("--family", v_family, "registered cost family");
  verify->add_option("--dim", v_dim, "ambient dimension");
  verify->add_option("--n", v_n, "size parameter (sphere/simplex/matrix families)");
  verify->add_option("--trials", v_trials, "random triples");
  verify->add_option("--seed", v_seed, "RNG seed")->required();
  verify->add_option("--tol", v_tol, "violation tolerance");
  verify->add_option("--y-count", v_ycount, "sampled y per sweep");
  verify->add_option("--eps", v_eps, "soft-threshold knee");
  verify->add_option("--g", v_g, "semi-geostrophic constant");
  verify->add_option("--potential", v_potential, "bregman potential");
  verify->add_option("--mode", v_mode, "bregman mode forward|reverse");
  verify->add_flag("--expect-fail", v_expect_fail, "exit 0 only when the check fails");

  // counterexample
  auto* cex = app.add_subcommand("counterexample",
                                 "two-atom lift of the log cost violating the max principle");
  int c_ns = 101, c_nt = 11;
  cex->add_option("--n-s", c_ns, "s-grid size (rows per CSV)");
  cex->add_option("--n-t", c_nt, "t-grid size over glue combinations");

  // mtw
  auto* mtw = app.add_subcommand("mtw", "finite-difference cross-curvature scan");
  std::string m_cost = "sphere";
  int m_samples = 500;
  std::uint64_t m_seed = 0;
  mtw->add_option("--cost", m_cost, "sphere|log_distance|hilbert|quartic_norm");
  mtw->add_option("--samples", m_samples, "sample pairs");
  mtw->add_option("--seed", m_seed, "RNG seed")->required();

  // lift
  auto* lift = app.add_subcommand("lift", "Wasserstein chord check over a lifted segment");
  std::string l_base = "hilbert";
  int l_atoms = 5, l_sigmas = 50, l_snodes = 33;
  double l_tol = -1.0;
  std::uint64_t l_seed = 0;
  lift->add_option("--base", l_base, "hilbert|sphere|monge");
  lift->add_option("--atoms", l_atoms, "support size of the endpoint measures");
  lift->add_option("--sigmas", l_sigmas, "random comparison measures");
  lift->add_option("--s-nodes", l_snodes, "s-grid size");
  lift->add_option("--tol", l_tol, "chord tolerance (default per base)");
  lift->add_option("--seed", l_seed, "RNG seed")->required();
  bool l_search_glues = false;
  lift->add_flag("--search-glues", l_search_glues,
                 "retry failing checks over alternative glues of the optimal plans");

  // gw
  auto* gw = app.add_subcommand("gw", "Gromov-Wasserstein solve or segment check");
  std::string g_mode = "segment-check", g_x_path, g_y_path;
  int g_samples = 50;
  std::uint64_t g_seed = 0;
  gw->add_option("--mode", g_mode, "solve|segment-check");
  gw->add_option("--x", g_x_path, "gauged space JSON file (solve mode)");
  gw->add_option("--y", g_y_path, "gauged space JSON file (solve mode)");
  gw->add_option("--samples", g_samples, "test spaces (segment-check)");
  int g_snodes = 33;
  gw->add_option("--s-nodes", g_snodes, "s-grid size (segment-check)");
  gw->add_option("--seed", g_seed, "RNG seed");

  // gh
  auto* gh = app.add_subcommand("gh", "brute-force Gromov-Hausdorff distance");
  std::string h_x_path, h_y_path;
  gh->add_option("--x", h_x_path, "finite metric JSON file {\"dist\":[[...]]}")->required();
  gh->add_option("--y", h_y_path, "finite metric JSON file")->required();

  // cone
  auto* cone = app.add_subcommand("cone", "cone-cost closed form and embedding check");
  int k_samples = 1000, k_triples = 40;
  std::uint64_t k_seed = 0;
  cone->add_option("--samples", k_samples, "random (d,r,s) draws");
  cone->add_option("--triples", k_triples, "cone triples for the chord check");
  cone->add_option("--seed", k_seed, "RNG seed")->required();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  int cfg_rc = kExitPass;
  json config = load_config(config_path, cfg_rc);
  if (cfg_rc != kExitPass) return cfg_rc;

  OutputOptions opts{out_path, overwrite};
  json req;
  bool expect_fail = false;

  if (verify->parsed()) {
    req = json{{"cmd", "verify"},
               {"check", v_check},
               {"family", family_from_flags(v_family, v_dim, v_n, v_eps, v_g, v_potential, v_mode)},
               {"trials", v_trials},
               {"seed", v_seed},
               {"tol", v_tol},
               {"y_count", v_ycount}};
    expect_fail = v_expect_fail;
  } else if (cex->parsed()) {
    req = json{{"cmd", "counterexample"}, {"n_s", c_ns}, {"n_t", c_nt}};
  } else if (mtw->parsed()) {
    req = json{{"cmd", "mtw"}, {"cost", m_cost}, {"samples", m_samples}, {"seed", m_seed}};
  } else if (lift->parsed()) {
    req = json{{"cmd", "lift"}, {"base", l_base},   {"atoms", l_atoms},
               {"sigmas", l_sigmas}, {"seed", l_seed}, {"s_nodes", l_snodes}};
    if (l_tol > 0) req["tol"] = l_tol;
    if (l_search_glues) req["search_glues"] = true;
  } else if (gw->parsed()) {
    if (g_mode == "segment-check" && gw->count("--seed") == 0) {
      std::cerr << "gw --mode segment-check is randomized: --seed is required\n";
      return kExitUsage;
    }
    req = json{{"cmd", "gw"}, {"mode", g_mode}, {"seed", g_seed}, {"samples", g_samples},
               {"s_nodes", g_snodes}};
    if (g_mode == "solve") {
      int rc = kExitPass;
      json jx = load_config(g_x_path, rc);
      if (rc != kExitPass) return rc;
      json jy = load_config(g_y_path, rc);
      if (rc != kExitPass) return rc;
      req["x"] = jx;
      req["y"] = jy;
    }
  } else if (gh->parsed()) {
    int rc = kExitPass;
    json jx = load_config(h_x_path, rc);
    if (rc != kExitPass) return rc;
    json jy = load_config(h_y_path, rc);
    if (rc != kExitPass) return rc;
    req = json{{"cmd", "gh"}, {"x", jx}, {"y", jy}};
  } else if (cone->parsed()) {
    req = json{{"cmd", "cone"}, {"samples", k_samples}, {"triples", k_triples}, {"seed", k_seed}};
  }

  // config file entries override flag defaults
  for (auto& [key, value] : config.items()) req[key] = value;

  return dispatch(req, opts, expect_fail);
}
