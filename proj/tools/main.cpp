// Command line driver: verification suites, fit/realize experiments,
// optimal transport computations and probes, with JSON reports.
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 usage error.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "ictx/harness.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  double tol = 0.0;
  bool tol_set = false;
};

void attach_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "flat key=value config file");
  cmd->add_option("--seed", opts.seed, "seed for randomized suites")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--out", opts.out_dir, "output directory for report.json");
  cmd->add_option("--tol", opts.tol, "default tolerance override")
      ->each([&opts](const std::string&) { opts.tol_set = true; });
}

int execute(ictx::Mode mode, const CommonOpts& opts,
            const std::map<std::string, std::string>& extra) {
  ictx::ExperimentConfig config;
  config.mode = mode;
  if (!opts.config_path.empty()) ictx::load_config_file(opts.config_path, config);
  config.mode = mode;  // the subcommand wins over the file
  if (opts.seed_set) {
    config.seed = opts.seed;
    config.has_seed = true;
  }
  if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
  if (opts.tol_set) config.values["tol.default"] = std::to_string(opts.tol);
  for (const auto& [k, v] : extra) config.values[k] = v;

  const ictx::Report report = ictx::run(config);
  for (const std::string& line : report.lines) std::cout << line << "\n";
  for (const ictx::CheckResult& c : report.checks)
    std::printf("[%s] %-42s residual %.6g  threshold %.6g\n",
                c.pass ? "PASS" : "FAIL", c.name.c_str(), c.residual, c.threshold);
  if (!config.out_dir.empty())
    std::cout << "report written to " << config.out_dir << "/report.json\n";
  return report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"in-context measure transformer toolkit"};
  app.require_subcommand(1);

  CommonOpts verify_opts, fit_opts, realize_opts, ot_opts, probe_opts, eval_opts;

  CLI::App* verify = app.add_subcommand("verify", "run the verification suite");
  attach_common(verify, verify_opts);

  CLI::App* fit = app.add_subcommand("fit", "fit an in-context target map");
  attach_common(fit, fit_opts);
  std::string fit_target;
  fit->add_option("--target", fit_target,
                  "identity | mean_shift | softmax_mean | causal_mean");

  CLI::App* realize = app.add_subcommand("realize", "realize an algebra file");
  attach_common(realize, realize_opts);
  std::string algebra_path;
  realize->add_option("algebra", algebra_path, "serialized algebra element");

  CLI::App* ot = app.add_subcommand("ot", "Wasserstein distance between measures");
  attach_common(ot, ot_opts);
  std::string mu_path, nu_path;
  ot->add_option("mu", mu_path, "first measure file");
  ot->add_option("nu", nu_path, "second measure file");

  CLI::App* probe = app.add_subcommand("probe", "masked-measure probes");
  attach_common(probe, probe_opts);

  CLI::App* eval = app.add_subcommand("eval", "evaluate a serialized stack");
  attach_common(eval, eval_opts);
  std::string stack_path, measure_path, query, time_str;
  eval->add_option("stack", stack_path, "serialized layer stack");
  eval->add_option("measure", measure_path, "serialized context measure");
  eval->add_option("--query", query, "comma-separated query vector");
  eval->add_option("--time", time_str, "query time for masked stacks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) return execute(ictx::Mode::verify, verify_opts, {});
    if (fit->parsed()) {
      std::map<std::string, std::string> extra;
      if (!fit_target.empty()) extra["fit.target"] = fit_target;
      return execute(ictx::Mode::fit, fit_opts, extra);
    }
    if (realize->parsed()) {
      std::map<std::string, std::string> extra;
      if (!algebra_path.empty()) extra["realize.algebra"] = algebra_path;
      return execute(ictx::Mode::realize, realize_opts, extra);
    }
    if (ot->parsed()) {
      std::map<std::string, std::string> extra;
      if (!mu_path.empty()) extra["ot.mu"] = mu_path;
      if (!nu_path.empty()) extra["ot.nu"] = nu_path;
      return execute(ictx::Mode::ot, ot_opts, extra);
    }
    if (probe->parsed()) return execute(ictx::Mode::probe, probe_opts, {});
    if (eval->parsed()) {
      std::map<std::string, std::string> extra;
      if (!stack_path.empty()) extra["eval.stack"] = stack_path;
      if (!measure_path.empty()) extra["eval.measure"] = measure_path;
      if (!query.empty()) extra["eval.query"] = query;
      if (!time_str.empty()) extra["eval.time"] = time_str;
      return execute(ictx::Mode::eval, eval_opts, extra);
    }
  } catch (const ictx::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
