#include "ggn/acceptance.hpp"
#include "ggn/cases.hpp"
#include "ggn/config.hpp"
#include "ggn/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace {

struct CliOverrides {
  std::string case_name;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int iters = -1;
  double lr = -1.0;
  double lambda = -1.0;
  double loss_tol = -1.0;
  int log_every = 100;
};

void add_common_flags(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--case", o.case_name, "benchmark case name (see list-cases)");
  cmd->add_option("--config", o.config_path, "JSON run configuration")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_dir, "output directory (default runs/<case>-<mode>)");
  cmd->add_option("--seed", o.seed, "network initialization seed");
  cmd->add_option("--iters", o.iters, "training iteration budget");
  cmd->add_option("--lr", o.lr, "Adam learning rate");
  cmd->add_option("--loss-tol", o.loss_tol, "early-stop loss threshold");
  cmd->add_option("--log-every", o.log_every, "progress print period, 0 silences");
}

int run_training(const CliOverrides& o, const std::string& mode) {
  ggn::RunConfig cfg;
  if (!o.config_path.empty()) cfg = ggn::load_config(o.config_path);
  if (!o.case_name.empty()) cfg.case_name = o.case_name;
  if (cfg.case_name.empty()) throw std::invalid_argument("no case given (--case or config)");
  cfg.mode = mode;

  auto problem = ggn::make_case(cfg.case_name, ggn::run_mode_from_string(mode));
  ggn::apply_config(cfg, problem->train);
  if (o.seed != 0) problem->train.seed = o.seed;
  if (o.iters > 0) problem->train.max_iters = o.iters;
  if (o.lr > 0) problem->train.adam.lr = o.lr;
  if (o.lambda > 0) problem->train.penalty_lambda = o.lambda;
  if (o.loss_tol > 0) problem->train.loss_tol = o.loss_tol;
  problem->train.log_every = o.log_every;
  if (o.log_every > 0)
    problem->train.on_log = [](int it, double loss) {
      std::printf("iter %6d  loss %.6e\n", it, loss);
      std::fflush(stdout);
    };

  ggn::Trainer trainer(*problem->assembler, problem->train, problem->soft_obs);
  ggn::TrainReport rep = trainer.run();

  std::string out = !o.out_dir.empty() ? o.out_dir
                    : !cfg.out_dir.empty()
                        ? cfg.out_dir
                        : "runs/" + cfg.case_name + "-" + mode;
  const ggn::RunSummary summary = ggn::summarize(*problem, rep);
  ggn::write_report(out, *problem, rep, summary, ggn::config_snapshot(cfg, problem->train));

  std::printf("case %s (%s): %d iters, best loss %.3e at iter %d\n", cfg.case_name.c_str(),
              mode.c_str(), rep.iters_run, rep.best_loss, rep.best_iter);
  std::printf("  field error %.4e\n", summary.field_error);
  for (const auto& [k, v] : summary.extras) std::printf("  %s = %.6g\n", k.c_str(), v);
  std::printf("  report written to %s\n", out.c_str());
  if (rep.diverged) {
    std::fprintf(stderr, "training diverged, kept the best earlier iterate\n");
    return 2;
  }
  return 0;
}

int run_oracle(const CliOverrides& o) {
  if (o.case_name.empty()) throw std::invalid_argument("oracle needs --case");
  auto problem = ggn::make_case(o.case_name, ggn::RunMode::Forward);
  const ggn::Vec r = problem->assembler->condensed_plain(problem->reference_state);
  std::printf("case %s: reference %s, residual norm %.3e\n", o.case_name.c_str(),
              problem->has_analytic ? "analytic" : "Newton", r.norm());

  const std::string out = o.out_dir.empty() ? "runs/" + o.case_name + "-oracle" : o.out_dir;
  ggn::TrainReport rep;
  rep.best_state = problem->reference_state;
  rep.best_loss = r.norm();
  ggn::RunSummary summary = ggn::summarize(*problem, rep);
  ggn::write_report(out, *problem, rep, summary, "{}\n");
  std::printf("  report written to %s\n", out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-informed graph Galerkin networks: weak-form PDE solving on meshes"};
  app.require_subcommand(1);

  CliOverrides o;
  std::string assimilation = "hard";

  CLI::App* list = app.add_subcommand("list-cases", "list the built-in benchmark cases");
  CLI::App* fwd = app.add_subcommand("forward", "train a forward solution");
  add_common_flags(fwd, o);
  CLI::App* inv = app.add_subcommand("inverse", "train an inverse solution");
  add_common_flags(inv, o);
  inv->add_option("--assimilation,--mode", assimilation, "soft | hard (default hard)")
      ->check(CLI::IsMember({"soft", "hard"}));
  inv->add_option("--lambda", o.lambda, "penalty weight for soft assimilation");
  CLI::App* orc = app.add_subcommand("oracle", "run the classical FEM reference solve");
  orc->add_option("--case", o.case_name, "benchmark case name")->required();
  orc->add_option("--out", o.out_dir, "output directory");
  int criterion = 0;
  CLI::App* ver = app.add_subcommand("verify", "run the acceptance criteria (slow)");
  ver->add_option("--criterion", criterion, "single criterion 1..11 (default: all)")
      ->check(CLI::Range(1, ggn::criterion_count()));

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      std::printf("%-22s %9s  %s\n", "case", "target e", "description");
      for (const auto& c : ggn::case_list())
        std::printf("%-22s %9.1e  %s%s\n", c.name.c_str(), c.paper_e, c.summary.c_str(),
                    c.inverse ? " [inverse]" : "");
      return 0;
    }
    if (fwd->parsed()) return run_training(o, "forward");
    if (inv->parsed()) return run_training(o, "inverse-" + assimilation);
    if (orc->parsed()) return run_oracle(o);
    if (ver->parsed()) {
      bool all_passed = true;
      const auto log = [](const std::string& line) {
        std::printf("%s\n", line.c_str());
        std::fflush(stdout);
      };
      for (int id = 1; id <= ggn::criterion_count(); ++id) {
        if (criterion != 0 && id != criterion) continue;
        const ggn::CriterionResult r = ggn::run_criterion(id, log);
        std::printf("[%s] criterion %2d %-22s %s\n", r.passed ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.detail.c_str());
        all_passed = all_passed && r.passed;
      }
      return all_passed ? 0 : 3;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
