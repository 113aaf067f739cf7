#include "ggn/report.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace ggn {

using nlohmann::json;

RunSummary summarize(const CaseProblem& problem, const TrainReport& rep) {
  RunSummary s;
  const DofMap& dm = problem.dofmap;
  s.field_error = relative_error(rep.best_state, problem.reference_state);
  for (int c = 0; c < (int)dm.components.size(); ++c) {
    const int n = problem.spaces[dm.components[c].space].node_count();
    const Vec pred = rep.best_state.segment(dm.offset[c], n);
    const Vec ref = problem.reference_state.segment(dm.offset[c], n);
    s.extras["error." + dm.components[c].name] = (pred - ref).norm() / ref.norm();
  }
  const auto& mu = problem.model->mu();
  for (int i = 0; i < (int)mu.size(); ++i) {
    if (!mu[i].trainable || rep.mu.size() <= i) continue;
    s.extras["mu." + mu[i].name] = rep.mu[i];
    s.extras["mu." + mu[i].name + ".error"] =
        std::abs(rep.mu[i] - problem.true_mu[i]) / std::abs(problem.true_mu[i]);
  }
  if (rep.trainable_bc.size() > 0 && problem.true_bc.size() == rep.trainable_bc.size())
    s.extras["bc.error"] = relative_error(rep.trainable_bc, problem.true_bc);
  return s;
}

void write_report(const std::string& dir, const CaseProblem& problem, const TrainReport& rep,
                  const RunSummary& summary, const std::string& config_snapshot) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  const DofMap& dm = problem.dofmap;
  for (int c = 0; c < (int)dm.components.size(); ++c) {
    const FeSpace& sp = problem.spaces[dm.components[c].space];
    std::ofstream out(dir + "/" + dm.components[c].name + ".csv");
    if (!out) throw std::runtime_error("report: cannot write to " + dir);
    out.precision(17);
    out << "node,x,y" << (problem.mesh.dim == 3 ? ",z" : "") << ",value,reference\n";
    for (int n = 0; n < sp.node_count(); ++n) {
      out << n;
      for (int d = 0; d < problem.mesh.dim; ++d) out << "," << sp.nodes(n, d);
      const int dof = dm.dof(c, n);
      out << "," << rep.best_state[dof] << "," << problem.reference_state[dof] << "\n";
    }
  }

  {
    std::ofstream out(dir + "/loss.csv");
    out.precision(17);
    out << "iter,loss\n";
    for (std::size_t i = 0; i < rep.loss_history.size(); ++i)
      out << i << "," << rep.loss_history[i] << "\n";
  }

  if (!rep.mu_history.empty()) {
    std::ofstream out(dir + "/unknowns.csv");
    out.precision(17);
    out << "iter";
    for (int k = 0; k < rep.mu_history.front().size(); ++k) out << ",p" << k;
    out << "\n";
    for (std::size_t i = 0; i < rep.mu_history.size(); ++i) {
      out << i;
      for (int k = 0; k < rep.mu_history[i].size(); ++k) out << "," << rep.mu_history[i][k];
      out << "\n";
    }
  }

  std::ofstream(dir + "/config.json") << config_snapshot;

  json j;
  j["case"] = problem.name;
  j["mode"] = run_mode_name(problem.mode);
  j["iters_run"] = rep.iters_run;
  j["best_iter"] = rep.best_iter;
  j["best_loss"] = rep.best_loss;
  j["best_data_loss"] = rep.best_data_loss;
  j["wall_seconds"] = rep.wall_seconds;
  j["diverged"] = rep.diverged;
  j["non_identifiable"] = rep.non_identifiable;
  j["field_error"] = summary.field_error;
  for (const auto& [k, v] : summary.extras) j[k] = v;
  std::ofstream(dir + "/report.json") << j.dump(2) << "\n";
}

}  // namespace ggn
