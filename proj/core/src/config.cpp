#include "ggn/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <stdexcept>

namespace ggn {

using nlohmann::json;

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config: " + path + ": " + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("config: top level must be an object");

  static const std::set<std::string> known = {
      "case", "mode", "out", "seed", "max_iters", "loss_tol", "lr",
      "penalty_lambda", "cheb_order", "hidden", "log_every"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw std::runtime_error("config: unknown key '" + key + "'");

  RunConfig cfg;
  if (j.contains("case")) cfg.case_name = j["case"].get<std::string>();
  if (j.contains("mode")) cfg.mode = j["mode"].get<std::string>();
  if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("max_iters")) cfg.max_iters = j["max_iters"].get<int>();
  if (j.contains("loss_tol")) cfg.loss_tol = j["loss_tol"].get<double>();
  if (j.contains("lr")) cfg.lr = j["lr"].get<double>();
  if (j.contains("penalty_lambda")) cfg.penalty_lambda = j["penalty_lambda"].get<double>();
  if (j.contains("cheb_order")) cfg.cheb_order = j["cheb_order"].get<int>();
  if (j.contains("hidden")) cfg.hidden = j["hidden"].get<std::vector<int>>();
  if (j.contains("log_every")) cfg.log_every = j["log_every"].get<int>();
  return cfg;
}

void apply_config(const RunConfig& cfg, TrainConfig& train) {
  if (cfg.seed) train.seed = *cfg.seed;
  if (cfg.max_iters) train.max_iters = *cfg.max_iters;
  if (cfg.loss_tol) train.loss_tol = *cfg.loss_tol;
  if (cfg.lr) train.adam.lr = *cfg.lr;
  if (cfg.penalty_lambda) train.penalty_lambda = *cfg.penalty_lambda;
  if (cfg.cheb_order) train.gcn.cheb_order = *cfg.cheb_order;
  if (cfg.hidden) train.gcn.hidden = *cfg.hidden;
  if (cfg.log_every) train.log_every = *cfg.log_every;
}

std::string config_snapshot(const RunConfig& cfg, const TrainConfig& train) {
  json j;
  j["case"] = cfg.case_name;
  j["mode"] = cfg.mode;
  j["seed"] = train.seed;
  j["max_iters"] = train.max_iters;
  j["loss_tol"] = train.loss_tol;
  j["lr"] = train.adam.lr;
  j["penalty_lambda"] = train.penalty_lambda;
  j["cheb_order"] = train.gcn.cheb_order;
  j["hidden"] = train.gcn.hidden;
  return j.dump(2) + "\n";
}

}  // namespace ggn
