#include "ggn/training.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ggn {

namespace {

// Inverse of softplus, stable for small and large v.
double softplus_inverse(double v) {
  if (v <= 0.0) throw std::invalid_argument("softplus_inverse: needs a positive value");
  return v + std::log1p(-std::exp(-v));
}

}  // namespace

Trainer::Trainer(const ResidualAssembler& assembler, TrainConfig cfg,
                 std::vector<Observation> soft_observations)
    : assembler_(assembler), cfg_(std::move(cfg)) {
  const DofMap& dm = assembler_.dofmap();
  const auto& spaces = assembler_.spaces();

  graphs_.reserve(spaces.size());
  for (const auto& s : spaces) graphs_.push_back(build_graph_operators(s.conn, s.node_count()));

  const int nc = (int)dm.components.size();
  nets_.reserve(nc);
  inputs_.reserve(nc);
  for (int c = 0; c < nc; ++c) {
    const int s = dm.components[c].space;
    GcnConfig gc = cfg_.gcn;
    gc.out_dim = 1;
    nets_.emplace_back(dm.components[c].name, (int)spaces[s].nodes.cols(),
                       graphs_[s].scaled_laplacian, gc);
    nets_.back().register_params(params_, cfg_.seed * 1000003 + c);
    inputs_.push_back(normalize_coords(spaces[s].nodes));
  }

  const auto& mu = assembler_.model().mu();
  mu_param_.assign(mu.size(), -1);
  for (int i = 0; i < (int)mu.size(); ++i) {
    if (!mu[i].trainable) continue;
    const double init = 0.5 * mu[i].value;
    Vec raw(1);
    raw[0] = mu[i].positive ? softplus_inverse(init) : init;
    mu_param_[i] = params_.add("mu." + mu[i].name, {1}, raw);
  }

  if (!dm.trainable_essential.empty()) {
    Vec init((int)dm.trainable_essential.size());
    for (int i = 0; i < init.size(); ++i) init[i] = dm.prescribed[dm.trainable_essential[i]];
    bc_param_ = params_.add("bc.trainable", {(int)init.size()}, init);
  }

  obs_values_.resize((int)soft_observations.size());
  for (int i = 0; i < (int)soft_observations.size(); ++i) {
    const auto& o = soft_observations[i];
    obs_dofs_.push_back(dm.dof(o.component, o.node));
    obs_values_[i] = o.value;
  }
}

TrainReport Trainer::run() {
  const auto t0 = std::chrono::steady_clock::now();
  const DofMap& dm = assembler_.dofmap();
  const int nc = (int)dm.components.size();
  const auto& mu = assembler_.model().mu();

  std::vector<int> inverse_params;  // ParamSet indices of the non-network unknowns
  for (int i : mu_param_)
    if (i >= 0) inverse_params.push_back(i);
  if (bc_param_ >= 0) inverse_params.push_back(bc_param_);

  TrainReport rep;
  rep.best_loss = std::numeric_limits<double>::infinity();
  rep.loss_history.reserve(cfg_.max_iters);

  AdamConfig adam = cfg_.adam;
  const double lr0 = adam.lr;
  double initial_loss = -1.0;
  double max_inverse_grad = 0.0;

  const int n_evals = std::max(1, cfg_.max_iters);  // 0 iterations: evaluate, never step
  for (int it = 0; it < n_evals; ++it) {
    double lr = lr0;
    for (double f : cfg_.decay_at)
      if (it >= (int)(f * cfg_.max_iters)) lr *= 0.5;
    adam.lr = lr;

    Tape tape;
    tape.reserve(4096);
    std::vector<Tensor> leaves = params_.make_leaves(tape);

    std::vector<Tensor> net_out(nc);
    for (int c = 0; c < nc; ++c) {
      Tensor x = tape.constant({(int)inputs_[c].rows(), (int)inputs_[c].cols()},
                               Eigen::Map<const Vec>(inputs_[c].data(), inputs_[c].size()));
      net_out[c] = nets_[c].forward(tape, leaves, x);
    }

    std::vector<Tensor> mu_t(mu.size());
    for (int i = 0; i < (int)mu.size(); ++i) {
      if (mu_param_[i] < 0) {
        mu_t[i] = tape.constant_scalar(mu[i].value);
      } else {
        Tensor raw = leaves[mu_param_[i]];
        mu_t[i] = mu[i].positive ? tape.softplus(raw) : raw;
      }
    }

    Tensor bc_t;
    Tensor state = (bc_param_ >= 0)
                       ? (bc_t = leaves[bc_param_],
                          assembler_.build_state(tape, net_out, &bc_t))
                       : assembler_.build_state(tape, net_out);

    Tensor total = assembler_.loss(tape, state, mu_t);
    double data_loss = 0.0;
    if (!obs_dofs_.empty()) {
      Tensor pred = tape.gather(state, obs_dofs_, {(int)obs_dofs_.size()});
      Tensor target = tape.constant({(int)obs_values_.size()}, obs_values_);
      Tensor mismatch = tape.l2_norm(tape.sub(pred, target));
      data_loss = mismatch.scalar();
      total = tape.add(total, tape.scale(mismatch, cfg_.penalty_lambda));
    }

    tape.backward(total);
    for (int pi : inverse_params)
      max_inverse_grad = std::max(max_inverse_grad, leaves[pi].grad().norm());

    const double loss = total.scalar();
    if (cfg_.max_iters > 0) {
      rep.loss_history.push_back(loss);
      if (!inverse_params.empty()) {
        Eigen::VectorXd snap(inverse_params.size());
        int j = 0;
        for (int i = 0; i < (int)mu.size(); ++i)
          if (mu_param_[i] >= 0) snap[j++] = mu_t[i].scalar();
        if (bc_param_ >= 0) snap[j] = leaves[bc_param_].values().norm();
        rep.mu_history.push_back(std::move(snap));
      }
    }
    if (initial_loss < 0.0) initial_loss = loss;

    if (!std::isfinite(loss) || loss > cfg_.divergence_factor * initial_loss) {
      rep.diverged = true;
      rep.iters_run = it + 1;
      break;
    }

    if (loss < rep.best_loss) {
      rep.best_loss = loss;
      rep.best_data_loss = data_loss;
      rep.best_iter = cfg_.max_iters > 0 ? it : -1;
      rep.best_state = state.values();
      rep.mu.resize((int)mu.size());
      for (int i = 0; i < (int)mu.size(); ++i) rep.mu[i] = mu_t[i].scalar();
      rep.trainable_bc = (bc_param_ >= 0) ? bc_t.values() : Vec();
    }

    if (cfg_.log_every > 0 && cfg_.on_log && it % cfg_.log_every == 0) cfg_.on_log(it, loss);

    if (cfg_.max_iters == 0) break;
    rep.iters_run = it + 1;
    if (cfg_.loss_tol > 0.0 && loss < cfg_.loss_tol) break;

    params_.adam_step(leaves, adam);
  }

  if (!std::isfinite(rep.best_loss)) throw std::runtime_error("training produced no usable iterate");
  rep.non_identifiable = !inverse_params.empty() && max_inverse_grad < 1e-10;
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace ggn
