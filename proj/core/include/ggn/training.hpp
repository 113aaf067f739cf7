#pragma once

#include "ggn/gcn.hpp"
#include "ggn/residual.hpp"

#include <functional>
#include <vector>

namespace ggn {

struct TrainConfig {
  int max_iters = 3000;
  double loss_tol = 0.0;             // early stop when the total loss drops below
  AdamConfig adam;
  std::uint64_t seed = 1;
  double penalty_lambda = 1000.0;    // soft observation weight
  double divergence_factor = 1e4;    // abort when loss exceeds factor * initial
  std::vector<double> decay_at = {0.6, 0.85};  // lr halves at these iteration fractions
  GcnConfig gcn;
  int log_every = 0;                 // 0 disables the callback
  std::function<void(int iter, double loss)> on_log;
};

struct TrainReport {
  Vec best_state;                // full nodal state of the best iterate
  double best_loss = 0.0;
  double best_data_loss = 0.0;   // observation-mismatch norm at the best iterate (soft mode)
  int best_iter = -1;
  int iters_run = 0;
  std::vector<double> loss_history;
  std::vector<Eigen::VectorXd> mu_history;  // per iteration, trainable parameters only
  Eigen::VectorXd mu;            // model parameters at the best iterate
  Vec trainable_bc;              // learned essential values, ascending dof order
  bool diverged = false;
  // Inverse unknowns present but their gradient stayed at zero (no data reaches them).
  bool non_identifiable = false;
  double wall_seconds = 0.0;
};

// Trains one Chebyshev GCN per solution component against the condensed
// weak-form residual norm. Inverse problems arise from trainable model
// parameters, trainable essential BCs, or observations: hard observations are
// clamped through the DofMap, soft ones enter as a penalty term here.
class Trainer {
 public:
  Trainer(const ResidualAssembler& assembler, TrainConfig cfg,
          std::vector<Observation> soft_observations = {});

  TrainReport run();

  ParamSet& params() { return params_; }

 private:
  const ResidualAssembler& assembler_;
  TrainConfig cfg_;
  ParamSet params_;
  std::vector<GraphOperators> graphs_;  // per space
  std::vector<GcnNet> nets_;            // per component
  std::vector<Mat> inputs_;             // per component, normalized coordinates
  std::vector<int> mu_param_;           // ParamSet index per model mu, -1 if fixed
  int bc_param_ = -1;
  std::vector<int> obs_dofs_;
  Vec obs_values_;
};

}  // namespace ggn
