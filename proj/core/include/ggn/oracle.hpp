#pragma once

#include "ggn/residual.hpp"

namespace ggn {

struct NewtonConfig {
  int max_iters = 30;
  double tol = 1e-10;       // absolute norm of the unconstrained residual
  int max_halvings = 10;    // step damping on residual increase
};

struct NewtonResult {
  Vec state;                // full nodal state, essential values included
  int iters = 0;
  double residual_norm = 0.0;
  bool converged = false;
};

// dR/dU of the weak-form residual, dense, assembled from the model's pointwise
// flux/source Jacobians. Rows and columns follow the DofMap layout.
Eigen::MatrixXd assemble_jacobian(const ResidualAssembler& assembler, const Vec& state);

// Classical FEM reference solve: Newton on the unconstrained rows with the
// essential DOFs held at their prescribed values. Starts from the essential
// lift of zero, so a linear problem converges in one step.
NewtonResult solve_newton(const ResidualAssembler& assembler, const NewtonConfig& cfg = {});

// One-shot direct solve for a linear PDE (the residual must be affine in the
// state). Throws if the tangent matrix is singular or the solve does not drive
// the residual to round-off.
Vec solve_linear(const ResidualAssembler& assembler);

}  // namespace ggn
