#pragma once

#include "ggn/mesh.hpp"
#include "ggn/physics.hpp"
#include "ggn/space.hpp"
#include "ggn/tensor.hpp"

#include <memory>
#include <vector>

namespace ggn {

// Galerkin weak-form residual R(U; mu) as a differentiable tape function of the
// full nodal state. Rows follow the DofMap layout; condensation drops the
// essential rows and keeps unconstrained + observation rows.
class ResidualAssembler {
 public:
  ResidualAssembler(const Mesh& mesh, std::vector<FeSpace> spaces,
                    std::shared_ptr<const PdeModel> model, DofMap dofmap);

  const DofMap& dofmap() const { return dofmap_; }
  const std::vector<FeSpace>& spaces() const { return spaces_; }
  const BasisTable& table(int space) const { return tables_[space]; }
  const PdeModel& model() const { return *model_; }
  const Vec& surface_load() const { return surface_load_; }

  // Full nodal state from per-component network outputs (full node vectors;
  // only unconstrained entries are used) plus the prescribed clamps. The
  // optional trainable_bc tensor supplies values for the trainable-essential
  // DOFs, in ascending dof order.
  Tensor build_state(Tape& tape, const std::vector<Tensor>& net_out,
                     const Tensor* trainable_bc = nullptr) const;

  Tensor assemble(Tape& tape, Tensor state, const std::vector<Tensor>& mu) const;
  Tensor condense(Tape& tape, Tensor residual) const;
  Tensor loss(Tape& tape, Tensor state, const std::vector<Tensor>& mu) const;

  // Tape-free evaluation at a plain state with the nominal mu (oracle checks).
  Vec assemble_plain(const Vec& state) const;
  Vec condensed_plain(const Vec& state) const;

 private:
  const Mesh& mesh_;
  std::vector<FeSpace> spaces_;
  std::shared_ptr<const PdeModel> model_;
  DofMap dofmap_;
  std::vector<BasisTable> tables_;
  int vol_degree_ = 0;
  int surf_degree_ = 0;

  // Precomputed index plumbing.
  std::vector<std::vector<int>> elem_dof_idx_;     // per component: flat (E*nloc) dof ids
  std::vector<std::vector<int>> net_gather_idx_;   // per component: node ids of unconstrained
  std::vector<std::vector<int>> net_scatter_dof_;  // per component: matching dof ids
  Vec clamped_base_;                               // essential + hard-observed values
  Vec surface_load_;                               // natural-tag surface term (constant)

  void build_surface_load();
};

// Relative L2 error ||a - b|| / ||b||; throws if ||b|| = 0.
double relative_error(const Vec& a, const Vec& b);

}  // namespace ggn
