#pragma once

#include "ggn/oracle.hpp"
#include "ggn/residual.hpp"
#include "ggn/training.hpp"

#include <memory>
#include <string>
#include <vector>

namespace ggn {

enum class RunMode { Forward, InverseSoft, InverseHard };

RunMode run_mode_from_string(const std::string& s);
const char* run_mode_name(RunMode m);

// A fully wired benchmark problem. Heap-allocated and pinned: the assembler
// holds a reference to the mesh stored here.
struct CaseProblem {
  std::string name;
  RunMode mode = RunMode::Forward;
  Mesh mesh;
  std::vector<FeSpace> spaces;
  std::shared_ptr<PdeModel> model;
  DofMap dofmap;
  std::vector<Observation> soft_obs;  // InverseSoft only
  TrainConfig train;                  // tuned defaults, overridable

  Vec reference_state;       // oracle (true parameters) or analytic, full dof layout
  bool has_analytic = false;
  Eigen::VectorXd true_mu;   // ground-truth model parameters
  Vec true_bc;               // ground-truth values of the trainable essential dofs

  std::unique_ptr<ResidualAssembler> assembler;
};

struct CaseInfo {
  std::string name;
  bool inverse = false;  // supports inverse-soft / inverse-hard
  std::string summary;
  double paper_e = 0.0;  // field error reported in the original study
};

const std::vector<CaseInfo>& case_list();

// Throws on unknown name or an inverse mode requested for a forward-only case.
std::unique_ptr<CaseProblem> make_case(const std::string& name, RunMode mode);

// Directory holding the checked-in meshes: $GGN_MESH_DIR, then ./meshes,
// then the source-tree path baked in at configure time.
std::string mesh_dir();

}  // namespace ggn
