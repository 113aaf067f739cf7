#pragma once

#include "ggn/tensor.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace ggn {

struct MuParam {
  std::string name;
  double value = 0.0;      // nominal (true) value
  bool trainable = false;
  bool positive = false;   // trainable parameter goes through softplus
};

// Batched fields at the volume quadrature points, one (E, nq) tensor per
// solution component. `ones` is a constant all-ones (E, nq) tensor for
// broadcasting scalars into fields.
struct TapeFields {
  std::vector<Tensor> u;
  std::vector<std::array<Tensor, 3>> grad;
  Tensor ones;
  int dim = 2;
};

using NaturalFlux =
    std::function<Eigen::VectorXd(const Eigen::VectorXd& x, const Eigen::VectorXd& n)>;

// Flux F(u, grad u; mu), source S(u, grad u; mu) and natural boundary fluxes of
// one equation set. Strong form: div F = S. Pure, stateless evaluators.
class PdeModel {
 public:
  virtual ~PdeModel() = default;

  int n_components() const { return n_components_; }
  int dim() const { return dim_; }
  const std::vector<MuParam>& mu() const { return mu_; }
  std::vector<MuParam>& mu() { return mu_; }
  Eigen::VectorXd mu_values() const;

  // Tape path (drives training). flux[c][k] / source[c] left invalid where the
  // term is identically zero.
  virtual void eval_tape(Tape& tape, const TapeFields& f, const std::vector<Tensor>& mu,
                         std::vector<std::array<Tensor, 3>>& flux,
                         std::vector<Tensor>& source) const = 0;

  // Pointwise path (drives the classical Jacobian assembly).
  // F: Nc x d, S: Nc.
  virtual void flux(const Eigen::VectorXd& u, const Eigen::MatrixXd& gu,
                    const Eigen::VectorXd& mu, Eigen::MatrixXd& F) const = 0;
  virtual void source(const Eigen::VectorXd& u, const Eigen::MatrixXd& gu,
                      const Eigen::VectorXd& mu, Eigen::VectorXd& S) const = 0;
  // dF_du[(c*d + k)*Nc + c2]; dF_dgu[((c*d + k)*Nc + c2)*d + k2]; same layout for S.
  virtual void flux_jacobian(const Eigen::VectorXd& u, const Eigen::MatrixXd& gu,
                             const Eigen::VectorXd& mu, std::vector<double>& dF_du,
                             std::vector<double>& dF_dgu) const = 0;
  virtual void source_jacobian(const Eigen::VectorXd& u, const Eigen::MatrixXd& gu,
                               const Eigen::VectorXd& mu, std::vector<double>& dS_du,
                               std::vector<double>& dS_dgu) const = 0;

  // Prescribed boundary flux replacing F.n on a natural tag; tags without a
  // binding get the homogeneous natural condition (zero flux).
  void bind_natural(const std::string& tag, NaturalFlux f) { natural_[tag] = std::move(f); }
  bool has_natural(const std::string& tag) const { return natural_.count(tag) > 0; }
  Eigen::VectorXd natural_flux(const std::string& tag, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& n) const;

 protected:
  PdeModel(int n_components, int dim, std::vector<MuParam> mu)
      : n_components_(n_components), dim_(dim), mu_(std::move(mu)) {}

  int n_components_;
  int dim_;
  std::vector<MuParam> mu_;
  std::map<std::string, NaturalFlux> natural_;
};

// f + laplace(u) = 0: F = grad u, S = -f, mu = [f].
class PoissonModel : public PdeModel {
 public:
  explicit PoissonModel(double f, bool f_trainable = false);
  void eval_tape(Tape&, const TapeFields&, const std::vector<Tensor>&,
                 std::vector<std::array<Tensor, 3>>&, std::vector<Tensor>&) const override;
  void flux(const Eigen::VectorXd&, const Eigen::MatrixXd&, const Eigen::VectorXd&,
            Eigen::MatrixXd&) const override;
  void source(const Eigen::VectorXd&, const Eigen::MatrixXd&, const Eigen::VectorXd&,
              Eigen::VectorXd&) const override;
  void flux_jacobian(const Eigen::VectorXd&, const Eigen::MatrixXd&, const Eigen::VectorXd&,
                     std::vector<double>&, std::vector<double>&) const override;
  void source_jacobian(const Eigen::VectorXd&, const Eigen::MatrixXd&, const Eigen::VectorXd&,
                       std::vector<double>&, std::vector<double>&) const override;
};

// div sigma = 0 with sigma_ij = lambda u_kk delta_ij + mu (u_i,j + u_j,i);
// mu = [lambda, mu].
class ElasticityModel : public PdeModel {
 public:
  ElasticityModel(int dim, double lambda, double mu_lame, bool trainable = false);
  void eval_tape(Tape&, const TapeFields&, const std::vector<Tensor>&,
                 std::vector<std::array<Tensor, 3>>&, std::vector<Tensor>&) const override;
  void flux(const Eigen::VectorXd&, const Eigen::MatrixXd&, const Eigen::VectorXd&,
            Eigen::MatrixXd&) const override;
  void source(const Eigen::VectorXd&, const Eigen::MatrixXd&, const Eigen::VectorXd&,
              Eigen::VectorXd&) const override;
  void flux_jacobian(const Eigen::VectorXd&, const Eigen::MatrixXd&, const Eigen::VectorXd&,
                     std::vector<double>&, std::vector<double>&) const override;
  void source_jacobian(const Eigen::VectorXd&, const Eigen::MatrixXd&, const Eigen::VectorXd&,
                       std::vector<double>&, std::vector<double>&) const override;
};

// Steady incompressible Navier-Stokes, components [v_1..v_d, p], mu = [nu].
// Momentum: F_i = nu grad v_i - p e_i, S_i = -(v . grad) v_i.
// Continuity is source-only: S_p = div v, tested against the pressure basis.
class NavierStokesModel : public PdeModel {
 public:
  NavierStokesModel(int dim, double nu, bool nu_trainable = false);
  void eval_tape(Tape&, const TapeFields&, const std::vector<Tensor>&,
                 std::vector<std::array<Tensor, 3>>&, std::vector<Tensor>&) const override;
  void flux(const Eigen::VectorXd&, const Eigen::MatrixXd&, const Eigen::VectorXd&,
            Eigen::MatrixXd&) const override;
  void source(const Eigen::VectorXd&, const Eigen::MatrixXd&, const Eigen::VectorXd&,
              Eigen::VectorXd&) const override;
  void flux_jacobian(const Eigen::VectorXd&, const Eigen::MatrixXd&, const Eigen::VectorXd&,
                     std::vector<double>&, std::vector<double>&) const override;
  void source_jacobian(const Eigen::VectorXd&, const Eigen::MatrixXd&, const Eigen::VectorXd&,
                       std::vector<double>&, std::vector<double>&) const override;
};

}  // namespace ggn
