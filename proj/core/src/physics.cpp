#include "ggn/physics.hpp"

#include <stdexcept>

namespace ggn {

Eigen::VectorXd PdeModel::mu_values() const {
  Eigen::VectorXd v(mu_.size());
  for (std::size_t i = 0; i < mu_.size(); ++i) v[(int)i] = mu_[i].value;
  return v;
}

Eigen::VectorXd PdeModel::natural_flux(const std::string& tag, const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& n) const {
  auto it = natural_.find(tag);
  if (it == natural_.end()) return Eigen::VectorXd::Zero(n_components_);
  return it->second(x, n);
}

// ---------------------------------------------------------------------------
// Poisson

PoissonModel::PoissonModel(double f, bool f_trainable)
    : PdeModel(1, 2, {MuParam{"f", f, f_trainable, false}}) {}

void PoissonModel::eval_tape(Tape& tape, const TapeFields& fld, const std::vector<Tensor>& mu,
                             std::vector<std::array<Tensor, 3>>& flux,
                             std::vector<Tensor>& source) const {
  flux.assign(1, {});
  source.assign(1, {});
  for (int k = 0; k < dim_; ++k) flux[0][k] = fld.grad[0][k];
  source[0] = tape.neg(tape.scalar_mul(mu[0], fld.ones));
}

void PoissonModel::flux(const Eigen::VectorXd&, const Eigen::MatrixXd& gu,
                        const Eigen::VectorXd&, Eigen::MatrixXd& F) const {
  F = gu;
}

void PoissonModel::source(const Eigen::VectorXd&, const Eigen::MatrixXd&,
                          const Eigen::VectorXd& mu, Eigen::VectorXd& S) const {
  S.resize(1);
  S[0] = -mu[0];
}

void PoissonModel::flux_jacobian(const Eigen::VectorXd&, const Eigen::MatrixXd&,
                                 const Eigen::VectorXd&, std::vector<double>& dF_du,
                                 std::vector<double>& dF_dgu) const {
  dF_du.assign(dim_, 0.0);
  dF_dgu.assign(dim_ * dim_, 0.0);
  for (int k = 0; k < dim_; ++k) dF_dgu[k * dim_ + k] = 1.0;
}

void PoissonModel::source_jacobian(const Eigen::VectorXd&, const Eigen::MatrixXd&,
                                   const Eigen::VectorXd&, std::vector<double>& dS_du,
                                   std::vector<double>& dS_dgu) const {
  dS_du.assign(1, 0.0);
  dS_dgu.assign(dim_, 0.0);
}

// ---------------------------------------------------------------------------
// Linear elasticity

ElasticityModel::ElasticityModel(int dim, double lambda, double mu_lame, bool trainable)
    : PdeModel(dim, dim,
               {MuParam{"lambda", lambda, trainable, true},
                MuParam{"mu", mu_lame, trainable, true}}) {}

void ElasticityModel::eval_tape(Tape& tape, const TapeFields& fld,
                                const std::vector<Tensor>& mu,
                                std::vector<std::array<Tensor, 3>>& flux,
                                std::vector<Tensor>& source) const {
  const int d = dim_;
  flux.assign(d, {});
  source.assign(d, {});
  Tensor div = fld.grad[0][0];
  for (int k = 1; k < d; ++k) div = tape.add(div, fld.grad[k][k]);
  const Tensor lam_div = tape.scalar_mul(mu[0], div);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) {
      Tensor s = tape.scalar_mul(mu[1], tape.add(fld.grad[i][k], fld.grad[k][i]));
      if (i == k) s = tape.add(s, lam_div);
      flux[i][k] = s;
    }
}

void ElasticityModel::flux(const Eigen::VectorXd&, const Eigen::MatrixXd& gu,
                           const Eigen::VectorXd& mu, Eigen::MatrixXd& F) const {
  const double div = gu.diagonal().sum();
  F = mu[1] * (gu + gu.transpose());
  F.diagonal().array() += mu[0] * div;
}

void ElasticityModel::source(const Eigen::VectorXd&, const Eigen::MatrixXd&,
                             const Eigen::VectorXd&, Eigen::VectorXd& S) const {
  S = Eigen::VectorXd::Zero(dim_);
}

void ElasticityModel::flux_jacobian(const Eigen::VectorXd&, const Eigen::MatrixXd&,
                                    const Eigen::VectorXd& mu, std::vector<double>& dF_du,
                                    std::vector<double>& dF_dgu) const {
  const int d = dim_, nc = n_components_;
  dF_du.assign(nc * d * nc, 0.0);
  dF_dgu.assign(nc * d * nc * d, 0.0);
  auto at = [&](int c, int k, int c2, int k2) -> double& {
    return dF_dgu[((c * d + k) * nc + c2) * d + k2];
  };
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      for (int c2 = 0; c2 < d; ++c2)
        for (int k2 = 0; k2 < d; ++k2) {
          double v = 0.0;
          if (i == k && c2 == k2) v += mu[0];
          if (i == c2 && k == k2) v += mu[1];
          if (k == c2 && i == k2) v += mu[1];
          at(i, k, c2, k2) = v;
        }
}

void ElasticityModel::source_jacobian(const Eigen::VectorXd&, const Eigen::MatrixXd&,
                                      const Eigen::VectorXd&, std::vector<double>& dS_du,
                                      std::vector<double>& dS_dgu) const {
  dS_du.assign(n_components_ * n_components_, 0.0);
  dS_dgu.assign(n_components_ * n_components_ * dim_, 0.0);
}

// ---------------------------------------------------------------------------
// Navier-Stokes

NavierStokesModel::NavierStokesModel(int dim, double nu, bool nu_trainable)
    : PdeModel(dim + 1, dim, {MuParam{"nu", nu, nu_trainable, true}}) {}

void NavierStokesModel::eval_tape(Tape& tape, const TapeFields& fld,
                                  const std::vector<Tensor>& mu,
                                  std::vector<std::array<Tensor, 3>>& flux,
                                  std::vector<Tensor>& source) const {
  const int d = dim_;
  const int pc = d;  // pressure component index
  flux.assign(d + 1, {});
  source.assign(d + 1, {});
  for (int i = 0; i < d; ++i) {
    for (int k = 0; k < d; ++k) {
      Tensor f = tape.scalar_mul(mu[0], fld.grad[i][k]);
      if (i == k) f = tape.sub(f, fld.u[pc]);
      flux[i][k] = f;
    }
    Tensor conv = tape.mul(fld.u[0], fld.grad[i][0]);
    for (int m = 1; m < d; ++m) conv = tape.add(conv, tape.mul(fld.u[m], fld.grad[i][m]));
    source[i] = tape.neg(conv);
  }
  Tensor div = fld.grad[0][0];
  for (int m = 1; m < d; ++m) div = tape.add(div, fld.grad[m][m]);
  source[pc] = div;
}

void NavierStokesModel::flux(const Eigen::VectorXd& u, const Eigen::MatrixXd& gu,
                             const Eigen::VectorXd& mu, Eigen::MatrixXd& F) const {
  const int d = dim_;
  F.setZero(d + 1, d);
  F.topRows(d) = mu[0] * gu.topRows(d);
  F.topRows(d).diagonal().array() -= u[d];
}

void NavierStokesModel::source(const Eigen::VectorXd& u, const Eigen::MatrixXd& gu,
                               const Eigen::VectorXd&, Eigen::VectorXd& S) const {
  const int d = dim_;
  S.setZero(d + 1);
  for (int i = 0; i < d; ++i)
    for (int m = 0; m < d; ++m) S[i] -= u[m] * gu(i, m);
  S[d] = gu.topRows(d).diagonal().sum();
}

void NavierStokesModel::flux_jacobian(const Eigen::VectorXd&, const Eigen::MatrixXd&,
                                      const Eigen::VectorXd& mu, std::vector<double>& dF_du,
                                      std::vector<double>& dF_dgu) const {
  const int d = dim_, nc = n_components_;
  dF_du.assign(nc * d * nc, 0.0);
  dF_dgu.assign(nc * d * nc * d, 0.0);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) {
      dF_dgu[((i * d + k) * nc + i) * d + k] += mu[0];
      if (i == k) dF_du[(i * d + k) * nc + d] -= 1.0;
    }
}

void NavierStokesModel::source_jacobian(const Eigen::VectorXd& u, const Eigen::MatrixXd& gu,
                                        const Eigen::VectorXd&, std::vector<double>& dS_du,
                                        std::vector<double>& dS_dgu) const {
  const int d = dim_, nc = n_components_;
  dS_du.assign(nc * nc, 0.0);
  dS_dgu.assign(nc * nc * d, 0.0);
  for (int i = 0; i < d; ++i)
    for (int m = 0; m < d; ++m) {
      dS_du[i * nc + m] -= gu(i, m);
      dS_dgu[(i * nc + i) * d + m] -= u[m];
    }
  for (int m = 0; m < d; ++m) dS_dgu[(d * nc + m) * d + m] += 1.0;
}

}  // namespace ggn
