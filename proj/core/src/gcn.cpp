#include "ggn/gcn.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace ggn {

std::vector<Tensor> cheb_basis(Tape& tape, const SpMat& lhat, Tensor x, int order) {
  if (order < 1) throw std::invalid_argument("cheb_basis: order must be >= 1");
  std::vector<Tensor> z;
  z.reserve(order);
  z.push_back(x);
  if (order > 1) z.push_back(tape.spmatmul(lhat, x));
  for (int k = 2; k < order; ++k)
    z.push_back(tape.sub(tape.scale(tape.spmatmul(lhat, z[k - 1]), 2.0), z[k - 2]));
  return z;
}

Mat normalize_coords(const Eigen::MatrixXd& nodes) {
  Mat x = nodes;
  for (int j = 0; j < x.cols(); ++j) {
    x.col(j).array() -= x.col(j).mean();
    const double m = x.col(j).cwiseAbs().maxCoeff();
    if (m > 0.0) x.col(j) /= m;
  }
  return x;
}

GcnNet::GcnNet(std::string name, int in_dim, const SpMat& scaled_laplacian, GcnConfig cfg)
    : name_(std::move(name)), in_dim_(in_dim), lhat_(scaled_laplacian), cfg_(std::move(cfg)) {
  if (in_dim_ < 1 || cfg_.out_dim < 1 || cfg_.cheb_order < 1)
    throw std::invalid_argument("gcn: bad configuration");
}

void GcnNet::register_params(ParamSet& params, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<int> widths;
  widths.push_back(in_dim_);
  widths.insert(widths.end(), cfg_.hidden.begin(), cfg_.hidden.end());
  widths.push_back(cfg_.out_dim);

  const int n_layers = (int)widths.size() - 1;
  theta_.assign(n_layers, {});
  bias_.assign(n_layers, -1);
  for (int l = 0; l < n_layers; ++l) {
    const int fin = widths[l], fout = widths[l + 1];
    const double bound = std::sqrt(6.0 / (cfg_.cheb_order * fin));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (int k = 0; k < cfg_.cheb_order; ++k) {
      Vec w(fin * fout);
      for (int i = 0; i < w.size(); ++i) w[i] = dist(rng);
      theta_[l].push_back(params.add(name_ + ".l" + std::to_string(l) + ".t" + std::to_string(k),
                                     {fin, fout}, std::move(w)));
    }
    bias_[l] = params.add(name_ + ".l" + std::to_string(l) + ".b", {fout}, Vec::Zero(fout));
  }
}

Tensor GcnNet::forward(Tape& tape, std::span<const Tensor> leaves, Tensor x) const {
  if (theta_.empty()) throw std::logic_error("gcn: forward before register_params");
  const int n_layers = (int)theta_.size();
  Tensor h = x;
  for (int l = 0; l < n_layers; ++l) {
    std::vector<Tensor> z = cheb_basis(tape, lhat_, h, cfg_.cheb_order);
    Tensor acc;
    for (int k = 0; k < cfg_.cheb_order; ++k) {
      Tensor t = tape.matmul(z[k], leaves[theta_[l][k]]);
      acc = acc.valid() ? tape.add(acc, t) : t;
    }
    acc = tape.add_rowvec(acc, leaves[bias_[l]]);
    h = (l + 1 < n_layers) ? tape.relu(acc) : acc;
  }
  return h;
}

}  // namespace ggn
