#pragma once

#include "ggn/mesh.hpp"
#include "ggn/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ggn {

struct GcnConfig {
  int cheb_order = 10;                                    // K, number of Chebyshev terms
  std::vector<int> hidden = {32, 64, 128, 256, 128, 64, 32};
  int out_dim = 1;
};

// Chebyshev polynomials of the rescaled Laplacian applied to X:
// Z^1 = X, Z^2 = Lhat X, Z^k = 2 Lhat Z^{k-1} - Z^{k-2}.
std::vector<Tensor> cheb_basis(Tape& tape, const SpMat& lhat, Tensor x, int order);

// Node coordinates shifted to zero column mean and scaled to unit max-abs,
// the network input features.
Mat normalize_coords(const Eigen::MatrixXd& nodes);

// Chebyshev spectral graph convolutional network over a fixed graph. Hidden
// layers are ReLU, the output layer is linear. Parameters live in a ParamSet;
// the net only remembers their indices, so one set can back several nets.
class GcnNet {
 public:
  GcnNet(std::string name, int in_dim, const SpMat& scaled_laplacian, GcnConfig cfg = {});

  // He-uniform thetas (fan-in = K * in_features), zero biases.
  void register_params(ParamSet& params, std::uint64_t seed);

  // x: (n_nodes, in_dim) features; returns (n_nodes, out_dim).
  Tensor forward(Tape& tape, std::span<const Tensor> leaves, Tensor x) const;

  int in_dim() const { return in_dim_; }
  int out_dim() const { return cfg_.out_dim; }
  int n_nodes() const { return (int)lhat_.rows(); }
  const GcnConfig& config() const { return cfg_; }

 private:
  std::string name_;
  int in_dim_;
  SpMat lhat_;  // owned copy, must outlive every tape using this net
  GcnConfig cfg_;
  std::vector<std::vector<int>> theta_;  // [layer][k] ParamSet indices
  std::vector<int> bias_;
};

}  // namespace ggn
