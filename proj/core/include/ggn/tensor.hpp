#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ggn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

class Tape;

// Lightweight handle to a node on a tape. Copying a Tensor never copies data.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Tape* tape, int id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr && id_ >= 0; }
  int id() const { return id_; }
  Tape* tape() const { return tape_; }

  const std::vector<int>& shape() const;
  int size() const;
  const Vec& values() const;
  const Vec& grad() const;  // valid after Tape::backward

  double scalar() const;  // value of a single-entry tensor

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Per-element constant coefficient table used by the FE interpolation ops:
// one nq x nloc (or nloc x nq) matrix per mesh element.
struct ElemTable {
  std::vector<Mat> per_elem;
  int rows() const { return per_elem.empty() ? 0 : (int)per_elem[0].rows(); }
  int cols() const { return per_elem.empty() ? 0 : (int)per_elem[0].cols(); }
};

enum class Op : std::uint8_t {
  Leaf,
  Add,
  Sub,
  Mul,
  Neg,
  ScaleConst,     // alpha * x, alpha a compile-time constant double
  ScalarMul,      // s * X, s a 1-element tensor broadcast over X
  AddRowVec,      // X (n,f) + row-broadcast b (f)
  MatMul,         // (m,k) x (k,n)
  MatMulConstR,   // X (m,k) x B (k,n), B a constant matrix held by the tape
  SpMatMul,       // A (n,n) sparse constant, symmetric; A * X (n,f)
  TableMatVec,    // Y.row(e) = T[e] * X.row(e)^T, T constant per-element table
  Relu,
  Softplus,
  Sum,
  L2Norm,
  Concat,
  Gather,         // out[i] = x[idx[i]]
  ScatterAdd,     // out = zeros(n); out[idx[i]] += x[i]
};

struct TapeNode {
  Op op = Op::Leaf;
  std::vector<int> shape;
  Vec values;
  Vec grad;             // allocated during backward
  bool requires_grad = false;
  int in0 = -1, in1 = -1;
  std::vector<int> extra_inputs;       // Concat only
  double alpha = 0.0;                  // ScaleConst
  const SpMat* sparse = nullptr;       // SpMatMul (not owned)
  const ElemTable* table = nullptr;    // TableMatVec (not owned)
  const Mat* cmat = nullptr;           // MatMulConstR (not owned)
  std::vector<int> indices;            // Gather / ScatterAdd
};

// Reverse-mode tape. Nodes are recorded in topological order by construction;
// a single backward pass visits each node exactly once, in reverse. One tape
// per training iteration; constants never receive gradients.
class Tape {
 public:
  Tensor constant(std::vector<int> shape, Vec values);
  Tensor constant_scalar(double v);
  // Leaf that participates in backward (network weights, trainable mu, ...).
  Tensor leaf(std::vector<int> shape, Vec values);

  Tensor add(Tensor a, Tensor b);
  Tensor sub(Tensor a, Tensor b);
  Tensor mul(Tensor a, Tensor b);  // elementwise
  Tensor neg(Tensor a);
  Tensor scale(Tensor a, double alpha);
  Tensor scalar_mul(Tensor s, Tensor x);  // s: 1-element tensor
  Tensor add_rowvec(Tensor x, Tensor b);
  Tensor matmul(Tensor a, Tensor b);
  Tensor matmul_const(Tensor a, const Mat& b);  // b outlives the tape
  Tensor spmatmul(const SpMat& a, Tensor x);    // a symmetric, outlives the tape
  Tensor table_matvec(const ElemTable& t, Tensor x);
  Tensor relu(Tensor x);
  Tensor softplus(Tensor x);
  Tensor sum(Tensor x);
  Tensor l2_norm(Tensor x);
  Tensor concat(std::span<const Tensor> parts);
  Tensor gather(Tensor x, std::vector<int> idx, std::vector<int> out_shape);
  Tensor scatter_add(Tensor x, std::vector<int> idx, int out_size);

  // Propagate d(loss)/d(node) for every grad-requiring node. loss must be scalar.
  void backward(Tensor loss);

  const TapeNode& node(int id) const { return nodes_[id]; }
  TapeNode& node(int id) { return nodes_[id]; }
  int size() const { return (int)nodes_.size(); }
  void clear() { nodes_.clear(); }
  void reserve(std::size_t n) { nodes_.reserve(n); }

 private:
  int push(TapeNode n);
  Tensor emit(TapeNode n) { return Tensor(this, push(std::move(n))); }
  void check_same_shape(const Tensor& a, const Tensor& b, const char* what) const;

  std::vector<TapeNode> nodes_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Named trainable tensors plus their Adam moment buffers. The set owns the
// master copies of the values; each iteration re-creates tape leaves from them.
class ParamSet {
 public:
  int add(std::string name, std::vector<int> shape, Vec init);
  int index_of(const std::string& name) const;  // -1 if absent

  int count() const { return (int)names_.size(); }
  const std::string& name(int i) const { return names_[i]; }
  const std::vector<int>& shape(int i) const { return shapes_[i]; }
  const Vec& value(int i) const { return values_[i]; }
  Vec& value(int i) { return values_[i]; }

  // Create one leaf per parameter on the tape, in registration order.
  std::vector<Tensor> make_leaves(Tape& tape) const;

  // Bias-corrected Adam update from the gradients left on the given leaves
  // by Tape::backward. Throws on non-finite gradients, naming the parameter.
  void adam_step(std::span<const Tensor> leaves, const AdamConfig& cfg);

  void zero_moments();
  std::int64_t step_count() const { return step_; }

  // Plain-text checkpoint: "ggn-params 1" header, then one block per tensor.
  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<int>> shapes_;
  std::vector<Vec> values_;
  std::vector<Vec> m_, v_;
  std::int64_t step_ = 0;
};

}  // namespace ggn
