#include "ggn/tensor.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ggn {

namespace {

int shape_size(const std::vector<int>& s) {
  int n = 1;
  for (int d : s) n *= d;
  return n;
}

std::string shape_str(const std::vector<int>& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

Eigen::Map<const Mat> as_mat(const Vec& v, const std::vector<int>& shape) {
  return Eigen::Map<const Mat>(v.data(), shape[0], shape[1]);
}

Eigen::Map<Mat> as_mat(Vec& v, const std::vector<int>& shape) {
  return Eigen::Map<Mat>(v.data(), shape[0], shape[1]);
}

}  // namespace

const std::vector<int>& Tensor::shape() const { return tape_->node(id_).shape; }
int Tensor::size() const { return (int)tape_->node(id_).values.size(); }
const Vec& Tensor::values() const { return tape_->node(id_).values; }
const Vec& Tensor::grad() const { return tape_->node(id_).grad; }

double Tensor::scalar() const {
  const Vec& v = values();
  if (v.size() != 1) throw std::runtime_error("Tensor::scalar: size != 1");
  return v[0];
}

int Tape::push(TapeNode n) {
  nodes_.push_back(std::move(n));
  return (int)nodes_.size() - 1;
}

void Tape::check_same_shape(const Tensor& a, const Tensor& b, const char* what) const {
  if (a.shape() != b.shape())
    throw std::invalid_argument(std::string(what) + ": shape mismatch " +
                                shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

Tensor Tape::constant(std::vector<int> shape, Vec values) {
  if (shape_size(shape) != (int)values.size())
    throw std::invalid_argument("constant: shape/value size mismatch");
  TapeNode n;
  n.op = Op::Leaf;
  n.shape = std::move(shape);
  n.values = std::move(values);
  n.requires_grad = false;
  return emit(std::move(n));
}

Tensor Tape::constant_scalar(double v) { return constant({1}, Vec::Constant(1, v)); }

Tensor Tape::leaf(std::vector<int> shape, Vec values) {
  Tensor t = constant(std::move(shape), std::move(values));
  node(t.id()).requires_grad = true;
  return t;
}

Tensor Tape::add(Tensor a, Tensor b) {
  check_same_shape(a, b, "add");
  TapeNode n;
  n.op = Op::Add;
  n.shape = a.shape();
  n.in0 = a.id();
  n.in1 = b.id();
  n.values = a.values() + b.values();
  n.requires_grad = node(a.id()).requires_grad || node(b.id()).requires_grad;
  return emit(std::move(n));
}

Tensor Tape::sub(Tensor a, Tensor b) {
  check_same_shape(a, b, "sub");
  TapeNode n;
  n.op = Op::Sub;
  n.shape = a.shape();
  n.in0 = a.id();
  n.in1 = b.id();
  n.values = a.values() - b.values();
  n.requires_grad = node(a.id()).requires_grad || node(b.id()).requires_grad;
  return emit(std::move(n));
}

Tensor Tape::mul(Tensor a, Tensor b) {
  check_same_shape(a, b, "mul");
  TapeNode n;
  n.op = Op::Mul;
  n.shape = a.shape();
  n.in0 = a.id();
  n.in1 = b.id();
  n.values = a.values().cwiseProduct(b.values());
  n.requires_grad = node(a.id()).requires_grad || node(b.id()).requires_grad;
  return emit(std::move(n));
}

Tensor Tape::neg(Tensor a) {
  TapeNode n;
  n.op = Op::Neg;
  n.shape = a.shape();
  n.in0 = a.id();
  n.values = -a.values();
  n.requires_grad = node(a.id()).requires_grad;
  return emit(std::move(n));
}

Tensor Tape::scale(Tensor a, double alpha) {
  TapeNode n;
  n.op = Op::ScaleConst;
  n.shape = a.shape();
  n.in0 = a.id();
  n.alpha = alpha;
  n.values = alpha * a.values();
  n.requires_grad = node(a.id()).requires_grad;
  return emit(std::move(n));
}

Tensor Tape::scalar_mul(Tensor s, Tensor x) {
  if (s.size() != 1) throw std::invalid_argument("scalar_mul: scalar operand must have size 1");
  TapeNode n;
  n.op = Op::ScalarMul;
  n.shape = x.shape();
  n.in0 = s.id();
  n.in1 = x.id();
  n.values = s.values()[0] * x.values();
  n.requires_grad = node(s.id()).requires_grad || node(x.id()).requires_grad;
  return emit(std::move(n));
}

Tensor Tape::add_rowvec(Tensor x, Tensor b) {
  if (x.shape().size() != 2 || b.size() != x.shape()[1])
    throw std::invalid_argument("add_rowvec: X must be (n,f) and b length f; got " +
                                shape_str(x.shape()) + " and " + shape_str(b.shape()));
  TapeNode n;
  n.op = Op::AddRowVec;
  n.shape = x.shape();
  n.in0 = x.id();
  n.in1 = b.id();
  n.values = x.values();
  auto m = as_mat(n.values, n.shape);
  m.rowwise() += b.values().transpose();
  n.requires_grad = node(x.id()).requires_grad || node(b.id()).requires_grad;
  return emit(std::move(n));
}

Tensor Tape::matmul(Tensor a, Tensor b) {
  if (a.shape().size() != 2 || b.shape().size() != 2 || a.shape()[1] != b.shape()[0])
    throw std::invalid_argument("matmul: incompatible shapes " + shape_str(a.shape()) +
                                " x " + shape_str(b.shape()));
  TapeNode n;
  n.op = Op::MatMul;
  n.shape = {a.shape()[0], b.shape()[1]};
  n.in0 = a.id();
  n.in1 = b.id();
  n.values.resize(n.shape[0] * n.shape[1]);
  as_mat(n.values, n.shape).noalias() =
      as_mat(a.values(), a.shape()) * as_mat(b.values(), b.shape());
  n.requires_grad = node(a.id()).requires_grad || node(b.id()).requires_grad;
  return emit(std::move(n));
}

Tensor Tape::matmul_const(Tensor a, const Mat& b) {
  if (a.shape().size() != 2 || a.shape()[1] != b.rows())
    throw std::invalid_argument("matmul_const: incompatible shapes " + shape_str(a.shape()) +
                                " x (" + std::to_string(b.rows()) + "," +
                                std::to_string(b.cols()) + ")");
  TapeNode n;
  n.op = Op::MatMulConstR;
  n.shape = {a.shape()[0], (int)b.cols()};
  n.in0 = a.id();
  n.cmat = &b;
  n.values.resize(n.shape[0] * n.shape[1]);
  as_mat(n.values, n.shape).noalias() = as_mat(a.values(), a.shape()) * b;
  n.requires_grad = node(a.id()).requires_grad;
  return emit(std::move(n));
}

Tensor Tape::spmatmul(const SpMat& a, Tensor x) {
  if (x.shape().size() != 2 || a.cols() != x.shape()[0])
    throw std::invalid_argument("spmatmul: incompatible shapes");
  TapeNode n;
  n.op = Op::SpMatMul;
  n.shape = {(int)a.rows(), x.shape()[1]};
  n.in0 = x.id();
  n.sparse = &a;
  n.values.resize(n.shape[0] * n.shape[1]);
  as_mat(n.values, n.shape).noalias() = a * as_mat(x.values(), x.shape());
  n.requires_grad = node(x.id()).requires_grad;
  return emit(std::move(n));
}

Tensor Tape::table_matvec(const ElemTable& t, Tensor x) {
  const int ne = (int)t.per_elem.size();
  if (x.shape().size() != 2 || x.shape()[0] != ne || x.shape()[1] != t.cols())
    throw std::invalid_argument("table_matvec: X must be (n_elem, cols) matching the table");
  TapeNode n;
  n.op = Op::TableMatVec;
  n.shape = {ne, t.rows()};
  n.in0 = x.id();
  n.table = &t;
  n.values.resize(ne * t.rows());
  auto xin = as_mat(x.values(), x.shape());
  auto out = as_mat(n.values, n.shape);
  for (int e = 0; e < ne; ++e)
    out.row(e).transpose().noalias() = t.per_elem[e] * xin.row(e).transpose();
  n.requires_grad = node(x.id()).requires_grad;
  return emit(std::move(n));
}

Tensor Tape::relu(Tensor x) {
  TapeNode n;
  n.op = Op::Relu;
  n.shape = x.shape();
  n.in0 = x.id();
  n.values = x.values().cwiseMax(0.0);
  n.requires_grad = node(x.id()).requires_grad;
  return emit(std::move(n));
}

Tensor Tape::softplus(Tensor x) {
  TapeNode n;
  n.op = Op::Softplus;
  n.shape = x.shape();
  n.in0 = x.id();
  n.values = x.values().unaryExpr([](double v) {
    // overflow-safe log(1+exp(v))
    return v > 30.0 ? v : std::log1p(std::exp(v));
  });
  n.requires_grad = node(x.id()).requires_grad;
  return emit(std::move(n));
}

Tensor Tape::sum(Tensor x) {
  TapeNode n;
  n.op = Op::Sum;
  n.shape = {1};
  n.in0 = x.id();
  n.values = Vec::Constant(1, x.values().sum());
  n.requires_grad = node(x.id()).requires_grad;
  return emit(std::move(n));
}

Tensor Tape::l2_norm(Tensor x) {
  TapeNode n;
  n.op = Op::L2Norm;
  n.shape = {1};
  n.in0 = x.id();
  n.values = Vec::Constant(1, x.values().norm());
  n.requires_grad = node(x.id()).requires_grad;
  return emit(std::move(n));
}

Tensor Tape::concat(std::span<const Tensor> parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  int total = 0;
  for (const Tensor& p : parts) total += p.size();
  TapeNode n;
  n.op = Op::Concat;
  n.shape = {total};
  n.values.resize(total);
  int off = 0;
  for (const Tensor& p : parts) {
    n.values.segment(off, p.size()) = p.values();
    off += p.size();
    n.extra_inputs.push_back(p.id());
    n.requires_grad = n.requires_grad || node(p.id()).requires_grad;
  }
  return emit(std::move(n));
}

Tensor Tape::gather(Tensor x, std::vector<int> idx, std::vector<int> out_shape) {
  if (shape_size(out_shape) != (int)idx.size())
    throw std::invalid_argument("gather: out_shape does not match index count");
  TapeNode n;
  n.op = Op::Gather;
  n.shape = std::move(out_shape);
  n.in0 = x.id();
  n.values.resize((int)idx.size());
  const Vec& xv = x.values();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= xv.size())
      throw std::out_of_range("gather: index " + std::to_string(idx[i]) + " out of range");
    n.values[(int)i] = xv[idx[i]];
  }
  n.indices = std::move(idx);
  n.requires_grad = node(x.id()).requires_grad;
  return emit(std::move(n));
}

Tensor Tape::scatter_add(Tensor x, std::vector<int> idx, int out_size) {
  if ((int)idx.size() != x.size())
    throw std::invalid_argument("scatter_add: index count does not match input size");
  TapeNode n;
  n.op = Op::ScatterAdd;
  n.shape = {out_size};
  n.in0 = x.id();
  n.values = Vec::Zero(out_size);
  const Vec& xv = x.values();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= out_size)
      throw std::out_of_range("scatter_add: index " + std::to_string(idx[i]) + " out of range");
    n.values[idx[i]] += xv[(int)i];
  }
  n.indices = std::move(idx);
  n.requires_grad = node(x.id()).requires_grad;
  return emit(std::move(n));
}

void Tape::backward(Tensor loss) {
  if (loss.size() != 1) throw std::invalid_argument("backward: loss must be scalar");
  const int last = loss.id();
  for (TapeNode& n : nodes_) n.grad.resize(0);
  nodes_[last].grad = Vec::Constant(1, 1.0);

  auto grad_of = [&](int id) -> Vec& {
    TapeNode& n = nodes_[id];
    if (n.grad.size() == 0) n.grad = Vec::Zero(n.values.size());
    return n.grad;
  };

  for (int id = last; id >= 0; --id) {
    TapeNode& n = nodes_[id];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    const Vec& g = n.grad;
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::Add:
        if (nodes_[n.in0].requires_grad) grad_of(n.in0) += g;
        if (nodes_[n.in1].requires_grad) grad_of(n.in1) += g;
        break;
      case Op::Sub:
        if (nodes_[n.in0].requires_grad) grad_of(n.in0) += g;
        if (nodes_[n.in1].requires_grad) grad_of(n.in1) -= g;
        break;
      case Op::Mul:
        if (nodes_[n.in0].requires_grad)
          grad_of(n.in0) += g.cwiseProduct(nodes_[n.in1].values);
        if (nodes_[n.in1].requires_grad)
          grad_of(n.in1) += g.cwiseProduct(nodes_[n.in0].values);
        break;
      case Op::Neg:
        if (nodes_[n.in0].requires_grad) grad_of(n.in0) -= g;
        break;
      case Op::ScaleConst:
        if (nodes_[n.in0].requires_grad) grad_of(n.in0) += n.alpha * g;
        break;
      case Op::ScalarMul:
        if (nodes_[n.in0].requires_grad)
          grad_of(n.in0)[0] += g.dot(nodes_[n.in1].values);
        if (nodes_[n.in1].requires_grad)
          grad_of(n.in1) += nodes_[n.in0].values[0] * g;
        break;
      case Op::AddRowVec: {
        if (nodes_[n.in0].requires_grad) grad_of(n.in0) += g;
        if (nodes_[n.in1].requires_grad) {
          auto gm = as_mat(g, n.shape);
          grad_of(n.in1) += gm.colwise().sum().transpose();
        }
        break;
      }
      case Op::MatMul: {
        const TapeNode& a = nodes_[n.in0];
        const TapeNode& b = nodes_[n.in1];
        auto gm = as_mat(g, n.shape);
        if (a.requires_grad) {
          auto ga = as_mat(grad_of(n.in0), a.shape);
          ga.noalias() += gm * as_mat(b.values, b.shape).transpose();
        }
        if (b.requires_grad) {
          auto gb = as_mat(grad_of(n.in1), b.shape);
          gb.noalias() += as_mat(a.values, a.shape).transpose() * gm;
        }
        break;
      }
      case Op::MatMulConstR: {
        const TapeNode& a = nodes_[n.in0];
        if (a.requires_grad) {
          auto gm = as_mat(g, n.shape);
          auto ga = as_mat(grad_of(n.in0), a.shape);
          ga.noalias() += gm * n.cmat->transpose();
        }
        break;
      }
      case Op::SpMatMul: {
        const TapeNode& x = nodes_[n.in0];
        if (x.requires_grad) {
          auto gm = as_mat(g, n.shape);
          auto gx = as_mat(grad_of(n.in0), x.shape);
          gx.noalias() += (*n.sparse) * gm;  // A symmetric
        }
        break;
      }
      case Op::TableMatVec: {
        const TapeNode& x = nodes_[n.in0];
        if (x.requires_grad) {
          auto gm = as_mat(g, n.shape);
          auto gx = as_mat(grad_of(n.in0), x.shape);
          const ElemTable& t = *n.table;
          for (int e = 0; e < (int)t.per_elem.size(); ++e)
            gx.row(e).transpose().noalias() += t.per_elem[e].transpose() * gm.row(e).transpose();
        }
        break;
      }
      case Op::Relu:
        if (nodes_[n.in0].requires_grad) {
          Vec& gx = grad_of(n.in0);
          const Vec& xv = nodes_[n.in0].values;
          for (int i = 0; i < xv.size(); ++i)
            if (xv[i] > 0.0) gx[i] += g[i];
        }
        break;
      case Op::Softplus:
        if (nodes_[n.in0].requires_grad) {
          Vec& gx = grad_of(n.in0);
          const Vec& xv = nodes_[n.in0].values;
          for (int i = 0; i < xv.size(); ++i)
            gx[i] += g[i] / (1.0 + std::exp(-xv[i]));
        }
        break;
      case Op::Sum:
        if (nodes_[n.in0].requires_grad)
          grad_of(n.in0).array() += g[0];
        break;
      case Op::L2Norm:
        if (nodes_[n.in0].requires_grad) {
          const double norm = n.values[0];
          if (norm > 0.0)  // gradient defined as zero at the origin
            grad_of(n.in0) += (g[0] / norm) * nodes_[n.in0].values;
        }
        break;
      case Op::Concat: {
        int off = 0;
        for (int pid : n.extra_inputs) {
          const TapeNode& p = nodes_[pid];
          const int sz = (int)p.values.size();
          if (p.requires_grad) grad_of(pid) += g.segment(off, sz);
          off += sz;
        }
        break;
      }
      case Op::Gather:
        if (nodes_[n.in0].requires_grad) {
          Vec& gx = grad_of(n.in0);
          for (std::size_t i = 0; i < n.indices.size(); ++i)
            gx[n.indices[i]] += g[(int)i];
        }
        break;
      case Op::ScatterAdd:
        if (nodes_[n.in0].requires_grad) {
          Vec& gx = grad_of(n.in0);
          for (std::size_t i = 0; i < n.indices.size(); ++i)
            gx[(int)i] += g[n.indices[i]];
        }
        break;
    }
  }
}

int ParamSet::add(std::string name, std::vector<int> shape, Vec init) {
  if (index_of(name) >= 0)
    throw std::invalid_argument("ParamSet: duplicate parameter '" + name + "'");
  if (shape_size(shape) != (int)init.size())
    throw std::invalid_argument("ParamSet: shape/value size mismatch for '" + name + "'");
  names_.push_back(std::move(name));
  shapes_.push_back(std::move(shape));
  m_.push_back(Vec::Zero(init.size()));
  v_.push_back(Vec::Zero(init.size()));
  values_.push_back(std::move(init));
  return (int)names_.size() - 1;
}

int ParamSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return (int)i;
  return -1;
}

std::vector<Tensor> ParamSet::make_leaves(Tape& tape) const {
  std::vector<Tensor> out;
  out.reserve(names_.size());
  for (std::size_t i = 0; i < names_.size(); ++i)
    out.push_back(tape.leaf(shapes_[i], values_[i]));
  return out;
}

void ParamSet::adam_step(std::span<const Tensor> leaves, const AdamConfig& cfg) {
  if ((int)leaves.size() != count())
    throw std::invalid_argument("adam_step: leaf count does not match parameter count");
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg.beta1, (double)step_);
  const double bc2 = 1.0 - std::pow(cfg.beta2, (double)step_);
  for (int i = 0; i < count(); ++i) {
    const TapeNode& n = leaves[i].tape()->node(leaves[i].id());
    Vec g = n.grad.size() ? n.grad : Vec::Zero(values_[i].size());
    if (!g.allFinite())
      throw std::runtime_error("adam_step: non-finite gradient for parameter '" + names_[i] + "'");
    m_[i] = cfg.beta1 * m_[i] + (1.0 - cfg.beta1) * g;
    v_[i] = cfg.beta2 * v_[i] + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    values_[i].array() -= cfg.lr * (m_[i].array() / bc1) /
                          ((v_[i].array() / bc2).sqrt() + cfg.eps);
  }
}

void ParamSet::zero_moments() {
  for (auto& m : m_) m.setZero();
  for (auto& v : v_) v.setZero();
  step_ = 0;
}

void ParamSet::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("ParamSet::save: cannot open " + path);
  out.precision(17);
  out << "ggn-params 1\n" << count() << "\n";
  for (int i = 0; i < count(); ++i) {
    out << names_[i] << " " << shapes_[i].size();
    for (int d : shapes_[i]) out << " " << d;
    out << "\n";
    for (int j = 0; j < values_[i].size(); ++j)
      out << values_[i][j] << (j + 1 == values_[i].size() ? "\n" : " ");
    if (values_[i].size() == 0) out << "\n";
  }
}

void ParamSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("ParamSet::load: cannot open " + path);
  std::string magic;
  int version = 0, count_in = 0;
  in >> magic >> version >> count_in;
  if (magic != "ggn-params" || version != 1)
    throw std::runtime_error("ParamSet::load: bad header in " + path);
  for (int i = 0; i < count_in; ++i) {
    std::string name;
    int rank = 0;
    in >> name >> rank;
    std::vector<int> shape(rank);
    for (int& d : shape) in >> d;
    Vec vals(shape_size(shape));
    for (int j = 0; j < vals.size(); ++j) in >> vals[j];
    const int at = index_of(name);
    if (at >= 0) {
      if (shapes_[at] != shape)
        throw std::runtime_error("ParamSet::load: shape mismatch for '" + name + "'");
      values_[at] = std::move(vals);
    } else {
      add(name, std::move(shape), std::move(vals));
    }
  }
  if (!in) throw std::runtime_error("ParamSet::load: truncated file " + path);
}

}  // namespace ggn
