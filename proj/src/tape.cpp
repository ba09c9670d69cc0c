#include <fairprompt/tape.hpp>

#include <cmath>

namespace fairprompt::diff {

namespace {

constexpr double kBceClip = 1e-7;

Tape* require_same_tape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.valid() || !b.valid()) throw ShapeError(std::string(op) + ": operand not bound to a tape");
  if (a.tape() != b.tape()) throw ShapeError(std::string(op) + ": operands recorded on different tapes");
  return a.tape();
}

Tape* require_tape(const Tensor& a, const char* op) {
  if (!a.valid()) throw ShapeError(std::string(op) + ": operand not bound to a tape");
  return a.tape();
}

// Equal shapes, or b a 1xC row broadcast over the rows of a.
bool binary_broadcast(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return false;
  if (b.rows() == 1 && b.cols() == a.cols() && a.rows() > 1) return true;
  throw ShapeError(std::string(op) + ": shape mismatch (" + shape_str(a) + " vs " + shape_str(b) + ")");
}

void check_index_list(const IndexList& idx, Index bound, const char* op) {
  for (Index i : idx) {
    if (i < 0 || i >= bound)
      throw ShapeError(std::string(op) + ": index " + std::to_string(i) + " out of range [0," +
                       std::to_string(bound) + ")");
  }
}

Tensor unary(detail::OpKind kind, const Tensor& a, Matrix value, double slope = 0.0) {
  detail::Node n;
  n.kind = kind;
  n.value = std::move(value);
  n.parent_a = a.id();
  n.slope = slope;
  n.requires_grad = a.requires_grad();
  return a.tape()->adopt(std::move(n));
}

Tensor binary_elementwise(detail::OpKind kind, const char* name, const Tensor& a, const Tensor& b) {
  Tape* t = require_same_tape(a, b, name);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  const bool bcast = binary_broadcast(av, bv, name);
  detail::Node n;
  n.kind = kind;
  n.broadcast_b = bcast;
  n.parent_a = a.id();
  n.parent_b = b.id();
  n.requires_grad = a.requires_grad() || b.requires_grad();
  switch (kind) {
    case detail::OpKind::Add:
      n.value = bcast ? Matrix(av.array().rowwise() + bv.row(0).array()) : Matrix(av + bv);
      break;
    case detail::OpKind::Sub:
      n.value = bcast ? Matrix(av.array().rowwise() - bv.row(0).array()) : Matrix(av - bv);
      break;
    case detail::OpKind::Hadamard:
      n.value = bcast ? Matrix(av.array().rowwise() * bv.row(0).array()) : Matrix(av.array() * bv.array());
      break;
    default:
      throw ShapeError("internal: not an elementwise kind");
  }
  return t->adopt(std::move(n));
}

}  // namespace

Tensor Tape::adopt(detail::Node node) {
  nodes_.push_back(std::move(node));
  return Tensor(this, static_cast<int>(nodes_.size()) - 1);
}

Tensor Tape::input(Matrix value, bool requires_grad) {
  detail::Node n;
  n.value = std::move(value);
  n.kind = detail::OpKind::Leaf;
  n.requires_grad = requires_grad;
  return adopt(std::move(n));
}

// -- op constructors ----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tape* t = require_same_tape(a, b, "matmul");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows())
    throw ShapeError("matmul: inner dimensions differ (" + shape_str(av) + " vs " + shape_str(bv) + ")");
  detail::Node n;
  n.kind = detail::OpKind::MatMul;
  n.value = av * bv;
  n.parent_a = a.id();
  n.parent_b = b.id();
  n.requires_grad = a.requires_grad() || b.requires_grad();
  return t->adopt(std::move(n));
}

Tensor add(const Tensor& a, const Tensor& b) { return binary_elementwise(detail::OpKind::Add, "add", a, b); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary_elementwise(detail::OpKind::Sub, "sub", a, b); }
Tensor hadamard(const Tensor& a, const Tensor& b) {
  return binary_elementwise(detail::OpKind::Hadamard, "hadamard", a, b);
}

Tensor relu(const Tensor& a) {
  require_tape(a, "relu");
  return unary(detail::OpKind::Relu, a, a.value().cwiseMax(0.0));
}

Tensor leaky_relu(const Tensor& a, double slope) {
  require_tape(a, "leaky_relu");
  const Matrix& av = a.value();
  Matrix out = av.cwiseMax(0.0) + slope * av.cwiseMin(0.0);
  return unary(detail::OpKind::LeakyRelu, a, std::move(out), slope);
}

Tensor sigmoid(const Tensor& a) {
  require_tape(a, "sigmoid");
  Matrix out = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return unary(detail::OpKind::Sigmoid, a, std::move(out));
}

Tensor log(const Tensor& a) {
  require_tape(a, "log");
  const Matrix& av = a.value();
  if ((av.array() <= 0.0).any()) throw DomainError("log: non-positive entry");
  return unary(detail::OpKind::Log, a, av.array().log().matrix());
}

Tensor neg(const Tensor& a) {
  require_tape(a, "neg");
  return unary(detail::OpKind::Neg, a, -a.value());
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
  Tape* t = require_same_tape(a, b, "concat_rows");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != bv.rows())
    throw ShapeError("concat_rows: row counts differ (" + shape_str(av) + " vs " + shape_str(bv) + ")");
  Matrix out(av.rows(), av.cols() + bv.cols());
  out.leftCols(av.cols()) = av;
  out.rightCols(bv.cols()) = bv;
  detail::Node n;
  n.kind = detail::OpKind::ConcatRows;
  n.value = std::move(out);
  n.parent_a = a.id();
  n.parent_b = b.id();
  n.requires_grad = a.requires_grad() || b.requires_grad();
  return t->adopt(std::move(n));
}

Tensor transpose(const Tensor& a) {
  require_tape(a, "transpose");
  return unary(detail::OpKind::Transpose, a, a.value().transpose());
}

Tensor sum(const Tensor& a) {
  require_tape(a, "sum");
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return unary(detail::OpKind::Sum, a, std::move(out));
}

Tensor row_sum(const Tensor& a) {
  require_tape(a, "row_sum");
  Matrix out = a.value().rowwise().sum();
  return unary(detail::OpKind::RowSum, a, std::move(out));
}

Tensor mean_rows(const Tensor& a) {
  require_tape(a, "mean_rows");
  if (a.rows() == 0) throw ShapeError("mean_rows: empty input");
  Matrix out = a.value().colwise().mean();
  return unary(detail::OpKind::MeanRows, a, std::move(out));
}

Tensor gather_rows(const Tensor& a, IndexListPtr idx) {
  Tape* t = require_tape(a, "gather_rows");
  const Matrix& av = a.value();
  check_index_list(*idx, av.rows(), "gather_rows");
  Matrix out(static_cast<Index>(idx->size()), av.cols());
  for (std::size_t r = 0; r < idx->size(); ++r) out.row(static_cast<Index>(r)) = av.row((*idx)[r]);
  detail::Node n;
  n.kind = detail::OpKind::GatherRows;
  n.value = std::move(out);
  n.parent_a = a.id();
  n.idx_a = std::move(idx);
  n.requires_grad = a.requires_grad();
  return t->adopt(std::move(n));
}

Tensor scatter_add_scaled(const Tensor& a, CoeffListPtr coeff, IndexListPtr dst, Index out_rows) {
  Tape* t = require_tape(a, "scatter_add_scaled");
  const Matrix& av = a.value();
  if (static_cast<Index>(coeff->size()) != av.rows() || static_cast<Index>(dst->size()) != av.rows())
    throw ShapeError("scatter_add_scaled: coeff/dst length " + std::to_string(coeff->size()) + "/" +
                     std::to_string(dst->size()) + " vs " + std::to_string(av.rows()) + " rows");
  check_index_list(*dst, out_rows, "scatter_add_scaled");
  Matrix out = Matrix::Zero(out_rows, av.cols());
  for (Index r = 0; r < av.rows(); ++r)
    out.row((*dst)[static_cast<std::size_t>(r)]) += (*coeff)[static_cast<std::size_t>(r)] * av.row(r);
  detail::Node n;
  n.kind = detail::OpKind::ScatterAddScaled;
  n.value = std::move(out);
  n.parent_a = a.id();
  n.idx_a = std::move(dst);
  n.coeff = std::move(coeff);
  n.requires_grad = a.requires_grad();
  return t->adopt(std::move(n));
}

Tensor gather_pair_sum(const Tensor& p, const Tensor& q, IndexListPtr ia, IndexListPtr ib) {
  Tape* t = require_same_tape(p, q, "gather_pair_sum");
  const Matrix& pv = p.value();
  const Matrix& qv = q.value();
  if (pv.cols() != qv.cols())
    throw ShapeError("gather_pair_sum: column counts differ (" + shape_str(pv) + " vs " + shape_str(qv) + ")");
  if (ia->size() != ib->size()) throw ShapeError("gather_pair_sum: index lists differ in length");
  check_index_list(*ia, pv.rows(), "gather_pair_sum");
  check_index_list(*ib, qv.rows(), "gather_pair_sum");
  Matrix out(static_cast<Index>(ia->size()), pv.cols());
  for (std::size_t r = 0; r < ia->size(); ++r)
    out.row(static_cast<Index>(r)) = pv.row((*ia)[r]) + qv.row((*ib)[r]);
  detail::Node n;
  n.kind = detail::OpKind::GatherPairSum;
  n.value = std::move(out);
  n.parent_a = p.id();
  n.parent_b = q.id();
  n.idx_a = std::move(ia);
  n.idx_b = std::move(ib);
  n.requires_grad = p.requires_grad() || q.requires_grad();
  return t->adopt(std::move(n));
}

Tensor scale_rows(const Tensor& a, CoeffListPtr coeff) {
  Tape* t = require_tape(a, "scale_rows");
  const Matrix& av = a.value();
  if (static_cast<Index>(coeff->size()) != av.rows())
    throw ShapeError("scale_rows: coeff length " + std::to_string(coeff->size()) + " vs " +
                     std::to_string(av.rows()) + " rows");
  Matrix out(av.rows(), av.cols());
  for (Index r = 0; r < av.rows(); ++r) out.row(r) = (*coeff)[static_cast<std::size_t>(r)] * av.row(r);
  detail::Node n;
  n.kind = detail::OpKind::ScaleRows;
  n.value = std::move(out);
  n.parent_a = a.id();
  n.coeff = std::move(coeff);
  n.requires_grad = a.requires_grad();
  return t->adopt(std::move(n));
}

Tensor slice_rows(const Tensor& a, Index start, Index len) {
  Tape* t = require_tape(a, "slice_rows");
  const Matrix& av = a.value();
  if (start < 0 || len < 0 || start + len > av.rows())
    throw ShapeError("slice_rows: range [" + std::to_string(start) + "," + std::to_string(start + len) +
                     ") outside " + shape_str(av));
  detail::Node n;
  n.kind = detail::OpKind::SliceRows;
  n.value = av.middleRows(start, len);
  n.parent_a = a.id();
  n.slice_start = start;
  n.slice_len = len;
  n.requires_grad = a.requires_grad();
  return t->adopt(std::move(n));
}

Tensor bce_loss(const Tensor& p, const Tensor& target, const std::optional<IndexList>& mask) {
  Tape* t = require_same_tape(p, target, "bce_loss");
  const Matrix& pv = p.value();
  const Matrix& tv = target.value();
  if (pv.rows() != tv.rows() || pv.cols() != tv.cols())
    throw ShapeError("bce_loss: shape mismatch (" + shape_str(pv) + " vs " + shape_str(tv) + ")");
  IndexListPtr mask_ptr;
  Index n_rows = pv.rows();
  if (mask.has_value()) {
    if (mask->empty()) throw ShapeError("bce_loss: empty mask");
    check_index_list(*mask, pv.rows(), "bce_loss");
    mask_ptr = std::make_shared<const IndexList>(*mask);
    n_rows = static_cast<Index>(mask->size());
  } else if (pv.rows() == 0) {
    throw ShapeError("bce_loss: empty input");
  }
  const double denom = static_cast<double>(n_rows * pv.cols());
  double acc = 0.0;
  auto row_term = [&](Index i) {
    for (Index j = 0; j < pv.cols(); ++j) {
      const double ph = std::min(std::max(pv(i, j), kBceClip), 1.0 - kBceClip);
      const double tt = tv(i, j);
      acc -= tt * std::log(ph) + (1.0 - tt) * std::log(1.0 - ph);
    }
  };
  if (mask_ptr) {
    for (Index i : *mask_ptr) row_term(i);
  } else {
    for (Index i = 0; i < pv.rows(); ++i) row_term(i);
  }
  Matrix out(1, 1);
  out(0, 0) = acc / denom;
  detail::Node n;
  n.kind = detail::OpKind::Bce;
  n.value = std::move(out);
  n.parent_a = p.id();
  n.aux = std::make_shared<const Matrix>(tv);
  n.mask = mask_ptr;
  n.requires_grad = p.requires_grad();
  return t->adopt(std::move(n));
}

// -- backward -----------------------------------------------------------------

void Tape::backward(const Tensor& root) {
  if (!root.valid() || root.tape() != this) throw ShapeError("backward: root not on this tape");
  const detail::Node& r = node(root.id());
  if (r.value.rows() != 1 || r.value.cols() != 1)
    throw ShapeError("backward: root must be scalar, got " + shape_str(r.value));
  for (auto& n : nodes_) {
    n.grad.setZero(n.value.rows(), n.value.cols());
  }
  node(root.id()).grad(0, 0) = 1.0;
  for (int id = root.id(); id >= 0; --id) {
    if (node(id).requires_grad && node(id).kind != detail::OpKind::Leaf) backward_step(id);
  }
}

void Tape::backward_step(int id) {
  detail::Node& n = node(id);
  const Matrix& g = n.grad;
  auto wants = [&](int pid) { return pid >= 0 && node(pid).requires_grad; };
  switch (n.kind) {
    case detail::OpKind::Leaf:
      break;
    case detail::OpKind::MatMul: {
      if (wants(n.parent_a)) node(n.parent_a).grad.noalias() += g * node(n.parent_b).value.transpose();
      if (wants(n.parent_b)) node(n.parent_b).grad.noalias() += node(n.parent_a).value.transpose() * g;
      break;
    }
    case detail::OpKind::Add: {
      if (wants(n.parent_a)) node(n.parent_a).grad += g;
      if (wants(n.parent_b)) {
        if (n.broadcast_b)
          node(n.parent_b).grad += g.colwise().sum();
        else
          node(n.parent_b).grad += g;
      }
      break;
    }
    case detail::OpKind::Sub: {
      if (wants(n.parent_a)) node(n.parent_a).grad += g;
      if (wants(n.parent_b)) {
        if (n.broadcast_b)
          node(n.parent_b).grad -= g.colwise().sum();
        else
          node(n.parent_b).grad -= g;
      }
      break;
    }
    case detail::OpKind::Hadamard: {
      const Matrix& av = node(n.parent_a).value;
      const Matrix& bv = node(n.parent_b).value;
      if (n.broadcast_b) {
        if (wants(n.parent_a)) node(n.parent_a).grad.array() += g.array().rowwise() * bv.row(0).array();
        if (wants(n.parent_b)) node(n.parent_b).grad += (g.array() * av.array()).colwise().sum().matrix();
      } else {
        if (wants(n.parent_a)) node(n.parent_a).grad.array() += g.array() * bv.array();
        if (wants(n.parent_b)) node(n.parent_b).grad.array() += g.array() * av.array();
      }
      break;
    }
    case detail::OpKind::Relu: {
      if (wants(n.parent_a)) {
        const Matrix& x = node(n.parent_a).value;
        node(n.parent_a).grad.array() += g.array() * (x.array() > 0.0).cast<double>();
      }
      break;
    }
    case detail::OpKind::LeakyRelu: {
      if (wants(n.parent_a)) {
        const Matrix& x = node(n.parent_a).value;
        node(n.parent_a).grad.array() +=
            g.array() * ((x.array() > 0.0).cast<double>() * (1.0 - n.slope) + n.slope);
      }
      break;
    }
    case detail::OpKind::Sigmoid: {
      if (wants(n.parent_a)) {
        node(n.parent_a).grad.array() += g.array() * n.value.array() * (1.0 - n.value.array());
      }
      break;
    }
    case detail::OpKind::Log: {
      if (wants(n.parent_a)) node(n.parent_a).grad.array() += g.array() / node(n.parent_a).value.array();
      break;
    }
    case detail::OpKind::Neg: {
      if (wants(n.parent_a)) node(n.parent_a).grad -= g;
      break;
    }
    case detail::OpKind::ConcatRows: {
      const Index ca = node(n.parent_a).value.cols();
      const Index cb = node(n.parent_b).value.cols();
      if (wants(n.parent_a)) node(n.parent_a).grad += g.leftCols(ca);
      if (wants(n.parent_b)) node(n.parent_b).grad += g.rightCols(cb);
      break;
    }
    case detail::OpKind::Transpose: {
      if (wants(n.parent_a)) node(n.parent_a).grad += g.transpose();
      break;
    }
    case detail::OpKind::Sum: {
      if (wants(n.parent_a)) node(n.parent_a).grad.array() += g(0, 0);
      break;
    }
    case detail::OpKind::RowSum: {
      if (wants(n.parent_a)) node(n.parent_a).grad.array().colwise() += g.col(0).array();
      break;
    }
    case detail::OpKind::MeanRows: {
      if (wants(n.parent_a)) {
        const double inv = 1.0 / static_cast<double>(node(n.parent_a).value.rows());
        node(n.parent_a).grad.array().rowwise() += inv * g.row(0).array();
      }
      break;
    }
    case detail::OpKind::GatherRows: {
      if (wants(n.parent_a)) {
        Matrix& pg = node(n.parent_a).grad;
        for (std::size_t r = 0; r < n.idx_a->size(); ++r)
          pg.row((*n.idx_a)[r]) += g.row(static_cast<Index>(r));
      }
      break;
    }
    case detail::OpKind::ScatterAddScaled: {
      if (wants(n.parent_a)) {
        Matrix& pg = node(n.parent_a).grad;
        for (Index r = 0; r < pg.rows(); ++r)
          pg.row(r) += (*n.coeff)[static_cast<std::size_t>(r)] * g.row((*n.idx_a)[static_cast<std::size_t>(r)]);
      }
      break;
    }
    case detail::OpKind::GatherPairSum: {
      if (wants(n.parent_a)) {
        Matrix& pg = node(n.parent_a).grad;
        for (std::size_t r = 0; r < n.idx_a->size(); ++r)
          pg.row((*n.idx_a)[r]) += g.row(static_cast<Index>(r));
      }
      if (wants(n.parent_b)) {
        Matrix& qg = node(n.parent_b).grad;
        for (std::size_t r = 0; r < n.idx_b->size(); ++r)
          qg.row((*n.idx_b)[r]) += g.row(static_cast<Index>(r));
      }
      break;
    }
    case detail::OpKind::ScaleRows: {
      if (wants(n.parent_a)) {
        Matrix& pg = node(n.parent_a).grad;
        for (Index r = 0; r < pg.rows(); ++r) pg.row(r) += (*n.coeff)[static_cast<std::size_t>(r)] * g.row(r);
      }
      break;
    }
    case detail::OpKind::SliceRows: {
      if (wants(n.parent_a)) node(n.parent_a).grad.middleRows(n.slice_start, n.slice_len) += g;
      break;
    }
    case detail::OpKind::Bce: {
      if (wants(n.parent_a)) {
        const Matrix& pv = node(n.parent_a).value;
        const Matrix& tv = *n.aux;
        Matrix& pg = node(n.parent_a).grad;
        const Index n_rows = n.mask ? static_cast<Index>(n.mask->size()) : pv.rows();
        const double scale = g(0, 0) / static_cast<double>(n_rows * pv.cols());
        auto add_row = [&](Index i) {
          for (Index j = 0; j < pv.cols(); ++j) {
            const double raw = pv(i, j);
            if (raw < kBceClip || raw > 1.0 - kBceClip) continue;  // clamped region: zero slope
            pg(i, j) += scale * (-tv(i, j) / raw + (1.0 - tv(i, j)) / (1.0 - raw));
          }
        };
        if (n.mask) {
          for (Index i : *n.mask) add_row(i);
        } else {
          for (Index i = 0; i < pv.rows(); ++i) add_row(i);
        }
      }
      break;
    }
  }
}

void adam_step(Matrix& param, const Matrix& grad, AdamState& state, double lr) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols())
    throw ShapeError("adam_step: grad shape " + shape_str(grad) + " vs param " + shape_str(param));
  if (state.m.size() == 0) {
    state.m.setZero(param.rows(), param.cols());
    state.v.setZero(param.rows(), param.cols());
  } else if (state.m.rows() != param.rows() || state.m.cols() != param.cols()) {
    throw ShapeError("adam_step: state shape " + shape_str(state.m) + " vs param " + shape_str(param));
  }
  state.step += 1;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  param.array() -= lr * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + state.eps);
}

}  // namespace fairprompt::diff
