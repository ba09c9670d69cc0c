#pragma once

#include <fairprompt/types.hpp>

#include <memory>
#include <optional>
#include <vector>

namespace fairprompt::diff {

class Tape;
class Tensor;

using IndexList = std::vector<Index>;
using IndexListPtr = std::shared_ptr<const IndexList>;
using CoeffList = std::vector<double>;
using CoeffListPtr = std::shared_ptr<const CoeffList>;

namespace detail {

enum class OpKind : std::uint8_t {
  Leaf,
  MatMul,
  Add,
  Sub,
  Hadamard,
  Relu,
  LeakyRelu,
  Sigmoid,
  Log,
  Neg,
  ConcatRows,
  Transpose,
  Sum,
  RowSum,
  MeanRows,
  GatherRows,
  ScatterAddScaled,
  GatherPairSum,
  ScaleRows,
  SliceRows,
  Bce,
};

struct Node {
  Matrix value;
  Matrix grad;
  OpKind kind = OpKind::Leaf;
  bool requires_grad = false;
  int parent_a = -1;
  int parent_b = -1;
  bool broadcast_b = false;  // binary elementwise: b is a 1xC row applied to every row of a
  double slope = 0.0;        // leaky_relu
  Index slice_start = 0;     // slice_rows
  Index slice_len = 0;
  IndexListPtr idx_a;
  IndexListPtr idx_b;
  CoeffListPtr coeff;
  std::shared_ptr<const Matrix> aux;  // bce target
  IndexListPtr mask;                  // bce row mask (null = all rows)
};

}  // namespace detail

/// Handle to one node of a Tape. Cheap to copy; invalidated by Tape::reset().
class Tensor {
 public:
  Tensor() = default;

  Index rows() const;
  Index cols() const;
  const Matrix& value() const;
  /// Gradient of the last backward() root w.r.t. this node. Zero-filled for
  /// nodes the root does not reach.
  const Matrix& grad() const;
  bool requires_grad() const;
  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }

 private:
  friend class Tape;
  Tensor(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Define-by-run tape. Nodes are appended in topological order; backward()
/// walks them once in reverse. Rebuilt (reset) for every forward pass.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Record a leaf holding `value`. Gradients accumulate into it only when
  /// requires_grad is set.
  Tensor input(Matrix value, bool requires_grad = false);
  /// Leaf shorthand for non-differentiable data.
  Tensor constant(Matrix value) { return input(std::move(value), false); }

  /// Reverse pass from a scalar (1x1) root. Grads of all nodes are reset
  /// first, so repeated calls are independent and yield identical results.
  void backward(const Tensor& root);

  /// Drop all nodes. Outstanding Tensor handles become invalid.
  void reset() { nodes_.clear(); }

  std::size_t size() const { return nodes_.size(); }

  /// Append a fully built node (op constructors only).
  Tensor adopt(detail::Node node);

 private:
  friend class Tensor;
  detail::Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const detail::Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  void backward_step(int id);

  std::vector<detail::Node> nodes_;
};

inline Index Tensor::rows() const { return tape_->node(id_).value.rows(); }
inline Index Tensor::cols() const { return tape_->node(id_).value.cols(); }
inline const Matrix& Tensor::value() const { return tape_->node(id_).value; }
inline const Matrix& Tensor::grad() const { return tape_->node(id_).grad; }
inline bool Tensor::requires_grad() const { return tape_->node(id_).requires_grad; }

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope = 0.01);
Tensor sigmoid(const Tensor& a);
Tensor log(const Tensor& a);
Tensor neg(const Tensor& a);
/// Per-row concatenation: rows stay aligned, columns append.
Tensor concat_rows(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor sum(const Tensor& a);
Tensor row_sum(const Tensor& a);
Tensor mean_rows(const Tensor& a);
Tensor gather_rows(const Tensor& a, IndexListPtr idx);
/// out[dst[r]] += coeff[r] * a[r] over an out_rows-tall zero matrix.
Tensor scatter_add_scaled(const Tensor& a, CoeffListPtr coeff, IndexListPtr dst, Index out_rows);
/// out[r] = p[ia[r]] + q[ib[r]].
Tensor gather_pair_sum(const Tensor& p, const Tensor& q, IndexListPtr ia, IndexListPtr ib);
Tensor scale_rows(const Tensor& a, CoeffListPtr coeff);
/// Contiguous row block a[start .. start+len).
Tensor slice_rows(const Tensor& a, Index start, Index len);
/// Mean binary cross-entropy of probabilities p against targets over the
/// masked rows (all rows when mask is absent). p is clamped to
/// [1e-7, 1-1e-7]; gradient flows to p only.
Tensor bce_loss(const Tensor& p, const Tensor& target, const std::optional<IndexList>& mask = std::nullopt);

/// Adam accumulators for one parameter matrix.
struct AdamState {
  Matrix m;
  Matrix v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update, in place.
void adam_step(Matrix& param, const Matrix& grad, AdamState& state, double lr);

/// Named parameter with its optimizer state; lives across tape rebuilds.
struct Parameter {
  std::string name;
  Matrix value;
  AdamState adam;
};

}  // namespace fairprompt::diff
