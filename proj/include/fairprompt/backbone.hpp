#pragma once

#include <fairprompt/graph.hpp>
#include <fairprompt/prompts.hpp>
#include <fairprompt/tape.hpp>

#include <vector>

namespace fairprompt::gnn {

/// GCN encoder weights. Once frozen, the leaf tensors created for the weights
/// never carry gradients.
struct EncoderParams {
  std::vector<Matrix> weights;  // W^(l): D_{l-1} x D_l
  bool frozen = false;

  Index layers() const { return static_cast<Index>(weights.size()); }
  Index input_dim() const { return weights.front().rows(); }
  Index output_dim() const { return weights.back().cols(); }
  /// D_{l-1} per layer; the dimensions AMC prompts live in.
  std::vector<Index> layer_input_dims() const {
    std::vector<Index> d;
    for (const auto& w : weights) d.push_back(w.rows());
    return d;
  }
};

EncoderParams init_encoder(Index d_in, const std::vector<Index>& hidden, Rng& rng);

/// Per-layer representations H^(0..L) as tape tensors.
struct ForwardTrace {
  std::vector<diff::Tensor> h;
  bool prompted = false;

  const diff::Tensor& output() const { return h.back(); }
  std::vector<Matrix> values() const {
    std::vector<Matrix> v;
    for (const auto& t : h) v.push_back(t.value());
    return v;
  }
};

/// Shared-pointer views of the adjacency index arrays, built once per run so
/// tape ops can hold them without copying.
struct EdgeArrays {
  Index n = 0;
  diff::IndexListPtr src;
  diff::IndexListPtr dst;
  diff::CoeffListPtr coeff;
  diff::CoeffListPtr self_coeff;
};

EdgeArrays make_edge_arrays(const graph::NormalizedAdjacency& adj);

/// Weight leaves for a forward pass; gradients flow only when the encoder is
/// not frozen.
std::vector<diff::Tensor> encoder_leaves(diff::Tape& tape, const EncoderParams& enc);

/// AMC parameter leaves (trainable by default).
struct AmcTensors {
  std::vector<diff::Tensor> w1;
  std::vector<diff::Tensor> w2;
  double leaky_slope = 0.01;
};

AmcTensors amc_leaves(diff::Tape& tape, const prompts::AmcParams& amc, bool requires_grad = true);

/// Edge-wise symmetric-normalized aggregation: self term plus coefficient-
/// scaled neighbor messages, scatter-added per destination.
diff::Tensor aggregate(const EdgeArrays& ea, const diff::Tensor& h);

/// Same aggregation with an explicit additive prompt per directed edge
/// (rows aligned with ea.src/ea.dst). The self-loop message is un-prompted.
diff::Tensor aggregate_with_edge_prompts(const EdgeArrays& ea, const diff::Tensor& h,
                                         const diff::Tensor& edge_prompts);

/// H^(l) = relu(aggregate(H^(l-1)) W^(l)) with a linear final layer.
ForwardTrace forward_vanilla(const EdgeArrays& ea, const diff::Tensor& x,
                             const std::vector<diff::Tensor>& weights);

/// Prompted forward: each neighbor message is h_j + e_ij with e_ij from the
/// structure projector (receiver first in the concatenation); the self loop
/// carries no prompt.
ForwardTrace forward_prompted(const EdgeArrays& ea, const diff::Tensor& x_tilde,
                              const std::vector<diff::Tensor>& weights, const AmcTensors& amc);

}  // namespace fairprompt::gnn
