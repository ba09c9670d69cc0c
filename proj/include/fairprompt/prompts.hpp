#pragma once

#include <fairprompt/tape.hpp>
#include <fairprompt/types.hpp>

#include <vector>

namespace fairprompt::prompts {

enum class AfrInit { half, open };

/// Attribute projector: gates m = sigmoid(relu(x U1) U2), no bias terms.
struct AfrParams {
  Matrix u1;  // D_x x D_u
  Matrix u2;  // D_u x D_x
};

/// Per-layer structure projector: e = leaky_relu([h_i || h_j] W1) W2, no bias.
struct AmcParams {
  std::vector<Matrix> w1;  // layer l: 2*D_{l-1} x D_w
  std::vector<Matrix> w2;  // layer l: D_w x D_{l-1}
  double leaky_slope = 0.01;
};

/// Single shared additive feature-space prompt.
struct GpfParams {
  Matrix p;  // 1 x D_x
};

/// `half` starts gates near 0.5 (Xavier U1, U2); `open` biases gates towards 1
/// by giving U2 positive entries only.
AfrParams init_afr(Index d_x, Index d_u, AfrInit init, Rng& rng);

/// W1 Xavier, W2 zero: the prompted forward starts as an exact no-op.
AmcParams init_amc(const std::vector<Index>& layer_input_dims, Index d_w, double leaky_slope, Rng& rng);

GpfParams init_gpf(Index d_x);

/// Gate matrix M = sigmoid(relu(X U1) U2), one row per node.
diff::Tensor afr_gate(const diff::Tensor& x, const diff::Tensor& u1, const diff::Tensor& u2);

/// Prompted features: M elementwise X.
diff::Tensor afr_apply(const diff::Tensor& x, const diff::Tensor& m);

/// Edge prompts for row-aligned endpoint batches (receiver rows h_i, sender
/// rows h_j): e = leaky_relu([h_i || h_j] W1) W2.
diff::Tensor amc_prompt(const diff::Tensor& h_i, const diff::Tensor& h_j, const diff::Tensor& w1,
                        const diff::Tensor& w2, double leaky_slope);

/// X + 1 p^T: one shared vector added to every row.
diff::Tensor gpf_apply(const diff::Tensor& x, const diff::Tensor& p);

}  // namespace fairprompt::prompts
