#include <fairprompt/backbone.hpp>

namespace fairprompt::gnn {

EncoderParams init_encoder(Index d_in, const std::vector<Index>& hidden, Rng& rng) {
  if (hidden.empty()) throw ShapeError("init_encoder: at least one layer required");
  EncoderParams enc;
  Index prev = d_in;
  for (Index d : hidden) {
    enc.weights.push_back(xavier_uniform(prev, d, rng));
    prev = d;
  }
  return enc;
}

EdgeArrays make_edge_arrays(const graph::NormalizedAdjacency& adj) {
  EdgeArrays ea;
  ea.n = adj.n;
  ea.src = std::make_shared<const diff::IndexList>(adj.src);
  ea.dst = std::make_shared<const diff::IndexList>(adj.dst);
  ea.coeff = std::make_shared<const diff::CoeffList>(adj.coeff);
  ea.self_coeff = std::make_shared<const diff::CoeffList>(adj.self_coeff);
  return ea;
}

std::vector<diff::Tensor> encoder_leaves(diff::Tape& tape, const EncoderParams& enc) {
  std::vector<diff::Tensor> ws;
  for (const auto& w : enc.weights) ws.push_back(tape.input(w, !enc.frozen));
  return ws;
}

AmcTensors amc_leaves(diff::Tape& tape, const prompts::AmcParams& amc, bool requires_grad) {
  AmcTensors t;
  t.leaky_slope = amc.leaky_slope;
  for (std::size_t l = 0; l < amc.w1.size(); ++l) {
    t.w1.push_back(tape.input(amc.w1[l], requires_grad));
    t.w2.push_back(tape.input(amc.w2[l], requires_grad));
  }
  return t;
}

diff::Tensor aggregate(const EdgeArrays& ea, const diff::Tensor& h) {
  diff::Tensor self_part = diff::scale_rows(h, ea.self_coeff);
  diff::Tensor neigh = diff::scatter_add_scaled(diff::gather_rows(h, ea.src), ea.coeff, ea.dst, ea.n);
  return diff::add(self_part, neigh);
}

diff::Tensor aggregate_with_edge_prompts(const EdgeArrays& ea, const diff::Tensor& h,
                                         const diff::Tensor& edge_prompts) {
  if (edge_prompts.rows() != static_cast<Index>(ea.src->size()) || edge_prompts.cols() != h.cols())
    throw ShapeError("aggregate_with_edge_prompts: prompts " + shape_str(edge_prompts.value()) +
                     " vs " + std::to_string(ea.src->size()) + " directed edges of width " +
                     std::to_string(h.cols()));
  diff::Tensor self_part = diff::scale_rows(h, ea.self_coeff);
  diff::Tensor msgs = diff::add(diff::gather_rows(h, ea.src), edge_prompts);
  diff::Tensor neigh = diff::scatter_add_scaled(msgs, ea.coeff, ea.dst, ea.n);
  return diff::add(self_part, neigh);
}

namespace {

void check_chain(const diff::Tensor& x, const std::vector<diff::Tensor>& weights) {
  Index prev = x.cols();
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != prev)
      throw ShapeError("forward: layer " + std::to_string(l + 1) + " expects input dim " +
                       std::to_string(weights[l].rows()) + ", got " + std::to_string(prev));
    prev = weights[l].cols();
  }
}

}  // namespace

ForwardTrace forward_vanilla(const EdgeArrays& ea, const diff::Tensor& x,
                             const std::vector<diff::Tensor>& weights) {
  check_chain(x, weights);
  ForwardTrace trace;
  trace.prompted = false;
  trace.h.push_back(x);
  diff::Tensor h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    diff::Tensor z = diff::matmul(aggregate(ea, h), weights[l]);
    h = (l + 1 < weights.size()) ? diff::relu(z) : z;
    trace.h.push_back(h);
  }
  return trace;
}

ForwardTrace forward_prompted(const EdgeArrays& ea, const diff::Tensor& x_tilde,
                              const std::vector<diff::Tensor>& weights, const AmcTensors& amc) {
  check_chain(x_tilde, weights);
  if (amc.w1.size() != weights.size())
    throw ShapeError("forward_prompted: AMC has " + std::to_string(amc.w1.size()) + " layers, encoder " +
                     std::to_string(weights.size()));
  ForwardTrace trace;
  trace.prompted = true;
  trace.h.push_back(x_tilde);
  diff::Tensor h = x_tilde;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const Index d = h.cols();
    if (amc.w1[l].rows() != 2 * d || amc.w2[l].cols() != d)
      throw ShapeError("forward_prompted: AMC layer " + std::to_string(l + 1) + " shaped " +
                       shape_str(amc.w1[l].value()) + "/" + shape_str(amc.w2[l].value()) +
                       " does not match representation dim " + std::to_string(d));
    // e_ij = leaky([h_i || h_j] W1) W2 with i the receiver. Split W1 into its
    // receiver/sender halves so the pre-activations are formed per node and
    // only gathered per edge; the W2 product is taken after the scatter,
    // which is exact because both are linear.
    diff::Tensor w1_top = diff::slice_rows(amc.w1[l], 0, d);
    diff::Tensor w1_bot = diff::slice_rows(amc.w1[l], d, d);
    diff::Tensor p = diff::matmul(h, w1_top);
    diff::Tensor q = diff::matmul(h, w1_bot);
    diff::Tensor z = diff::leaky_relu(diff::gather_pair_sum(p, q, ea.dst, ea.src), amc.leaky_slope);
    diff::Tensor prompt_part = diff::matmul(diff::scatter_add_scaled(z, ea.coeff, ea.dst, ea.n), amc.w2[l]);
    diff::Tensor agg = diff::add(aggregate(ea, h), prompt_part);
    diff::Tensor out = diff::matmul(agg, weights[l]);
    h = (l + 1 < weights.size()) ? diff::relu(out) : out;
    trace.h.push_back(h);
  }
  return trace;
}

}  // namespace fairprompt::gnn
