#include <fairprompt/prompts.hpp>

namespace fairprompt::prompts {

AfrParams init_afr(Index d_x, Index d_u, AfrInit init, Rng& rng) {
  AfrParams p;
  p.u1 = xavier_uniform(d_x, d_u, rng);
  p.u2 = xavier_uniform(d_u, d_x, rng);
  if (init == AfrInit::open) p.u2 = 4.0 * p.u2.cwiseAbs();
  return p;
}

AmcParams init_amc(const std::vector<Index>& layer_input_dims, Index d_w, double leaky_slope, Rng& rng) {
  AmcParams p;
  p.leaky_slope = leaky_slope;
  for (Index d : layer_input_dims) {
    p.w1.push_back(xavier_uniform(2 * d, d_w, rng));
    p.w2.push_back(Matrix::Zero(d_w, d));
  }
  return p;
}

GpfParams init_gpf(Index d_x) { return {Matrix::Zero(1, d_x)}; }

diff::Tensor afr_gate(const diff::Tensor& x, const diff::Tensor& u1, const diff::Tensor& u2) {
  return diff::sigmoid(diff::matmul(diff::relu(diff::matmul(x, u1)), u2));
}

diff::Tensor afr_apply(const diff::Tensor& x, const diff::Tensor& m) {
  if (x.rows() != m.rows() || x.cols() != m.cols())
    throw ShapeError("afr_apply: gate shape " + shape_str(m.value()) + " vs features " +
                     shape_str(x.value()));
  return diff::hadamard(m, x);
}

diff::Tensor amc_prompt(const diff::Tensor& h_i, const diff::Tensor& h_j, const diff::Tensor& w1,
                        const diff::Tensor& w2, double leaky_slope) {
  if (h_i.cols() != h_j.cols())
    throw ShapeError("amc_prompt: endpoint dims differ (" + shape_str(h_i.value()) + " vs " +
                     shape_str(h_j.value()) + ")");
  if (w1.rows() != 2 * h_i.cols())
    throw ShapeError("amc_prompt: W1 expects input dim " + std::to_string(w1.rows()) + ", got " +
                     std::to_string(2 * h_i.cols()));
  return diff::matmul(diff::leaky_relu(diff::matmul(diff::concat_rows(h_i, h_j), w1), leaky_slope), w2);
}

diff::Tensor gpf_apply(const diff::Tensor& x, const diff::Tensor& p) {
  if (p.rows() != 1 || p.cols() != x.cols())
    throw ShapeError("gpf_apply: prompt shape " + shape_str(p.value()) + " vs features " +
                     shape_str(x.value()));
  return diff::add(x, p);
}

}  // namespace fairprompt::prompts
