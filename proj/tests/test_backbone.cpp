#include <doctest.h>

#include <fairprompt/backbone.hpp>

#include "support/test_helpers.hpp"

using namespace fairprompt;
using namespace fairprompt::gnn;
using fairprompt::graph::GraphDataset;
using fairprompt::graph::NormalizedAdjacency;

namespace {

// Brute-force dense recomputation of the prompted forward, edge by edge.
std::vector<Matrix> dense_prompted_oracle(const GraphDataset& g, const NormalizedAdjacency& adj,
                                          const Matrix& x, const std::vector<Matrix>& weights,
                                          const prompts::AmcParams& amc) {
  std::vector<Matrix> layers;
  Matrix h = x;
  layers.push_back(h);
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Matrix agg = Matrix::Zero(g.n, h.cols());
    for (Index i = 0; i < g.n; ++i) agg.row(i) = adj.self_coeff[static_cast<std::size_t>(i)] * h.row(i);
    for (std::size_t e = 0; e < adj.src.size(); ++e) {
      const Index i = adj.dst[e];
      const Index j = adj.src[e];
      Matrix cat(1, 2 * h.cols());
      cat << h.row(i), h.row(j);
      Matrix pre = cat * amc.w1[l];
      Matrix act = pre.cwiseMax(0.0) + amc.leaky_slope * pre.cwiseMin(0.0);
      Matrix prompt = act * amc.w2[l];
      agg.row(i) += adj.coeff[e] * (h.row(j) + prompt.row(0));
    }
    Matrix z = agg * weights[l];
    h = (l + 1 < weights.size()) ? Matrix(z.cwiseMax(0.0)) : z;
    layers.push_back(h);
  }
  return layers;
}

}  // namespace

TEST_SUITE("gnn-backbone") {

TEST_CASE("vanilla forward: identity weights on an isolated node") {
  Matrix x(1, 2);
  x << -1.5, 2.0;
  GraphDataset g = graph::make_dataset(1, {}, x, {0}, {0});
  NormalizedAdjacency adj = graph::normalize_adjacency(g);
  EdgeArrays ea = make_edge_arrays(adj);

  diff::Tape tape;
  std::vector<diff::Tensor> ws = {tape.constant(Matrix::Identity(2, 2)),
                                  tape.constant(Matrix::Identity(2, 2))};
  ForwardTrace tr = forward_vanilla(ea, tape.constant(x), ws);
  Matrix relu_x = x.cwiseMax(0.0);
  CHECK((tr.h[1].value() - relu_x).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((tr.h[2].value() - relu_x).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("vanilla forward: zero features give zero embeddings") {
  Rng rng(2);
  GraphDataset g = fptest::random_graph(6, 3, 0.5, rng);
  g.X.setZero();
  NormalizedAdjacency adj = graph::normalize_adjacency(g);
  EdgeArrays ea = make_edge_arrays(adj);
  diff::Tape tape;
  EncoderParams enc = init_encoder(3, {4, 4}, rng);
  auto ws = encoder_leaves(tape, enc);
  ForwardTrace tr = forward_vanilla(ea, tape.constant(g.X), ws);
  CHECK(tr.output().value().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("vanilla forward matches a dense-matrix oracle on a path graph") {
  Rng rng(7);
  Matrix x = fptest::random_matrix(4, 3, rng);
  GraphDataset g = graph::make_dataset(4, {{0, 1}, {1, 2}, {2, 3}}, x, {0, 1, 0, 1}, {0, 0, 1, 1});
  NormalizedAdjacency adj = graph::normalize_adjacency(g);
  EdgeArrays ea = make_edge_arrays(adj);
  EncoderParams enc = init_encoder(3, {5, 2}, rng);

  diff::Tape tape;
  auto ws = encoder_leaves(tape, enc);
  ForwardTrace tr = forward_vanilla(ea, tape.constant(x), ws);

  Matrix a = fptest::dense_adjacency(adj);
  Matrix h1 = (a * x * enc.weights[0]).cwiseMax(0.0);
  Matrix h2 = a * h1 * enc.weights[1];
  CHECK((tr.h[1].value() - h1).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((tr.h[2].value() - h2).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("zero AMC output matches vanilla forward exactly") {
  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    GraphDataset g = fptest::random_graph(8, 4, 0.4, rng);
    NormalizedAdjacency adj = graph::normalize_adjacency(g);
    EdgeArrays ea = make_edge_arrays(adj);
    EncoderParams enc = init_encoder(4, {6, 3}, rng);
    prompts::AmcParams amc = prompts::init_amc(enc.layer_input_dims(), 5, 0.01, rng);  // W2 = 0

    diff::Tape tape;
    auto ws = encoder_leaves(tape, enc);
    AmcTensors amct = amc_leaves(tape, amc);
    Matrix vanilla = forward_vanilla(ea, tape.constant(g.X), ws).output().value();
    Matrix prompted = forward_prompted(ea, tape.constant(g.X), ws, amct).output().value();
    CHECK((vanilla - prompted).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("a prompt of -h_j nullifies exactly one neighbor message") {
  Rng rng(23);
  GraphDataset g = fptest::random_graph(5, 3, 0.7, rng);
  REQUIRE(g.edges.size() >= 2);
  NormalizedAdjacency adj = graph::normalize_adjacency(g);
  EdgeArrays ea = make_edge_arrays(adj);

  diff::Tape tape;
  diff::Tensor h = tape.constant(g.X);
  // explicit prompts: zero everywhere except e = -h_src on directed edge 0
  Matrix prompts_mat = Matrix::Zero(static_cast<Index>(adj.src.size()), g.X.cols());
  prompts_mat.row(0) = -g.X.row(adj.src[0]);
  diff::Tensor agg = aggregate_with_edge_prompts(ea, h, tape.constant(prompts_mat));

  // oracle: drop that directed edge entirely, keep all coefficients
  Matrix expected = Matrix::Zero(g.n, g.X.cols());
  for (Index i = 0; i < g.n; ++i) expected.row(i) = adj.self_coeff[static_cast<std::size_t>(i)] * g.X.row(i);
  for (std::size_t e = 1; e < adj.src.size(); ++e)
    expected.row(adj.dst[e]) += adj.coeff[e] * g.X.row(adj.src[e]);
  CHECK((agg.value() - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("prompted forward matches a brute-force per-edge oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    GraphDataset g = fptest::random_graph(5, 3, 0.6, rng);
    NormalizedAdjacency adj = graph::normalize_adjacency(g);
    EdgeArrays ea = make_edge_arrays(adj);
    EncoderParams enc = init_encoder(3, {4, 3}, rng);
    prompts::AmcParams amc = prompts::init_amc(enc.layer_input_dims(), 6, 0.2, rng);
    for (auto& w2 : amc.w2) w2 = fptest::random_matrix(w2.rows(), w2.cols(), rng, -0.5, 0.5);

    diff::Tape tape;
    auto ws = encoder_leaves(tape, enc);
    AmcTensors amct = amc_leaves(tape, amc);
    ForwardTrace tr = forward_prompted(ea, tape.constant(g.X), ws, amct);
    auto oracle = dense_prompted_oracle(g, adj, g.X, enc.weights, amc);
    for (std::size_t l = 0; l < tr.h.size(); ++l)
      CHECK((tr.h[l].value() - oracle[l]).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("vanilla forward is permutation equivariant") {
  Rng rng(41);
  GraphDataset g = fptest::random_graph(7, 3, 0.5, rng);
  EncoderParams enc = init_encoder(3, {5, 4}, rng);

  std::vector<Index> perm(static_cast<std::size_t>(g.n));
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<Index>(i);
  shuffle_indices(perm, rng);  // perm[new] = old

  Matrix xp(g.n, g.X.cols());
  std::vector<Index> inv(static_cast<std::size_t>(g.n));
  for (Index nw = 0; nw < g.n; ++nw) {
    xp.row(nw) = g.X.row(perm[static_cast<std::size_t>(nw)]);
    inv[static_cast<std::size_t>(perm[static_cast<std::size_t>(nw)])] = nw;
  }
  std::vector<std::pair<Index, Index>> pedges;
  for (auto [u, v] : g.edges)
    pedges.emplace_back(inv[static_cast<std::size_t>(u)], inv[static_cast<std::size_t>(v)]);
  GraphDataset gp = graph::make_dataset(g.n, pedges, xp, g.y, g.s);

  diff::Tape tape;
  auto ws = encoder_leaves(tape, enc);
  Matrix out = forward_vanilla(make_edge_arrays(graph::normalize_adjacency(g)), tape.constant(g.X), ws)
                   .output()
                   .value();
  Matrix outp = forward_vanilla(make_edge_arrays(graph::normalize_adjacency(gp)), tape.constant(xp), ws)
                    .output()
                    .value();
  for (Index nw = 0; nw < g.n; ++nw)
    CHECK((outp.row(nw) - out.row(perm[static_cast<std::size_t>(nw)])).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gradients reach prompt parameters but never frozen weights") {
  Rng rng(53);
  GraphDataset g = fptest::random_graph(6, 3, 0.6, rng);
  NormalizedAdjacency adj = graph::normalize_adjacency(g);
  EdgeArrays ea = make_edge_arrays(adj);
  EncoderParams enc = init_encoder(3, {4, 3}, rng);
  enc.frozen = true;
  prompts::AmcParams amc = prompts::init_amc(enc.layer_input_dims(), 5, 0.01, rng);
  for (auto& w2 : amc.w2) w2 = fptest::random_matrix(w2.rows(), w2.cols(), rng, -0.5, 0.5);

  diff::Tape tape;
  auto ws = encoder_leaves(tape, enc);
  AmcTensors amct = amc_leaves(tape, amc);
  ForwardTrace tr = forward_prompted(ea, tape.constant(g.X), ws, amct);
  tape.backward(diff::sum(diff::sigmoid(tr.output())));
  for (const auto& w : ws) CHECK(w.grad().cwiseAbs().maxCoeff() == 0.0);
  bool any_amc = false;
  for (const auto& t : amct.w1) any_amc = any_amc || t.grad().cwiseAbs().maxCoeff() > 0.0;
  for (const auto& t : amct.w2) any_amc = any_amc || t.grad().cwiseAbs().maxCoeff() > 0.0;
  CHECK(any_amc);
}

TEST_CASE("dimension mismatches are rejected with explicit shapes") {
  Rng rng(3);
  GraphDataset g = fptest::random_graph(4, 3, 0.5, rng);
  EdgeArrays ea = make_edge_arrays(graph::normalize_adjacency(g));
  diff::Tape tape;
  std::vector<diff::Tensor> ws = {tape.constant(Matrix::Zero(5, 4))};  // expects 5 input dims, X has 3
  CHECK_THROWS_AS(forward_vanilla(ea, tape.constant(g.X), ws), ShapeError);
}

}  // TEST_SUITE
