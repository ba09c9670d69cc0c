#include <doctest.h>

#include <fairprompt/fair_train.hpp>
#include <fairprompt/prompts.hpp>

#include "support/test_helpers.hpp"

using namespace fairprompt;
using namespace fairprompt::prompts;
using fptest::finite_diff;
using fptest::max_rel_err;
using fptest::random_matrix;

TEST_SUITE("prompts") {

TEST_CASE("afr_gate: zero projector and zero input both give 0.5 gates") {
  Rng rng(1);
  diff::Tape tape;
  Matrix x = random_matrix(4, 3, rng);
  diff::Tensor u1 = tape.constant(random_matrix(3, 5, rng));
  diff::Tensor u2_zero = tape.constant(Matrix::Zero(5, 3));
  Matrix m = afr_gate(tape.constant(x), u1, u2_zero).value();
  CHECK((m.array() - 0.5).abs().maxCoeff() == 0.0);

  diff::Tensor u2 = tape.constant(random_matrix(5, 3, rng));
  Matrix m2 = afr_gate(tape.constant(Matrix::Zero(2, 3)), u1, u2).value();
  CHECK((m2.array() - 0.5).abs().maxCoeff() == 0.0);
}

TEST_CASE("afr_gate gradients match finite differences") {
  Rng rng(2);
  Matrix x = random_matrix(4, 3, rng);
  Matrix u1_0 = random_matrix(3, 5, rng, -0.8, 0.8);
  Matrix u2_0 = random_matrix(5, 3, rng, -0.8, 0.8);
  diff::Tape tape;
  diff::Tensor u1 = tape.input(u1_0, true);
  diff::Tensor u2 = tape.input(u2_0, true);
  tape.backward(diff::sum(afr_gate(tape.constant(x), u1, u2)));
  auto eval1 = [&](const Matrix& m) {
    diff::Tape t2;
    return diff::sum(afr_gate(t2.constant(x), t2.input(m), t2.input(u2_0))).value()(0, 0);
  };
  auto eval2 = [&](const Matrix& m) {
    diff::Tape t2;
    return diff::sum(afr_gate(t2.constant(x), t2.input(u1_0), t2.input(m))).value()(0, 0);
  };
  CHECK(max_rel_err(u1.grad(), finite_diff(eval1, u1_0)) < 1e-4);
  CHECK(max_rel_err(u2.grad(), finite_diff(eval2, u2_0)) < 1e-4);
}

TEST_CASE("afr_apply basics") {
  diff::Tape tape;
  Matrix x(2, 2);
  x << 2, 3, -1, 4;
  CHECK(fptest::bitwise_equal(afr_apply(tape.constant(x), tape.constant(Matrix::Ones(2, 2))).value(), x));

  Matrix m(2, 2);
  m << 0.5, 1, 0.25, 0.5;
  Matrix expect(2, 2);
  expect << 1, 3, -0.25, 2;
  CHECK(afr_apply(tape.constant(x), tape.constant(m)).value() == expect);

  Matrix zero_row = x;
  zero_row.row(0).setZero();
  CHECK(afr_apply(tape.constant(zero_row), tape.constant(m)).value().row(0).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(afr_apply(tape.constant(x), tape.constant(Matrix::Ones(3, 2))), ShapeError);
}

TEST_CASE("gate range stays strictly inside (0,1) on bounded inputs") {
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    diff::Tape tape;
    AfrParams afr = init_afr(6, 8, AfrInit::half, rng);
    Matrix m = afr_gate(tape.constant(random_matrix(30, 6, rng)), tape.constant(afr.u1),
                        tape.constant(afr.u2))
                   .value();
    CHECK(m.minCoeff() > 1e-12);
    CHECK(m.maxCoeff() < 1.0 - 1e-12);
  }
}

TEST_CASE("afr_init open biases gates above one half") {
  Rng rng(9);
  AfrParams afr = init_afr(6, 8, AfrInit::open, rng);
  diff::Tape tape;
  Matrix m = afr_gate(tape.constant(random_matrix(50, 6, rng)), tape.constant(afr.u1),
                      tape.constant(afr.u2))
                 .value();
  CHECK(m.minCoeff() >= 0.5);
  CHECK(m.mean() > 0.6);
}

TEST_CASE("amc_prompt: zero W2 is a no-op, ordered concatenation is asymmetric") {
  Rng rng(3);
  diff::Tape tape;
  Matrix hi = random_matrix(1, 4, rng);
  Matrix hj = random_matrix(1, 4, rng);
  AmcParams amc = init_amc({4}, 6, 0.01, rng);  // W2 zero-initialized
  Matrix e = amc_prompt(tape.constant(hi), tape.constant(hj), tape.constant(amc.w1[0]),
                        tape.constant(amc.w2[0]), amc.leaky_slope)
                 .value();
  CHECK(e.cwiseAbs().maxCoeff() == 0.0);

  Matrix w2 = random_matrix(6, 4, rng);
  Matrix e_ij = amc_prompt(tape.constant(hi), tape.constant(hj), tape.constant(amc.w1[0]),
                           tape.constant(w2), 0.01)
                    .value();
  Matrix e_ji = amc_prompt(tape.constant(hj), tape.constant(hi), tape.constant(amc.w1[0]),
                           tape.constant(w2), 0.01)
                    .value();
  CHECK((e_ij - e_ji).cwiseAbs().maxCoeff() > 1e-8);
}

TEST_CASE("amc_prompt matches the direct formula") {
  Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    const Index d = 2 + static_cast<Index>(uniform_index(rng, 4));
    const Index dw = 3 + static_cast<Index>(uniform_index(rng, 4));
    const Index k = 1 + static_cast<Index>(uniform_index(rng, 5));
    Matrix hi = random_matrix(k, d, rng);
    Matrix hj = random_matrix(k, d, rng);
    Matrix w1 = random_matrix(2 * d, dw, rng);
    Matrix w2 = random_matrix(dw, d, rng);
    const double slope = 0.15;
    diff::Tape tape;
    Matrix got = amc_prompt(tape.constant(hi), tape.constant(hj), tape.constant(w1), tape.constant(w2),
                            slope)
                     .value();
    for (Index r = 0; r < k; ++r) {
      Matrix cat(1, 2 * d);
      cat << hi.row(r), hj.row(r);
      Matrix pre = cat * w1;
      Matrix act = pre.cwiseMax(0.0) + slope * pre.cwiseMin(0.0);
      Matrix expect = act * w2;
      REQUIRE((got.row(r) - expect.row(0)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("gpf_apply basics and prompt gradient") {
  diff::Tape tape;
  Matrix x(2, 2);
  x << 2, 3, 1, -1;
  CHECK(fptest::bitwise_equal(gpf_apply(tape.constant(x), tape.constant(Matrix::Zero(1, 2))).value(), x));

  Matrix p(1, 2);
  p << 1, 0;
  Matrix expect(2, 2);
  expect << 3, 3, 2, -1;
  CHECK(gpf_apply(tape.constant(x), tape.constant(p)).value() == expect);

  // gradient of p equals column sums of the upstream gradient
  Rng rng(5);
  Matrix g_up = random_matrix(4, 3, rng);
  Matrix x0 = random_matrix(4, 3, rng);
  Matrix p0 = random_matrix(1, 3, rng);
  diff::Tape t;
  diff::Tensor pt = t.input(p0, true);
  t.backward(diff::sum(diff::hadamard(gpf_apply(t.constant(x0), pt), t.constant(g_up))));
  CHECK((pt.grad() - g_up.colwise().sum()).cwiseAbs().maxCoeff() < 1e-12);
  auto eval = [&](const Matrix& m) {
    diff::Tape t2;
    return diff::sum(diff::hadamard(gpf_apply(t2.constant(x0), t2.input(m)), t2.constant(g_up)))
        .value()(0, 0);
  };
  CHECK(max_rel_err(pt.grad(), finite_diff(eval, p0)) < 1e-4);

  CHECK_THROWS_AS(gpf_apply(tape.constant(x), tape.constant(Matrix::Zero(1, 3))), ShapeError);
}

// Directional check of the gate behavior under adversarial tuning: on a
// synthetic graph with a known sensitive feature block, trained gates should
// sit lower on the sensitive block than on the label block.
TEST_CASE("trained gates suppress the sensitive feature block" * doctest::timeout(600)) {
  graph::SynthConfig sc;
  sc.n = 300;
  sc.p_in = 0.06;
  sc.p_out = 0.02;
  sc.d_label = 4;
  sc.d_sens = 4;
  sc.d_noise = 4;
  sc.mu_label = 0.4;
  sc.mu_sens = 1.5;
  sc.rho_ys = 0.6;

  double mean_gate_label = 0.0;
  double mean_gate_sens = 0.0;
  const int n_seeds = 5;
  for (int seed = 1; seed <= n_seeds; ++seed) {
    sc.seed = 100 + static_cast<std::uint64_t>(seed);
    graph::GraphDataset g = graph::gen_synthetic(sc);
    graph::standardize_features(g);
    graph::NormalizedAdjacency adj = graph::normalize_adjacency(g);
    Rng rng(static_cast<std::uint64_t>(seed));
    gnn::EncoderParams enc = gnn::init_encoder(g.num_features(), {16, 16}, rng);
    enc.frozen = true;
    g.splits = graph::sample_kshot(g, 30, static_cast<std::uint64_t>(seed));

    train::TuneConfig tc;
    tc.mode = train::TuneMode::afr_only;
    tc.lambda = 5.0;
    tc.lr = 0.01;
    tc.epochs = 200;
    tc.seed = static_cast<std::uint64_t>(seed);
    tc.d_u = 16;
    auto [state, report] = train::tune_prompts(g, adj, enc, tc);

    diff::Tape tape;
    Matrix gates = afr_gate(tape.constant(g.X), tape.constant(state.afr->u1),
                            tape.constant(state.afr->u2))
                       .value();
    mean_gate_label += gates.leftCols(sc.d_label).mean();
    mean_gate_sens += gates.middleCols(sc.d_label, sc.d_sens).mean();
  }
  mean_gate_label /= n_seeds;
  mean_gate_sens /= n_seeds;
  MESSAGE("mean gate label block: ", mean_gate_label, ", sensitive block: ", mean_gate_sens);
  CHECK(mean_gate_sens < mean_gate_label);
}

}  // TEST_SUITE
