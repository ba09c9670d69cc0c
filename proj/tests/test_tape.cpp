#include <doctest.h>

#include <fairprompt/tape.hpp>

#include "support/test_helpers.hpp"

#include <cmath>
#include <cstring>

using namespace fairprompt;
using namespace fairprompt::diff;
using fptest::finite_diff;
using fptest::max_rel_err;
using fptest::random_matrix;

namespace {

Matrix m2(std::initializer_list<std::initializer_list<double>> rows) {
  const Index r = static_cast<Index>(rows.size());
  const Index c = static_cast<Index>(rows.begin()->size());
  Matrix m(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace

TEST_SUITE("diffkit") {

TEST_CASE("matmul identity and dot product") {
  Tape tape;
  Tensor eye = tape.constant(m2({{1, 0}, {0, 1}}));
  Tensor v = tape.constant(m2({{3}, {4}}));
  CHECK(matmul(eye, v).value() == m2({{3}, {4}}));

  Tensor a = tape.constant(m2({{1, 2}}));
  Tensor b = tape.constant(m2({{3}, {4}}));
  CHECK(matmul(a, b).value()(0, 0) == doctest::Approx(11.0));
}

TEST_CASE("matmul shape error names both shapes") {
  Tape tape;
  Tensor a = tape.constant(Matrix::Zero(2, 3));
  Tensor b = tape.constant(Matrix::Zero(4, 2));
  try {
    matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
    CHECK(msg.find("4x2") != std::string::npos);
  }
}

TEST_CASE("matmul gradient matches central finite differences") {
  Rng rng(11);
  Matrix a0 = random_matrix(3, 4, rng);
  Matrix b0 = random_matrix(4, 2, rng);
  Tape tape;
  Tensor a = tape.input(a0, true);
  Tensor b = tape.input(b0, true);
  tape.backward(sum(matmul(a, b)));
  auto eval_a = [&](const Matrix& m) {
    Tape t2;
    return sum(matmul(t2.input(m), t2.input(b0))).value()(0, 0);
  };
  auto eval_b = [&](const Matrix& m) {
    Tape t2;
    return sum(matmul(t2.input(a0), t2.input(m))).value()(0, 0);
  };
  CHECK(max_rel_err(a.grad(), finite_diff(eval_a, a0)) < 1e-4);
  CHECK(max_rel_err(b.grad(), finite_diff(eval_b, b0)) < 1e-4);
}

TEST_CASE("elementwise basics") {
  Tape tape;
  CHECK(hadamard(tape.constant(m2({{0.5, 1.0}})), tape.constant(m2({{2, 4}}))).value() == m2({{1, 4}}));
  CHECK(sigmoid(tape.constant(m2({{0}}))).value()(0, 0) == doctest::Approx(0.5));

  Tensor x = tape.input(m2({{-3}}), true);
  Tensor r = relu(x);
  CHECK(r.value()(0, 0) == 0.0);
  tape.backward(sum(r));
  CHECK(x.grad()(0, 0) == 0.0);

  CHECK(leaky_relu(tape.constant(m2({{-2}})), 0.01).value()(0, 0) == doctest::Approx(-0.02));
  CHECK(neg(tape.constant(m2({{1.5}}))).value()(0, 0) == doctest::Approx(-1.5));
  CHECK_THROWS_AS(diff::log(tape.constant(m2({{-1}}))), DomainError);
  CHECK_THROWS_AS(add(tape.constant(Matrix::Zero(2, 2)), tape.constant(Matrix::Zero(3, 2))), ShapeError);
}

TEST_CASE("row broadcast add/sub/hadamard") {
  Tape tape;
  Matrix a0 = m2({{1, 2}, {3, 4}});
  Matrix b0 = m2({{10, 20}});
  CHECK(add(tape.constant(a0), tape.constant(b0)).value() == m2({{11, 22}, {13, 24}}));
  CHECK(sub(tape.constant(a0), tape.constant(b0)).value() == m2({{-9, -18}, {-7, -16}}));
  CHECK(hadamard(tape.constant(a0), tape.constant(b0)).value() == m2({{10, 40}, {30, 80}}));

  Tensor b = tape.input(b0, true);
  tape.backward(sum(add(tape.constant(a0), b)));
  CHECK(b.grad() == m2({{2, 2}}));
}

TEST_CASE("concat_rows basics and gradients") {
  Tape tape;
  Tensor a = tape.input(m2({{1, 2}}), true);
  Tensor b = tape.input(m2({{3}}), true);
  Tensor c = concat_rows(a, b);
  CHECK(c.value() == m2({{1, 2, 3}}));
  tape.backward(sum(c));
  CHECK(a.grad() == m2({{1, 1}}));
  CHECK(b.grad() == m2({{1}}));
  CHECK_THROWS_AS(concat_rows(tape.constant(Matrix::Zero(2, 1)), tape.constant(Matrix::Zero(3, 1))),
                  ShapeError);

  Rng rng(5);
  Matrix a0 = random_matrix(4, 3, rng);
  Matrix b0 = random_matrix(4, 2, rng);
  Tape t;
  Tensor ta = t.input(a0, true);
  Tensor tb = t.input(b0, true);
  Tensor cc = concat_rows(ta, tb);
  t.backward(sum(hadamard(cc, cc)));
  auto eval = [&](const Matrix& m) {
    Tape t2;
    Tensor c2 = concat_rows(t2.input(m), t2.input(b0));
    return sum(hadamard(c2, c2)).value()(0, 0);
  };
  CHECK(max_rel_err(ta.grad(), finite_diff(eval, a0)) < 1e-4);
}

TEST_CASE("bce loss values") {
  Tape tape;
  CHECK(bce_loss(tape.constant(m2({{0.5}})), tape.constant(m2({{1}}))).value()(0, 0) ==
        doctest::Approx(std::log(2.0)));
  // binary p == t collapses to ~0 after clipping
  CHECK(bce_loss(tape.constant(m2({{1}, {0}})), tape.constant(m2({{1}, {0}}))).value()(0, 0) ==
        doctest::Approx(0.0).epsilon(1e-6));
  // hand arithmetic: p=[0.9,0.1], t=[1,0]
  const double expected = -(std::log(0.9) + std::log(1.0 - 0.1)) / 2.0;
  CHECK(bce_loss(tape.constant(m2({{0.9}, {0.1}})), tape.constant(m2({{1}, {0}}))).value()(0, 0) ==
        doctest::Approx(expected));
  CHECK(expected == doctest::Approx(0.1053605).epsilon(1e-5));

  CHECK_THROWS_AS(bce_loss(tape.constant(m2({{0.5}})), tape.constant(m2({{1}})), diff::IndexList{}),
                  ShapeError);

  Tensor p = tape.constant(m2({{0.5}, {0.9}}));
  Tensor t = tape.constant(m2({{1}, {1}}));
  CHECK(bce_loss(p, t, diff::IndexList{0}).value()(0, 0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("backward basics") {
  Tape tape;
  Tensor w = tape.input(Matrix::Ones(2, 2), true);
  tape.backward(sum(w));
  CHECK(w.grad() == Matrix::Ones(2, 2));

  // frozen leaves accumulate nothing
  Tensor frozen = tape.input(Matrix::Ones(2, 2), false);
  Tensor l2 = sum(hadamard(w, frozen));
  tape.backward(l2);
  CHECK(frozen.grad() == Matrix::Zero(2, 2));

  // unreachable requires_grad leaves hold zero
  Tensor stray = tape.input(Matrix::Ones(2, 2), true);
  tape.backward(l2);
  CHECK(stray.grad() == Matrix::Zero(2, 2));

  CHECK_THROWS_AS(tape.backward(w), ShapeError);
}

TEST_CASE("backward is repeatable on one recorded forward") {
  Rng rng(3);
  Tape tape;
  Tensor a = tape.input(random_matrix(3, 3, rng), true);
  Tensor loss = sum(sigmoid(matmul(a, a)));
  tape.backward(loss);
  Matrix first = a.grad();
  tape.backward(loss);
  CHECK(fptest::bitwise_equal(first, a.grad()));
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  Matrix w = m2({{1.0, -2.0}});
  Matrix w0 = w;
  AdamState st;
  adam_step(w, Matrix::Zero(1, 2), st, 0.1);
  adam_step(w, Matrix::Zero(1, 2), st, 0.1);
  CHECK(w == w0);
}

TEST_CASE("adam: first step moves by -lr*sign(grad)") {
  Matrix w = m2({{1.0, 1.0}});
  AdamState st;
  adam_step(w, m2({{0.3, -4.0}}), st, 0.01);
  CHECK(w(0, 0) == doctest::Approx(1.0 - 0.01).epsilon(1e-5));
  CHECK(w(0, 1) == doctest::Approx(1.0 + 0.01).epsilon(1e-5));
}

TEST_CASE("adam: 100 steps on w^2 converge from w=1") {
  Matrix w = m2({{1.0}});
  AdamState st;
  for (int i = 0; i < 100; ++i) adam_step(w, m2({{2.0 * w(0, 0)}}), st, 0.1);
  CHECK(std::abs(w(0, 0)) < 1e-2);
}

TEST_CASE("adam: shape mismatch rejected") {
  Matrix w = Matrix::Zero(2, 2);
  AdamState st;
  CHECK_THROWS_AS(adam_step(w, Matrix::Zero(1, 2), st, 0.1), ShapeError);
}

// Property: analytic gradients match central finite differences across ops.
TEST_CASE("gradient property check across all ops") {
  Rng rng(42);
  auto check_unary = [&](auto make_op, int trials, bool positive, bool kink) {
    for (int t = 0; t < trials; ++t) {
      const Index r = 1 + static_cast<Index>(uniform_index(rng, 4));
      const Index c = 1 + static_cast<Index>(uniform_index(rng, 4));
      Matrix x0 = random_matrix(r, c, rng);
      if (positive) x0 = (x0.cwiseAbs().array() + 0.1).matrix();
      if (kink) x0 = fptest::nudge_from_zero(x0);
      Tape tape;
      Tensor x = tape.input(x0, true);
      tape.backward(sum(make_op(x)));
      auto eval = [&](const Matrix& m) {
        Tape t2;
        return sum(make_op(t2.input(m))).value()(0, 0);
      };
      REQUIRE(max_rel_err(x.grad(), finite_diff(eval, x0)) < 1e-4);
    }
  };
  check_unary([](Tensor x) { return relu(x); }, 50, false, true);
  check_unary([](Tensor x) { return leaky_relu(x, 0.2); }, 50, false, true);
  check_unary([](Tensor x) { return sigmoid(x); }, 50, false, false);
  check_unary([](Tensor x) { return diff::log(x); }, 50, true, false);
  check_unary([](Tensor x) { return neg(x); }, 50, false, false);
  check_unary([](Tensor x) { return transpose(sigmoid(x)); }, 25, false, false);
  check_unary([](Tensor x) { return row_sum(hadamard(x, x)); }, 25, false, false);
  check_unary([](Tensor x) { return mean_rows(hadamard(x, x)); }, 25, false, false);
  check_unary([](Tensor x) { return slice_rows(hadamard(x, x), 0, std::max<Index>(1, x.rows() - 1)); }, 25,
              false, false);

  // binary ops, equal shapes and row broadcast
  for (int t = 0; t < 50; ++t) {
    const Index r = 2 + static_cast<Index>(uniform_index(rng, 3));
    const Index c = 1 + static_cast<Index>(uniform_index(rng, 4));
    const bool bcast = t % 2 == 0;
    Matrix a0 = random_matrix(r, c, rng);
    Matrix b0 = random_matrix(bcast ? 1 : r, c, rng);
    const int kind = t % 3;
    auto apply = [&](Tensor a, Tensor b) {
      return kind == 0 ? add(a, b) : kind == 1 ? sub(a, b) : hadamard(a, b);
    };
    Tape tape;
    Tensor a = tape.input(a0, true);
    Tensor b = tape.input(b0, true);
    tape.backward(sum(sigmoid(apply(a, b))));
    auto eval_a = [&](const Matrix& m) {
      Tape t2;
      return sum(sigmoid(apply(t2.input(m), t2.input(b0)))).value()(0, 0);
    };
    auto eval_b = [&](const Matrix& m) {
      Tape t2;
      return sum(sigmoid(apply(t2.input(a0), t2.input(m)))).value()(0, 0);
    };
    REQUIRE(max_rel_err(a.grad(), finite_diff(eval_a, a0)) < 1e-4);
    REQUIRE(max_rel_err(b.grad(), finite_diff(eval_b, b0)) < 1e-4);
  }

  // index ops chained: gather -> scatter -> gather_pair_sum with scale_rows
  for (int t = 0; t < 25; ++t) {
    const Index r = 3 + static_cast<Index>(uniform_index(rng, 3));
    const Index c = 2 + static_cast<Index>(uniform_index(rng, 3));
    const Index k = 4 + static_cast<Index>(uniform_index(rng, 4));
    auto idx = std::make_shared<diff::IndexList>();
    auto idx2 = std::make_shared<diff::IndexList>();
    auto coeff = std::make_shared<diff::CoeffList>();
    for (Index i = 0; i < k; ++i) {
      idx->push_back(static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(r))));
      idx2->push_back(static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(r))));
      coeff->push_back(uniform_real(rng, -1.5, 1.5));
    }
    auto row_coeff = std::make_shared<diff::CoeffList>();
    for (Index i = 0; i < r; ++i) row_coeff->push_back(uniform_real(rng, -1.5, 1.5));
    Matrix x0 = random_matrix(r, c, rng);
    auto build = [&](Tensor x) {
      Tensor g1 = gather_rows(x, idx);
      Tensor g2 = scatter_add_scaled(g1, coeff, idx2, r);
      Tensor g3 = gather_pair_sum(g2, scale_rows(x, row_coeff), idx, idx2);
      return sum(sigmoid(g3));
    };
    Tape tape;
    Tensor x = tape.input(x0, true);
    tape.backward(build(x));
    auto eval = [&](const Matrix& m) {
      Tape t2;
      return build(t2.input(m)).value()(0, 0);
    };
    REQUIRE(max_rel_err(x.grad(), finite_diff(eval, x0)) < 1e-4);
  }

  // bce with mask, p kept away from the clip boundaries
  for (int t = 0; t < 50; ++t) {
    const Index r = 2 + static_cast<Index>(uniform_index(rng, 5));
    Matrix p0 = random_matrix(r, 1, rng, 0.05, 0.95);
    Matrix tgt(r, 1);
    for (Index i = 0; i < r; ++i) tgt(i, 0) = uniform_index(rng, 2) ? 1.0 : 0.0;
    diff::IndexList mask;
    for (Index i = 0; i < r; ++i)
      if (uniform_index(rng, 2)) mask.push_back(i);
    if (mask.empty()) mask.push_back(0);
    Tape tape;
    Tensor p = tape.input(p0, true);
    tape.backward(bce_loss(p, tape.constant(tgt), mask));
    auto eval = [&](const Matrix& m) {
      Tape t2;
      return bce_loss(t2.input(m), t2.constant(tgt), mask).value()(0, 0);
    };
    REQUIRE(max_rel_err(p.grad(), finite_diff(eval, p0)) < 1e-4);
  }
}

TEST_CASE("determinism: identical inputs give bit-identical results") {
  auto run = [] {
    Rng rng(99);
    Tape tape;
    Tensor a = tape.input(random_matrix(5, 4, rng), true);
    Tensor b = tape.input(random_matrix(4, 3, rng), true);
    Tensor out = sigmoid(matmul(relu(a), b));
    tape.backward(sum(out));
    return std::make_pair(Matrix(out.value()), Matrix(a.grad()));
  };
  auto [v1, g1] = run();
  auto [v2, g2] = run();
  CHECK(fptest::bitwise_equal(v1, v2));
  CHECK(fptest::bitwise_equal(g1, g2));
}

}  // TEST_SUITE
