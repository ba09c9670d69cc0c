#pragma once

#include <fairprompt/graph.hpp>
#include <fairprompt/tape.hpp>
#include <fairprompt/types.hpp>

#include <functional>
#include <vector>

namespace fptest {

using fairprompt::Index;
using fairprompt::Matrix;
using fairprompt::Rng;

inline Matrix random_matrix(Index rows, Index cols, Rng& rng, double lo = -2.0, double hi = 2.0) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = fairprompt::uniform_real(rng, lo, hi);
  return m;
}

/// Keep entries away from activation kinks so central differences are valid.
inline Matrix nudge_from_zero(Matrix m, double margin = 1e-2) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (std::abs(m(i, j)) < margin) m(i, j) = m(i, j) < 0 ? -margin : margin;
  return m;
}

/// Central finite differences of a scalar function at `at`.
inline Matrix finite_diff(const std::function<double(const Matrix&)>& f, Matrix at, double h = 1e-5) {
  Matrix g(at.rows(), at.cols());
  for (Index i = 0; i < at.rows(); ++i) {
    for (Index j = 0; j < at.cols(); ++j) {
      const double orig = at(i, j);
      at(i, j) = orig + h;
      const double up = f(at);
      at(i, j) = orig - h;
      const double down = f(at);
      at(i, j) = orig;
      g(i, j) = (up - down) / (2.0 * h);
    }
  }
  return g;
}

/// max over entries of |a - b| / max(1, |b|).
inline double max_rel_err(const Matrix& analytic, const Matrix& fd) {
  double worst = 0.0;
  for (Index i = 0; i < analytic.rows(); ++i)
    for (Index j = 0; j < analytic.cols(); ++j) {
      const double denom = std::max(1.0, std::abs(fd(i, j)));
      worst = std::max(worst, std::abs(analytic(i, j) - fd(i, j)) / denom);
    }
  return worst;
}

/// Dense materialization of the normalized adjacency, for brute-force oracles.
inline Matrix dense_adjacency(const fairprompt::graph::NormalizedAdjacency& adj) {
  Matrix a = Matrix::Zero(adj.n, adj.n);
  for (Index i = 0; i < adj.n; ++i)
    for (Index k = adj.offsets[static_cast<std::size_t>(i)]; k < adj.offsets[static_cast<std::size_t>(i) + 1];
         ++k)
      a(i, adj.cols[static_cast<std::size_t>(k)]) = adj.vals[static_cast<std::size_t>(k)];
  return a;
}

/// Small random undirected graph with random binary labels/sensitive bits.
inline fairprompt::graph::GraphDataset random_graph(Index n, Index d, double p, Rng& rng) {
  std::vector<std::pair<Index, Index>> edges;
  for (Index u = 0; u < n; ++u)
    for (Index v = u + 1; v < n; ++v)
      if (fairprompt::uniform_real(rng, 0.0, 1.0) < p) edges.emplace_back(u, v);
  std::vector<int> y, s;
  for (Index i = 0; i < n; ++i) {
    y.push_back(fairprompt::uniform_real(rng, 0.0, 1.0) < 0.5 ? 0 : 1);
    s.push_back(fairprompt::uniform_real(rng, 0.0, 1.0) < 0.5 ? 0 : 1);
  }
  return fairprompt::graph::make_dataset(n, std::move(edges), random_matrix(n, d, rng), std::move(y),
                                         std::move(s));
}

inline bool bitwise_equal(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace fptest
