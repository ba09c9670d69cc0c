#pragma once

#include <fairprompt/types.hpp>

#include <string>
#include <utility>
#include <vector>

namespace fairprompt::graph {

struct SplitMasks {
  std::vector<Index> train_labeled;
  std::vector<Index> val;
  std::vector<Index> test;
};

/// Undirected attributed graph with binary labels and sensitive attributes.
/// Immutable after construction; safe to share across readers.
struct GraphDataset {
  Index n = 0;
  std::vector<std::pair<Index, Index>> edges;  // u < v, sorted, deduplicated, no self loops
  std::vector<Index> adj_offsets;              // CSR over neighbors (no self loops)
  std::vector<Index> adj_cols;
  Matrix X;  // n x D_x
  std::vector<int> y;
  std::vector<int> s;
  std::vector<std::string> feature_names;
  bool standardized = false;
  SplitMasks splits;

  Index num_features() const { return X.cols(); }
  Index degree(Index v) const { return adj_offsets[v + 1] - adj_offsets[v]; }
};

/// Symmetric GCN normalization with self loops:
/// a_ij = 1/sqrt((d_i+1)(d_j+1)) for every stored pair including i == j.
/// Alongside the CSR view, the directed non-self entries are laid out as flat
/// src/dst/coeff arrays for edge-wise message passing.
struct NormalizedAdjacency {
  Index n = 0;
  std::vector<Index> offsets;  // CSR including self loops
  std::vector<Index> cols;
  std::vector<double> vals;
  std::vector<Index> src;         // per directed non-self edge, CSR order
  std::vector<Index> dst;
  std::vector<double> coeff;      // a_{dst,src}
  std::vector<double> self_coeff; // a_ii per node

  Index num_directed_edges() const { return static_cast<Index>(src.size()); }
};

struct SynthConfig {
  Index n = 2000;
  double p_in = 0.02;
  double p_out = 0.002;
  Index d_label = 8;
  Index d_sens = 8;
  Index d_noise = 8;
  double mu_label = 0.4;
  double mu_sens = 1.0;
  double rho_ys = 0.7;  // P(y == s); remaining mass is a fair coin
  std::uint64_t seed = 7;
};

struct HomophilyRow {
  int group = 0;
  double frac_same = 0.0;
  double frac_other = 0.0;
  Index nodes_counted = 0;  // nodes in the group with at least one neighbor
};

/// Assemble a dataset in memory: edges are symmetrized, deduplicated and
/// self loops dropped; the CSR is built. Features are taken as given.
GraphDataset make_dataset(Index n, std::vector<std::pair<Index, Index>> edges, Matrix x,
                          std::vector<int> y, std::vector<int> s);

/// Nodes CSV (`id,label,sensitive,f0..`) + edges TSV (`u\tv`). Edges are
/// symmetrized and deduplicated; self loops in the input are dropped.
/// Features are standardized per dimension unless `standardize` is false.
/// With drop_sensitive_cols, feature columns whose raw values equal the
/// sensitive column are removed.
GraphDataset load_dataset(const std::string& nodes_path, const std::string& edges_path,
                          bool standardize = true, bool drop_sensitive_cols = false);

/// Writes the nodes/edges files in the interchange format (raw feature values).
void write_dataset(const GraphDataset& g, const std::string& nodes_path, const std::string& edges_path);

/// Zero-mean unit-variance per feature column; constant columns are left
/// centered only.
void standardize_features(GraphDataset& g);

NormalizedAdjacency normalize_adjacency(const GraphDataset& g);

/// k labeled nodes per class drawn uniformly without replacement; remaining
/// nodes split 50/50 into val/test. Deterministic in the seed.
SplitMasks sample_kshot(const GraphDataset& g, Index k, std::uint64_t seed);

/// Two-block SBM keyed on the sensitive attribute, with label/sensitive/noise
/// Gaussian feature blocks. Returns raw (unstandardized) features.
GraphDataset gen_synthetic(const SynthConfig& cfg);

/// Per sensitive group: node-averaged fraction of same/other-group neighbors.
std::vector<HomophilyRow> homophily_stats(const GraphDataset& g);

std::string homophily_csv(const std::vector<HomophilyRow>& rows);

}  // namespace fairprompt::graph
