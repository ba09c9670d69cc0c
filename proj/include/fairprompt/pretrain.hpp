#pragma once

#include <fairprompt/backbone.hpp>
#include <fairprompt/graph.hpp>

#include <string>
#include <vector>

namespace fairprompt::pretrain {

enum class Strategy { gae, dgi };

Strategy parse_strategy(const std::string& name);
std::string strategy_name(Strategy s);

struct PretrainConfig {
  Strategy strategy = Strategy::gae;
  int epochs = 300;
  double lr = 0.001;
  int negative_ratio = 1;  // GAE: negatives per positive edge
  std::uint64_t seed = 1;
  std::vector<Index> hidden = {128, 128};
  double ratio_train = 0.6;  // GAE: over edges; DGI: over nodes (monitoring)
  double ratio_val = 0.2;
  double ratio_test = 0.2;
};

struct PretrainOutcome {
  gnn::EncoderParams encoder;  // returned frozen
  Strategy strategy = Strategy::gae;
  std::vector<double> train_loss;  // per epoch
  double final_train_loss = 0.0;
  double final_val_loss = 0.0;
  Matrix dgi_bilinear;  // discriminator matrix (dgi only)
};

/// Inner-product edge reconstruction: BCE over sigmoid(z_u . z_v) with
/// positives from the training edge split and uniformly resampled non-edge
/// negatives each epoch. The encoder aggregates over the full graph.
PretrainOutcome pretrain_gae(const graph::GraphDataset& g, const graph::NormalizedAdjacency& adj,
                             const PretrainConfig& cfg);

/// InfoMax: corruption by row permutation of X, summary = sigmoid of the mean
/// embedding, bilinear discriminator scores, BCE with real=1 / corrupted=0
/// over the training node split.
PretrainOutcome pretrain_dgi(const graph::GraphDataset& g, const graph::NormalizedAdjacency& adj,
                             const PretrainConfig& cfg);

PretrainOutcome pretrain(const graph::GraphDataset& g, const graph::NormalizedAdjacency& adj,
                         const PretrainConfig& cfg);

}  // namespace fairprompt::pretrain
