#pragma once

#include <fairprompt/backbone.hpp>
#include <fairprompt/graph.hpp>
#include <fairprompt/metrics.hpp>
#include <fairprompt/prompts.hpp>

#include <optional>
#include <string>
#include <vector>

namespace fairprompt::train {

enum class TuneMode { adprompt, afr_only, amc_only, gpf, classifier_only, adversarial_only };
enum class AdversaryScope { all_nodes, train_nodes };

TuneMode parse_mode(const std::string& name);
std::string mode_name(TuneMode m);
AdversaryScope parse_scope(const std::string& name);

struct TuneConfig {
  TuneMode mode = TuneMode::adprompt;
  double lambda = 5.0;
  double lr = 0.001;
  int epochs = 300;
  std::uint64_t seed = 1;
  AdversaryScope adversary_scope = AdversaryScope::all_nodes;
  Index d_u = 64;
  Index d_w = 64;
  prompts::AfrInit afr_init = prompts::AfrInit::half;
  double leaky_slope = 0.01;
};

/// Linear head through a sigmoid: score = sigmoid(h w + b).
struct LinearHead {
  Matrix w;  // D_L x 1
  Matrix b;  // 1 x 1
};

using PredictorParams = LinearHead;
using AdversaryParams = LinearHead;

struct PromptState {
  TuneMode mode = TuneMode::adprompt;
  std::optional<prompts::AfrParams> afr;
  std::optional<prompts::AmcParams> amc;
  std::optional<prompts::GpfParams> gpf;
  PredictorParams predictor;
  std::optional<AdversaryParams> adversary;
};

struct EpochRow {
  int epoch = 0;
  double l_sup = 0.0;
  double l_adv = 0.0;
  double val_acc = 0.0;
  double val_dsp = 0.0;
};

struct TrainReport {
  std::vector<EpochRow> epochs;
  int best_epoch = 0;
  bool adversary_active = false;  // true when the adversarial term influences prompt updates
  metrics::MetricsRecord test_metrics;
  std::vector<double> layer_delta_untuned;  // vanilla frozen-encoder probe, all nodes
};

/// Mean BCE over the labeled set only.
diff::Tensor supervised_loss(diff::Tape& tape, const diff::Tensor& y_hat, const std::vector<int>& y,
                             const std::vector<Index>& labeled);

/// Mean BCE of sensitive-attribute predictions over the scope index set.
diff::Tensor adversarial_loss(diff::Tape& tape, const diff::Tensor& s_hat, const std::vector<int>& s,
                              const std::vector<Index>& scope);

/// Thresholded binary predictions; score >= threshold maps to class 1.
std::vector<int> predict(const Matrix& scores, double threshold = 0.5);

/// The joint minmax adaptation loop: prompts and predictor descend
/// L_Sup - lambda * L_Adv (predictor: L_Sup only) while the adversary
/// descends lambda * L_Adv, all from one shared forward pass per epoch.
/// Model selection: best validation accuracy, ties broken by lower val DSP.
std::pair<PromptState, TrainReport> tune_prompts(const graph::GraphDataset& g,
                                                 const graph::NormalizedAdjacency& adj,
                                                 const gnn::EncoderParams& enc, const TuneConfig& cfg);

/// Forward pass under a trained prompt state; returns per-layer values and
/// the predictor scores.
struct EvalOutput {
  std::vector<Matrix> layers;
  Matrix y_prob;  // n x 1
  Matrix s_prob;  // n x 1, zero-filled when no adversary exists
};
EvalOutput evaluate_state(const graph::GraphDataset& g, const graph::NormalizedAdjacency& adj,
                          const gnn::EncoderParams& enc, const PromptState& state);

std::string train_report_csv(const TrainReport& report);

std::uint64_t encoder_checksum(const gnn::EncoderParams& enc);

}  // namespace fairprompt::train
