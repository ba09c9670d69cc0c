#pragma once

#include <fairprompt/config.hpp>
#include <fairprompt/fair_train.hpp>
#include <fairprompt/graph.hpp>
#include <fairprompt/io.hpp>
#include <fairprompt/metrics.hpp>
#include <fairprompt/pretrain.hpp>

#include <string>
#include <vector>

namespace fairprompt::cli {

graph::SynthConfig synth_config_from(const config::RunConfig& cfg);
pretrain::PretrainConfig pretrain_config_from(const config::RunConfig& cfg);
train::TuneConfig tune_config_from(const config::RunConfig& cfg);

io::Checkpoint encoder_to_checkpoint(const gnn::EncoderParams& enc, const std::string& tag);
gnn::EncoderParams checkpoint_to_encoder(const io::Checkpoint& ckpt);
gnn::EncoderParams load_encoder(const std::string& path);

io::Checkpoint prompt_state_to_checkpoint(const train::PromptState& state, double lambda,
                                          std::uint64_t seed, int best_epoch);
train::PromptState checkpoint_to_prompt_state(const io::Checkpoint& ckpt);

/// Deterministic identifier: dataset, pretrain tag, mode, lambda, k, seed.
std::string make_run_id(const std::string& dataset, const std::string& pretrain_tag,
                        const std::string& mode, double lambda, Index k_shot, std::uint64_t seed);

struct TuneOutcome {
  std::string run_id;
  train::PromptState state;
  train::TrainReport report;
  std::string metrics_row;
};

/// One tuning run against an already loaded dataset/encoder; appends nothing.
TuneOutcome run_tune(const graph::GraphDataset& g_base, const graph::NormalizedAdjacency& adj,
                     const gnn::EncoderParams& enc, const std::string& encoder_tag,
                     const train::TuneConfig& tcfg, Index k_shot, const std::string& dataset_name);

struct AdaptReport {
  std::string scenario;  // default | nullify | none
  double initial_rel_error = 0.0;
  double final_rel_error = 0.0;
  int steps = 0;
};

/// Edge-deletion fitting probe: delete an edge, compute target embeddings on
/// the modified graph with the frozen encoder, then fit AMC prompts on the
/// original graph to reproduce them.
AdaptReport run_adapt_check(const config::RunConfig& cfg);

void cmd_gen_synth(const config::RunConfig& cfg);
void cmd_pretrain(const config::RunConfig& cfg);
void cmd_tune(const config::RunConfig& cfg);
void cmd_ablate(const config::RunConfig& cfg);
void cmd_sweep(const config::RunConfig& cfg);
void cmd_adapt_check(const config::RunConfig& cfg);

}  // namespace fairprompt::cli
