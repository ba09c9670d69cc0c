#pragma once

#include <fairprompt/types.hpp>

#include <array>
#include <string>
#include <vector>

namespace fairprompt::metrics {

/// Metric with an explicit undefined flag; an empty conditioning group makes
/// the metric undefined rather than zero.
struct MetricValue {
  double value = 0.0;
  bool defined = false;
};

struct MetricsRecord {
  MetricValue acc;
  MetricValue dsp;
  MetricValue deo;
  MetricValue dgsp;
  Index n_eval = 0;
  std::array<Index, 4> group_counts{};      // cells (s=0,y=0),(0,1),(1,0),(1,1) over the eval set
  std::vector<double> layer_delta;          // per-layer disparity, filled by the training pipeline
};

struct LayerDisparity {
  std::vector<double> delta;                // Delta^(0..L)
  std::vector<MetricValue> gamma_hat;       // per transition l-1 -> l
  std::vector<MetricValue> eps_hat;
};

/// Fraction of correct binary predictions over eval rows.
MetricValue accuracy(const std::vector<int>& y_pred, const std::vector<int>& y,
                     const std::vector<Index>& eval_set);

/// |P(yhat=1 | s=1) - P(yhat=1 | s=0)| over eval rows.
MetricValue delta_sp(const std::vector<int>& y_pred, const std::vector<int>& s,
                     const std::vector<Index>& eval_set);

/// |P(yhat=1 | y=1, s=1) - P(yhat=1 | y=1, s=0)| over eval rows.
MetricValue delta_eo(const std::vector<int>& y_pred, const std::vector<int>& y, const std::vector<int>& s,
                     const std::vector<Index>& eval_set);

/// l2 norm of the gap between group means of continuous predictions (rows of
/// `scores`); reduces to the absolute mean gap for a single column.
MetricValue delta_gsp(const Matrix& scores, const std::vector<int>& s, const std::vector<Index>& eval_set);

/// Per-layer group disparity of a forward trace, with fitted amplification
/// ratios. gamma_hat is capped at 10 near-degenerate denominators and flagged
/// undefined when Delta^(l-1) <= 1e-9.
LayerDisparity layer_disparity_probe(const std::vector<Matrix>& layers, const std::vector<int>& s);

std::array<Index, 4> group_cell_counts(const std::vector<int>& y, const std::vector<int>& s,
                                       const std::vector<Index>& eval_set);

/// One metrics.csv row: run_id,dataset,pretrain,mode,lambda,seed,acc,dsp,deo,dgsp.
/// Undefined metrics serialize as "nan".
std::string metrics_csv_row(const std::string& run_id, const std::string& dataset,
                            const std::string& pretrain, const std::string& mode, double lambda,
                            std::uint64_t seed, const MetricsRecord& rec);

inline const char* metrics_csv_header() { return "run_id,dataset,pretrain,mode,lambda,seed,acc,dsp,deo,dgsp"; }

}  // namespace fairprompt::metrics
