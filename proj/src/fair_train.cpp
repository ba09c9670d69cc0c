#include <fairprompt/fair_train.hpp>

#include <cmath>
#include <limits>
#include <sstream>

namespace fairprompt::train {

TuneMode parse_mode(const std::string& name) {
  if (name == "adprompt") return TuneMode::adprompt;
  if (name == "afr_only") return TuneMode::afr_only;
  if (name == "amc_only") return TuneMode::amc_only;
  if (name == "gpf") return TuneMode::gpf;
  if (name == "classifier_only") return TuneMode::classifier_only;
  if (name == "adversarial_only") return TuneMode::adversarial_only;
  throw UsageError("unknown tune mode '" + name +
                   "' (supported: adprompt, afr_only, amc_only, gpf, classifier_only, adversarial_only)");
}

std::string mode_name(TuneMode m) {
  switch (m) {
    case TuneMode::adprompt: return "adprompt";
    case TuneMode::afr_only: return "afr_only";
    case TuneMode::amc_only: return "amc_only";
    case TuneMode::gpf: return "gpf";
    case TuneMode::classifier_only: return "classifier_only";
    case TuneMode::adversarial_only: return "adversarial_only";
  }
  return "?";
}

AdversaryScope parse_scope(const std::string& name) {
  if (name == "all_nodes") return AdversaryScope::all_nodes;
  if (name == "train_nodes") return AdversaryScope::train_nodes;
  throw UsageError("unknown adversary scope '" + name + "' (supported: all_nodes, train_nodes)");
}

diff::Tensor supervised_loss(diff::Tape& tape, const diff::Tensor& y_hat, const std::vector<int>& y,
                             const std::vector<Index>& labeled) {
  if (labeled.empty()) throw ShapeError("supervised_loss: empty labeled set");
  Matrix target(y_hat.rows(), 1);
  for (Index i = 0; i < y_hat.rows(); ++i) target(i, 0) = static_cast<double>(y[static_cast<std::size_t>(i)]);
  return diff::bce_loss(y_hat, tape.constant(std::move(target)), labeled);
}

diff::Tensor adversarial_loss(diff::Tape& tape, const diff::Tensor& s_hat, const std::vector<int>& s,
                              const std::vector<Index>& scope) {
  if (scope.empty()) throw ShapeError("adversarial_loss: empty scope");
  Matrix target(s_hat.rows(), 1);
  for (Index i = 0; i < s_hat.rows(); ++i) target(i, 0) = static_cast<double>(s[static_cast<std::size_t>(i)]);
  return diff::bce_loss(s_hat, tape.constant(std::move(target)), scope);
}

std::vector<int> predict(const Matrix& scores, double threshold) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Index i = 0; i < scores.rows(); ++i) out[static_cast<std::size_t>(i)] = scores(i, 0) >= threshold ? 1 : 0;
  return out;
}

namespace {

struct ModeFlags {
  bool afr = false;
  bool amc = false;
  bool gpf = false;
  bool adversary = false;
};

ModeFlags flags_for(TuneMode m) {
  ModeFlags f;
  f.afr = (m == TuneMode::adprompt || m == TuneMode::afr_only);
  f.amc = (m == TuneMode::adprompt || m == TuneMode::amc_only);
  f.gpf = (m == TuneMode::gpf);
  f.adversary = (m == TuneMode::adprompt || m == TuneMode::afr_only || m == TuneMode::amc_only ||
                 m == TuneMode::adversarial_only);
  return f;
}

enum class Group { prompt, predictor, adversary };

struct Slot {
  std::string name;
  Matrix* value = nullptr;
  Group group = Group::prompt;
  diff::AdamState adam;
};

// Trainable matrices in canonical leaf order for the given mode.
std::vector<const Matrix*> state_values(const PromptState& st, const ModeFlags& f) {
  std::vector<const Matrix*> vals;
  if (f.afr) {
    vals.push_back(&st.afr->u1);
    vals.push_back(&st.afr->u2);
  } else if (f.gpf) {
    vals.push_back(&st.gpf->p);
  }
  if (f.amc) {
    for (std::size_t l = 0; l < st.amc->w1.size(); ++l) {
      vals.push_back(&st.amc->w1[l]);
      vals.push_back(&st.amc->w2[l]);
    }
  }
  vals.push_back(&st.predictor.w);
  vals.push_back(&st.predictor.b);
  if (f.adversary) {
    vals.push_back(&st.adversary->w);
    vals.push_back(&st.adversary->b);
  }
  return vals;
}

// Forward pass artifacts for one epoch; leaves align with state_values order.
struct Pass {
  std::vector<diff::Tensor> leaves;
  gnn::ForwardTrace trace;
  diff::Tensor y_prob;
  diff::Tensor s_prob;  // invalid when no adversary
};

Pass build_forward(diff::Tape& tape, const graph::GraphDataset& g, const gnn::EdgeArrays& ea,
                   const gnn::EncoderParams& enc, const PromptState& st, const ModeFlags& f,
                   const std::vector<const Matrix*>& values, bool with_grads) {
  Pass pass;
  for (const Matrix* v : values) pass.leaves.push_back(tape.input(*v, with_grads));
  std::size_t next = 0;
  auto take = [&]() { return pass.leaves[next++]; };

  diff::Tensor x = tape.constant(g.X);
  std::vector<diff::Tensor> ws = gnn::encoder_leaves(tape, enc);

  diff::Tensor features = x;
  if (f.afr) {
    diff::Tensor u1 = take();
    diff::Tensor u2 = take();
    features = prompts::afr_apply(x, prompts::afr_gate(x, u1, u2));
  } else if (f.gpf) {
    features = prompts::gpf_apply(x, take());
  }

  if (f.amc) {
    gnn::AmcTensors amc;
    amc.leaky_slope = st.amc->leaky_slope;
    for (std::size_t l = 0; l < st.amc->w1.size(); ++l) {
      amc.w1.push_back(take());
      amc.w2.push_back(take());
    }
    pass.trace = gnn::forward_prompted(ea, features, ws, amc);
  } else {
    pass.trace = gnn::forward_vanilla(ea, features, ws);
  }

  diff::Tensor h = pass.trace.output();
  {
    diff::Tensor w = take();
    diff::Tensor b = take();
    pass.y_prob = diff::sigmoid(diff::add(diff::matmul(h, w), b));
  }
  if (f.adversary) {
    diff::Tensor w = take();
    diff::Tensor b = take();
    pass.s_prob = diff::sigmoid(diff::add(diff::matmul(h, w), b));
  }
  return pass;
}

PromptState init_state(const graph::GraphDataset& g, const gnn::EncoderParams& enc, const TuneConfig& cfg,
                       const ModeFlags& f) {
  Rng rng(cfg.seed);
  PromptState st;
  st.mode = cfg.mode;
  if (f.afr) st.afr = prompts::init_afr(g.num_features(), cfg.d_u, cfg.afr_init, rng);
  if (f.amc) st.amc = prompts::init_amc(enc.layer_input_dims(), cfg.d_w, cfg.leaky_slope, rng);
  if (f.gpf) st.gpf = prompts::init_gpf(g.num_features());
  st.predictor.w = xavier_uniform(enc.output_dim(), 1, rng);
  st.predictor.b = Matrix::Zero(1, 1);
  if (f.adversary) {
    AdversaryParams adv;
    adv.w = xavier_uniform(enc.output_dim(), 1, rng);
    adv.b = Matrix::Zero(1, 1);
    st.adversary = adv;
  }
  return st;
}

std::vector<Slot> make_slots(PromptState& st, const ModeFlags& f) {
  std::vector<Slot> slots;
  auto push = [&](const std::string& name, Matrix* m, Group grp) {
    Slot s;
    s.name = name;
    s.value = m;
    s.group = grp;
    slots.push_back(std::move(s));
  };
  if (f.afr) {
    push("afr.U1", &st.afr->u1, Group::prompt);
    push("afr.U2", &st.afr->u2, Group::prompt);
  } else if (f.gpf) {
    push("gpf.p", &st.gpf->p, Group::prompt);
  }
  if (f.amc) {
    for (std::size_t l = 0; l < st.amc->w1.size(); ++l) {
      push("amc.W1." + std::to_string(l + 1), &st.amc->w1[l], Group::prompt);
      push("amc.W2." + std::to_string(l + 1), &st.amc->w2[l], Group::prompt);
    }
  }
  push("predictor.w", &st.predictor.w, Group::predictor);
  push("predictor.b", &st.predictor.b, Group::predictor);
  if (f.adversary) {
    push("adversary.w", &st.adversary->w, Group::adversary);
    push("adversary.b", &st.adversary->b, Group::adversary);
  }
  return slots;
}

void check_losses_finite(double l_sup, double l_adv, int epoch, const std::vector<Slot>& slots) {
  if (std::isfinite(l_sup) && std::isfinite(l_adv)) return;
  std::string group = "losses";
  for (const auto& s : slots) {
    if (!s.value->allFinite()) {
      group = s.name;
      break;
    }
  }
  std::ostringstream os;
  os << "tune_prompts: non-finite loss at epoch " << epoch << " (L_Sup=" << l_sup << ", L_Adv=" << l_adv
     << ", parameter group: " << group << ")";
  throw NumericError(os.str());
}

}  // namespace

EvalOutput evaluate_state(const graph::GraphDataset& g, const graph::NormalizedAdjacency& adj,
                          const gnn::EncoderParams& enc, const PromptState& state) {
  ModeFlags f = flags_for(state.mode);
  diff::Tape tape;
  gnn::EdgeArrays ea = gnn::make_edge_arrays(adj);
  Pass pass = build_forward(tape, g, ea, enc, state, f, state_values(state, f), /*with_grads=*/false);
  EvalOutput out;
  out.layers = pass.trace.values();
  out.y_prob = pass.y_prob.value();
  out.s_prob = f.adversary ? pass.s_prob.value() : Matrix::Zero(g.n, 1);
  return out;
}

std::pair<PromptState, TrainReport> tune_prompts(const graph::GraphDataset& g,
                                                 const graph::NormalizedAdjacency& adj,
                                                 const gnn::EncoderParams& enc, const TuneConfig& cfg) {
  if (!enc.frozen) throw ShapeError("tune_prompts: encoder must be frozen");
  if (enc.input_dim() != g.num_features())
    throw ShapeError("tune_prompts: encoder expects " + std::to_string(enc.input_dim()) +
                     " input features, dataset has " + std::to_string(g.num_features()));
  if (g.splits.train_labeled.empty() || g.splits.val.empty() || g.splits.test.empty())
    throw ShapeError("tune_prompts: dataset splits are missing");
  if (cfg.epochs < 1) throw UsageError("tune_prompts: epochs must be >= 1");
  if (cfg.lambda < 0.0) throw UsageError("tune_prompts: lambda must be >= 0");

  ModeFlags f = flags_for(cfg.mode);
  const bool adv_influence = f.adversary && cfg.lambda > 0.0;

  PromptState st = init_state(g, enc, cfg, f);
  std::vector<Slot> slots = make_slots(st, f);
  gnn::EdgeArrays ea = gnn::make_edge_arrays(adj);

  std::vector<Index> all_nodes(static_cast<std::size_t>(g.n));
  for (Index i = 0; i < g.n; ++i) all_nodes[static_cast<std::size_t>(i)] = i;
  const std::vector<Index>& adv_scope =
      cfg.adversary_scope == AdversaryScope::all_nodes ? all_nodes : g.splits.train_labeled;

  TrainReport report;
  report.adversary_active = adv_influence;

  {  // frozen-encoder disparity baseline before any tuning
    diff::Tape tape;
    diff::Tensor x = tape.constant(g.X);
    auto ws = gnn::encoder_leaves(tape, enc);
    auto trace = gnn::forward_vanilla(ea, x, ws);
    report.layer_delta_untuned = metrics::layer_disparity_probe(trace.values(), g.s).delta;
  }

  diff::Tape tape;
  double best_acc = -1.0;
  double best_dsp = std::numeric_limits<double>::infinity();
  std::vector<Matrix> best_values;
  std::vector<Matrix> g_sup(slots.size()), g_adv(slots.size());

  std::vector<const Matrix*> slot_values;
  for (const auto& slot : slots) slot_values.push_back(slot.value);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    tape.reset();
    Pass pass = build_forward(tape, g, ea, enc, st, f, slot_values, /*with_grads=*/true);

    diff::Tensor l_sup = supervised_loss(tape, pass.y_prob, g.y, g.splits.train_labeled);
    double l_adv_value = 0.0;
    diff::Tensor l_adv;
    if (f.adversary) {
      l_adv = adversarial_loss(tape, pass.s_prob, g.s, adv_scope);
      l_adv_value = l_adv.value()(0, 0);
    }
    const double l_sup_value = l_sup.value()(0, 0);
    check_losses_finite(l_sup_value, l_adv_value, epoch, slots);

    // validation metrics from this epoch's (pre-update) forward
    const std::vector<int> bin = predict(pass.y_prob.value());
    const metrics::MetricValue va = metrics::accuracy(bin, g.y, g.splits.val);
    const metrics::MetricValue vd = metrics::delta_sp(bin, g.s, g.splits.val);
    EpochRow row;
    row.epoch = epoch;
    row.l_sup = l_sup_value;
    row.l_adv = l_adv_value;
    row.val_acc = va.value;
    row.val_dsp = vd.defined ? vd.value : std::numeric_limits<double>::quiet_NaN();
    report.epochs.push_back(row);

    const double tie_dsp = vd.defined ? vd.value : std::numeric_limits<double>::infinity();
    if (va.value > best_acc || (va.value == best_acc && tie_dsp < best_dsp)) {
      best_acc = va.value;
      best_dsp = tie_dsp;
      report.best_epoch = epoch;
      best_values.clear();
      for (const auto& slot : slots) best_values.push_back(*slot.value);
    }

    // two backward passes over the shared tape; each parameter group then
    // steps on its own objective
    tape.backward(l_sup);
    for (std::size_t i = 0; i < slots.size(); ++i) g_sup[i] = pass.leaves[i].grad();
    if (adv_influence) {
      tape.backward(l_adv);
      for (std::size_t i = 0; i < slots.size(); ++i) g_adv[i] = pass.leaves[i].grad();
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
      Slot& slot = slots[i];
      switch (slot.group) {
        case Group::prompt: {
          if (adv_influence)
            diff::adam_step(*slot.value, Matrix(g_sup[i] - cfg.lambda * g_adv[i]), slot.adam, cfg.lr);
          else
            diff::adam_step(*slot.value, g_sup[i], slot.adam, cfg.lr);
          break;
        }
        case Group::predictor: {
          diff::adam_step(*slot.value, g_sup[i], slot.adam, cfg.lr);
          break;
        }
        case Group::adversary: {
          if (adv_influence)
            diff::adam_step(*slot.value, Matrix(cfg.lambda * g_adv[i]), slot.adam, cfg.lr);
          break;
        }
      }
    }
  }

  // restore the selected epoch's parameters and evaluate on the test split
  for (std::size_t i = 0; i < slots.size(); ++i) *slots[i].value = best_values[i];
  EvalOutput eval = evaluate_state(g, adj, enc, st);
  const std::vector<int> bin = predict(eval.y_prob);
  metrics::MetricsRecord rec;
  rec.acc = metrics::accuracy(bin, g.y, g.splits.test);
  rec.dsp = metrics::delta_sp(bin, g.s, g.splits.test);
  rec.deo = metrics::delta_eo(bin, g.y, g.s, g.splits.test);
  rec.dgsp = metrics::delta_gsp(eval.y_prob, g.s, g.splits.test);
  rec.n_eval = static_cast<Index>(g.splits.test.size());
  rec.group_counts = metrics::group_cell_counts(g.y, g.s, g.splits.test);
  rec.layer_delta = metrics::layer_disparity_probe(eval.layers, g.s).delta;
  report.test_metrics = rec;
  return {std::move(st), std::move(report)};
}

std::string train_report_csv(const TrainReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,l_sup,l_adv,val_acc,val_dsp\n";
  for (const auto& r : report.epochs)
    os << r.epoch << "," << r.l_sup << "," << r.l_adv << "," << r.val_acc << "," << r.val_dsp << "\n";
  return os.str();
}

std::uint64_t encoder_checksum(const gnn::EncoderParams& enc) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& w : enc.weights) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(w.data());
    for (std::size_t i = 0; i < sizeof(double) * static_cast<std::size_t>(w.size()); ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace fairprompt::train
