#include <fairprompt/commands.hpp>
#include <fairprompt/svg.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

namespace fairprompt::cli {

namespace fs = std::filesystem;

namespace {

std::string outdir_of(const config::RunConfig& cfg) {
  const std::string dir = cfg.get_str("io.outdir");
  fs::create_directories(dir);
  return dir;
}

std::string encoder_path_of(const config::RunConfig& cfg) {
  const std::string p = cfg.get_str("io.encoder");
  return p.empty() ? cfg.get_str("io.outdir") + "/encoder.ckpt" : p;
}

std::string metrics_path_of(const config::RunConfig& cfg) {
  const std::string p = cfg.get_str("io.metrics");
  return p.empty() ? cfg.get_str("io.outdir") + "/metrics.csv" : p;
}

graph::GraphDataset dataset_from_config(const config::RunConfig& cfg) {
  const std::string nodes = cfg.get_str("data.nodes");
  const std::string edges = cfg.get_str("data.edges");
  if (nodes.empty() || edges.empty())
    throw UsageError("data.nodes and data.edges must point to dataset files");
  return graph::load_dataset(nodes, edges, /*standardize=*/true, cfg.get_bool("data.drop_sensitive"));
}

std::string fmt_g(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void write_resolved(const config::RunConfig& cfg, const std::string& outdir, const std::string& name) {
  io::write_text_file(outdir + "/" + name, cfg.resolved_text());
}

}  // namespace

graph::SynthConfig synth_config_from(const config::RunConfig& cfg) {
  graph::SynthConfig sc;
  sc.n = static_cast<Index>(cfg.get_int("synth.n"));
  sc.p_in = cfg.get_real("synth.p_in");
  sc.p_out = cfg.get_real("synth.p_out");
  sc.d_label = static_cast<Index>(cfg.get_int("synth.d_label"));
  sc.d_sens = static_cast<Index>(cfg.get_int("synth.d_sens"));
  sc.d_noise = static_cast<Index>(cfg.get_int("synth.d_noise"));
  sc.mu_label = cfg.get_real("synth.mu_label");
  sc.mu_sens = cfg.get_real("synth.mu_sens");
  sc.rho_ys = cfg.get_real("synth.rho_ys");
  sc.seed = cfg.get_seed("synth.seed");
  return sc;
}

pretrain::PretrainConfig pretrain_config_from(const config::RunConfig& cfg) {
  pretrain::PretrainConfig pc;
  pc.strategy = pretrain::parse_strategy(cfg.get_str("pretrain.strategy"));
  pc.epochs = static_cast<int>(cfg.get_int("pretrain.epochs"));
  pc.lr = cfg.get_real("pretrain.lr");
  pc.negative_ratio = static_cast<int>(cfg.get_int("pretrain.negative_ratio"));
  pc.seed = cfg.get_seed("pretrain.seed");
  pc.hidden = cfg.get_index_list("pretrain.hidden");
  if (pc.hidden.empty()) throw UsageError("pretrain.hidden must list at least one layer width");
  return pc;
}

train::TuneConfig tune_config_from(const config::RunConfig& cfg) {
  train::TuneConfig tc;
  tc.mode = train::parse_mode(cfg.get_str("tune.mode"));
  tc.lambda = cfg.get_real("tune.lambda");
  tc.lr = cfg.get_real("tune.lr");
  tc.epochs = static_cast<int>(cfg.get_int("tune.epochs"));
  tc.seed = cfg.get_seed("tune.seed");
  tc.adversary_scope = train::parse_scope(cfg.get_str("tune.adversary_scope"));
  tc.d_u = static_cast<Index>(cfg.get_int("tune.d_u"));
  tc.d_w = static_cast<Index>(cfg.get_int("tune.d_w"));
  const std::string init = cfg.get_str("tune.afr_init");
  if (init == "half")
    tc.afr_init = prompts::AfrInit::half;
  else if (init == "open")
    tc.afr_init = prompts::AfrInit::open;
  else
    throw UsageError("tune.afr_init must be 'half' or 'open', got '" + init + "'");
  tc.leaky_slope = cfg.get_real("tune.leaky_slope");
  return tc;
}

io::Checkpoint encoder_to_checkpoint(const gnn::EncoderParams& enc, const std::string& tag) {
  io::Checkpoint ckpt;
  ckpt.kind = "encoder";
  ckpt.tag = tag;
  ckpt.meta.emplace_back("frozen", enc.frozen ? "1" : "0");
  for (std::size_t l = 0; l < enc.weights.size(); ++l)
    ckpt.tensors.emplace_back("W" + std::to_string(l + 1), enc.weights[l]);
  return ckpt;
}

gnn::EncoderParams checkpoint_to_encoder(const io::Checkpoint& ckpt) {
  if (ckpt.kind != "encoder") throw IoError("expected an encoder checkpoint, found kind '" + ckpt.kind + "'");
  gnn::EncoderParams enc;
  for (std::size_t l = 0;; ++l) {
    const std::string name = "W" + std::to_string(l + 1);
    if (!ckpt.has_tensor(name)) break;
    enc.weights.push_back(ckpt.tensor(name));
  }
  if (enc.weights.empty()) throw IoError("encoder checkpoint holds no weight tensors");
  enc.frozen = ckpt.meta_value("frozen", "1") == "1";
  return enc;
}

gnn::EncoderParams load_encoder(const std::string& path) {
  return checkpoint_to_encoder(io::read_checkpoint(path));
}

io::Checkpoint prompt_state_to_checkpoint(const train::PromptState& state, double lambda,
                                          std::uint64_t seed, int best_epoch) {
  io::Checkpoint ckpt;
  ckpt.kind = "prompts";
  ckpt.tag = train::mode_name(state.mode);
  ckpt.meta.emplace_back("lambda", fmt_g(lambda));
  ckpt.meta.emplace_back("seed", std::to_string(seed));
  ckpt.meta.emplace_back("best_epoch", std::to_string(best_epoch));
  if (state.afr) {
    ckpt.tensors.emplace_back("afr.U1", state.afr->u1);
    ckpt.tensors.emplace_back("afr.U2", state.afr->u2);
  }
  if (state.amc) {
    for (std::size_t l = 0; l < state.amc->w1.size(); ++l) {
      ckpt.tensors.emplace_back("amc.W1." + std::to_string(l + 1), state.amc->w1[l]);
      ckpt.tensors.emplace_back("amc.W2." + std::to_string(l + 1), state.amc->w2[l]);
    }
  }
  if (state.gpf) ckpt.tensors.emplace_back("gpf.p", state.gpf->p);
  ckpt.tensors.emplace_back("predictor.w", state.predictor.w);
  ckpt.tensors.emplace_back("predictor.b", state.predictor.b);
  if (state.adversary) {
    ckpt.tensors.emplace_back("adversary.w", state.adversary->w);
    ckpt.tensors.emplace_back("adversary.b", state.adversary->b);
  }
  return ckpt;
}

train::PromptState checkpoint_to_prompt_state(const io::Checkpoint& ckpt) {
  if (ckpt.kind != "prompts") throw IoError("expected a prompts checkpoint, found kind '" + ckpt.kind + "'");
  train::PromptState st;
  st.mode = train::parse_mode(ckpt.tag);
  if (ckpt.has_tensor("afr.U1")) st.afr = prompts::AfrParams{ckpt.tensor("afr.U1"), ckpt.tensor("afr.U2")};
  if (ckpt.has_tensor("amc.W1.1")) {
    prompts::AmcParams amc;
    for (std::size_t l = 1;; ++l) {
      const std::string w1 = "amc.W1." + std::to_string(l);
      if (!ckpt.has_tensor(w1)) break;
      amc.w1.push_back(ckpt.tensor(w1));
      amc.w2.push_back(ckpt.tensor("amc.W2." + std::to_string(l)));
    }
    st.amc = std::move(amc);
  }
  if (ckpt.has_tensor("gpf.p")) st.gpf = prompts::GpfParams{ckpt.tensor("gpf.p")};
  st.predictor.w = ckpt.tensor("predictor.w");
  st.predictor.b = ckpt.tensor("predictor.b");
  if (ckpt.has_tensor("adversary.w"))
    st.adversary = train::AdversaryParams{ckpt.tensor("adversary.w"), ckpt.tensor("adversary.b")};
  return st;
}

std::string make_run_id(const std::string& dataset, const std::string& pretrain_tag,
                        const std::string& mode, double lambda, Index k_shot, std::uint64_t seed) {
  std::ostringstream os;
  os << dataset << "_" << pretrain_tag << "_" << mode << "_lam" << lambda << "_k" << k_shot << "_s" << seed;
  return os.str();
}

TuneOutcome run_tune(const graph::GraphDataset& g_base, const graph::NormalizedAdjacency& adj,
                     const gnn::EncoderParams& enc, const std::string& encoder_tag,
                     const train::TuneConfig& tcfg, Index k_shot, const std::string& dataset_name) {
  graph::GraphDataset g = g_base;  // splits differ per run; graph payload is shared data
  g.splits = graph::sample_kshot(g, k_shot, tcfg.seed);
  auto [state, report] = train::tune_prompts(g, adj, enc, tcfg);
  TuneOutcome out;
  out.run_id = make_run_id(dataset_name, encoder_tag, train::mode_name(tcfg.mode), tcfg.lambda, k_shot,
                           tcfg.seed);
  out.metrics_row = metrics::metrics_csv_row(out.run_id, dataset_name, encoder_tag,
                                             train::mode_name(tcfg.mode), tcfg.lambda, tcfg.seed,
                                             report.test_metrics);
  out.state = std::move(state);
  out.report = std::move(report);
  return out;
}

void cmd_gen_synth(const config::RunConfig& cfg) {
  const std::string outdir = outdir_of(cfg);
  const graph::SynthConfig sc = synth_config_from(cfg);
  graph::GraphDataset g = graph::gen_synthetic(sc);
  graph::write_dataset(g, outdir + "/nodes.csv", outdir + "/edges.tsv");
  const auto stats = graph::homophily_stats(g);
  io::write_text_file(outdir + "/homophily.csv", graph::homophily_csv(stats));
  write_resolved(cfg, outdir, "config_gen-synth.txt");
  std::cout << "gen-synth: n=" << g.n << " undirected_edges=" << g.edges.size()
            << " features=" << g.num_features() << "\n";
  for (const auto& r : stats)
    std::cout << "  group " << r.group << ": frac_same=" << r.frac_same << " frac_other=" << r.frac_other
              << "\n";
  std::cout << "wrote " << outdir << "/nodes.csv, edges.tsv, homophily.csv\n";
}

void cmd_pretrain(const config::RunConfig& cfg) {
  const std::string outdir = outdir_of(cfg);
  graph::GraphDataset g = dataset_from_config(cfg);
  const graph::NormalizedAdjacency adj = graph::normalize_adjacency(g);
  const pretrain::PretrainConfig pc = pretrain_config_from(cfg);
  const pretrain::PretrainOutcome out = pretrain::pretrain(g, adj, pc);
  const std::string enc_path = encoder_path_of(cfg);
  io::write_checkpoint(enc_path, encoder_to_checkpoint(out.encoder, pretrain::strategy_name(pc.strategy)));
  std::ostringstream manifest;
  manifest.precision(17);
  manifest << "strategy = " << pretrain::strategy_name(pc.strategy) << "\n"
           << "epochs = " << pc.epochs << "\n"
           << "seed = " << pc.seed << "\n"
           << "embedding_dim = " << out.encoder.output_dim() << "\n"
           << "final_train_loss = " << out.final_train_loss << "\n"
           << "final_val_loss = " << out.final_val_loss << "\n";
  io::write_text_file(outdir + "/pretrain_manifest.txt", manifest.str());
  write_resolved(cfg, outdir, "config_pretrain.txt");
  std::cout << "pretrain: strategy=" << pretrain::strategy_name(pc.strategy)
            << " final_train_loss=" << out.final_train_loss << " final_val_loss=" << out.final_val_loss
            << "\nwrote " << enc_path << "\n";
}

namespace {

void write_tune_outputs(const config::RunConfig& cfg, const std::string& outdir,
                        const TuneOutcome& outcome, const train::TuneConfig& tcfg) {
  io::write_checkpoint(outdir + "/prompts_" + outcome.run_id + ".ckpt",
                       prompt_state_to_checkpoint(outcome.state, tcfg.lambda, tcfg.seed,
                                                  outcome.report.best_epoch));
  io::write_text_file(outdir + "/report_" + outcome.run_id + ".csv",
                      train::train_report_csv(outcome.report));
  std::ostringstream manifest;
  manifest.precision(17);
  manifest << "run_id = " << outcome.run_id << "\n"
           << "best_epoch = " << outcome.report.best_epoch << "\n"
           << "adversary_influence_on_prompts = " << (outcome.report.adversary_active ? "active" : "none")
           << "\n";
  manifest << "layer_delta_untuned =";
  for (double d : outcome.report.layer_delta_untuned) manifest << " " << d;
  manifest << "\nlayer_delta_tuned =";
  for (double d : outcome.report.test_metrics.layer_delta) manifest << " " << d;
  manifest << "\n";
  io::write_text_file(outdir + "/run_" + outcome.run_id + ".txt", manifest.str());
  io::append_csv_row(metrics_path_of(cfg), metrics::metrics_csv_header(), outcome.metrics_row);
}

}  // namespace

void cmd_tune(const config::RunConfig& cfg) {
  const std::string outdir = outdir_of(cfg);
  graph::GraphDataset g = dataset_from_config(cfg);
  const graph::NormalizedAdjacency adj = graph::normalize_adjacency(g);
  const io::Checkpoint enc_ckpt = io::read_checkpoint(encoder_path_of(cfg));
  const gnn::EncoderParams enc = checkpoint_to_encoder(enc_ckpt);
  const train::TuneConfig tcfg = tune_config_from(cfg);
  const Index k = static_cast<Index>(cfg.get_int("tune.k_shot"));
  TuneOutcome outcome = run_tune(g, adj, enc, enc_ckpt.tag, tcfg, k, cfg.get_str("data.name"));
  write_tune_outputs(cfg, outdir, outcome, tcfg);
  write_resolved(cfg, outdir, "config_tune_" + outcome.run_id + ".txt");
  std::cout << metrics::metrics_csv_header() << "\n" << outcome.metrics_row << "\n";
}

void cmd_ablate(const config::RunConfig& cfg) {
  const std::string outdir = outdir_of(cfg);
  graph::GraphDataset g = dataset_from_config(cfg);
  const graph::NormalizedAdjacency adj = graph::normalize_adjacency(g);
  const io::Checkpoint enc_ckpt = io::read_checkpoint(encoder_path_of(cfg));
  const gnn::EncoderParams enc = checkpoint_to_encoder(enc_ckpt);
  const train::TuneConfig base = tune_config_from(cfg);
  const Index k = static_cast<Index>(cfg.get_int("tune.k_shot"));
  const auto seeds = cfg.get_seed_list("ablate.seeds");
  if (seeds.empty()) throw UsageError("ablate.seeds must be non-empty");
  const train::TuneMode modes[] = {train::TuneMode::adprompt, train::TuneMode::afr_only,
                                   train::TuneMode::amc_only, train::TuneMode::classifier_only};
  std::cout << metrics::metrics_csv_header() << "\n";
  for (const std::uint64_t seed : seeds) {
    for (const train::TuneMode mode : modes) {
      train::TuneConfig tcfg = base;
      tcfg.mode = mode;
      tcfg.seed = seed;
      TuneOutcome outcome = run_tune(g, adj, enc, enc_ckpt.tag, tcfg, k, cfg.get_str("data.name"));
      write_tune_outputs(cfg, outdir, outcome, tcfg);
      std::cout << outcome.metrics_row << "\n";
    }
  }
  write_resolved(cfg, outdir, "config_ablate.txt");
}

void cmd_sweep(const config::RunConfig& cfg) {
  const std::string outdir = outdir_of(cfg);
  const std::string param = cfg.get_str("sweep.param");
  if (param != "lambda" && param != "seed")
    throw UsageError("sweep.param must be 'lambda' or 'seed', got '" + param + "'");
  graph::GraphDataset g = dataset_from_config(cfg);
  const graph::NormalizedAdjacency adj = graph::normalize_adjacency(g);
  const io::Checkpoint enc_ckpt = io::read_checkpoint(encoder_path_of(cfg));
  const gnn::EncoderParams enc = checkpoint_to_encoder(enc_ckpt);
  const train::TuneConfig base = tune_config_from(cfg);
  const Index k = static_cast<Index>(cfg.get_int("tune.k_shot"));

  std::vector<double> values = cfg.get_real_list("sweep.values");
  if (values.empty()) throw UsageError("sweep.values must be non-empty");
  std::vector<std::uint64_t> seeds =
      param == "lambda" ? cfg.get_seed_list("sweep.seeds") : std::vector<std::uint64_t>{base.seed};
  if (seeds.empty()) throw UsageError("sweep.seeds must be non-empty");

  // per-run files first, merged at the end so the shared CSV sees one writer
  const std::string rundir = outdir + "/sweep_runs";
  fs::create_directories(rundir);
  struct Point {
    double value;
    metrics::MetricsRecord rec;
  };
  std::vector<Point> points;
  std::vector<std::string> rows;
  for (const double v : values) {
    for (const std::uint64_t seed : seeds) {
      train::TuneConfig tcfg = base;
      if (param == "lambda")
        tcfg.lambda = v;
      else
        tcfg.seed = static_cast<std::uint64_t>(v);
      if (param == "lambda") tcfg.seed = seed;
      TuneOutcome outcome = run_tune(g, adj, enc, enc_ckpt.tag, tcfg, k, cfg.get_str("data.name"));
      io::write_text_file(rundir + "/" + outcome.run_id + ".csv",
                          std::string(metrics::metrics_csv_header()) + "\n" + outcome.metrics_row + "\n");
      io::write_text_file(rundir + "/report_" + outcome.run_id + ".csv",
                          train::train_report_csv(outcome.report));
      rows.push_back(outcome.metrics_row);
      points.push_back({v, outcome.report.test_metrics});
    }
  }
  for (const auto& row : rows) io::append_csv_row(metrics_path_of(cfg), metrics::metrics_csv_header(), row);

  // seed-averaged curves
  std::map<double, std::vector<metrics::MetricsRecord>> grouped;
  for (const auto& p : points) grouped[p.value].push_back(p.rec);
  svg::Series acc{"ACC", "#1f6fb2", {}, {}};
  svg::Series dsp{"DSP", "#c23b22", {}, {}};
  svg::Series deo{"DEO", "#2a9d5c", {}, {}};
  auto mean_of = [](const std::vector<metrics::MetricsRecord>& recs, auto pick) {
    double acc_v = 0.0;
    int cnt = 0;
    for (const auto& r : recs) {
      const metrics::MetricValue m = pick(r);
      if (m.defined) {
        acc_v += m.value;
        ++cnt;
      }
    }
    return cnt > 0 ? acc_v / cnt : std::numeric_limits<double>::quiet_NaN();
  };
  for (const auto& [v, recs] : grouped) {
    acc.x.push_back(v);
    acc.y.push_back(mean_of(recs, [](const auto& r) { return r.acc; }));
    dsp.x.push_back(v);
    dsp.y.push_back(mean_of(recs, [](const auto& r) { return r.dsp; }));
    deo.x.push_back(v);
    deo.y.push_back(mean_of(recs, [](const auto& r) { return r.deo; }));
  }
  svg::Panel p1{"Accuracy", param, "ACC", {acc}};
  svg::Panel p2{"Fairness gaps", param, "gap", {dsp, deo}};
  io::write_text_file(outdir + "/sweep.svg", svg::render_panels({p1, p2}, "Sweep over " + param));
  write_resolved(cfg, outdir, "config_sweep.txt");
  std::cout << "sweep: " << rows.size() << " runs -> " << metrics_path_of(cfg) << ", " << outdir
            << "/sweep.svg\n";
}

AdaptReport run_adapt_check(const config::RunConfig& cfg) {
  const std::string scenario = cfg.get_str("adapt.case");
  if (scenario != "default" && scenario != "nullify" && scenario != "none")
    throw UsageError("adapt.case must be default, nullify or none");
  const Index n = static_cast<Index>(cfg.get_int("adapt.n"));
  if (n > 20) throw UsageError("adapt-check: graph too large (n=" + std::to_string(n) + " > 20)");
  if (n < 2) throw UsageError("adapt-check: need at least 2 nodes");
  const int steps = static_cast<int>(cfg.get_int("adapt.steps"));
  const double lr = cfg.get_real("adapt.lr");
  const std::uint64_t seed = cfg.get_seed("adapt.seed");
  const std::vector<Index> hidden = cfg.get_index_list("adapt.hidden");
  const Index d_w = static_cast<Index>(cfg.get_int("adapt.d_w"));

  Rng rng(seed);
  graph::GraphDataset g;
  if (scenario == "nullify") {
    // one disconnected pair, everything else isolated
    Matrix x(n, 4);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < 4; ++j) x(i, j) = gauss(rng);
    g = graph::make_dataset(n, {{0, 1}}, std::move(x), std::vector<int>(static_cast<std::size_t>(n), 0),
                            std::vector<int>(static_cast<std::size_t>(n), 0));
  } else {
    graph::SynthConfig sc;
    sc.n = n;
    sc.p_in = 0.5;
    sc.p_out = 0.25;
    sc.d_label = 2;
    sc.d_sens = 1;
    sc.d_noise = 1;
    sc.mu_label = 0.8;
    sc.mu_sens = 0.8;
    sc.rho_ys = 0.7;
    sc.seed = seed;
    g = graph::gen_synthetic(sc);
    graph::standardize_features(g);
  }
  if (g.edges.empty()) throw NumericError("adapt-check: fixture graph has no edges");

  gnn::EncoderParams enc = gnn::init_encoder(g.num_features(), hidden, rng);
  enc.frozen = true;

  // target graph: delete one edge (or none)
  std::vector<std::pair<Index, Index>> target_edges = g.edges;
  if (scenario == "nullify") {
    target_edges.clear();
  } else if (scenario == "default") {
    const std::size_t victim = static_cast<std::size_t>(uniform_index(rng, target_edges.size()));
    target_edges.erase(target_edges.begin() + static_cast<std::ptrdiff_t>(victim));
  }
  graph::GraphDataset g_target = graph::make_dataset(g.n, target_edges, g.X, g.y, g.s);

  const graph::NormalizedAdjacency adj = graph::normalize_adjacency(g);
  const graph::NormalizedAdjacency adj_target = graph::normalize_adjacency(g_target);
  const gnn::EdgeArrays ea = gnn::make_edge_arrays(adj);
  const gnn::EdgeArrays ea_target = gnn::make_edge_arrays(adj_target);

  Matrix target;
  {
    diff::Tape tape;
    auto ws = gnn::encoder_leaves(tape, enc);
    target = gnn::forward_vanilla(ea_target, tape.constant(g.X), ws).output().value();
  }
  const double target_norm2 = target.squaredNorm();
  if (target_norm2 <= 0.0) throw NumericError("adapt-check: degenerate target embeddings");

  prompts::AmcParams amc = prompts::init_amc(enc.layer_input_dims(), d_w, 0.01, rng);
  std::vector<diff::AdamState> adam(2 * amc.w1.size());

  AdaptReport rep;
  rep.scenario = scenario;
  rep.steps = steps;
  diff::Tape tape;
  for (int step = 0; step <= steps; ++step) {
    tape.reset();
    auto ws = gnn::encoder_leaves(tape, enc);
    gnn::AmcTensors amct;
    amct.leaky_slope = amc.leaky_slope;
    for (std::size_t l = 0; l < amc.w1.size(); ++l) {
      amct.w1.push_back(tape.input(amc.w1[l], true));
      amct.w2.push_back(tape.input(amc.w2[l], true));
    }
    diff::Tensor out = gnn::forward_prompted(ea, tape.constant(g.X), ws, amct).output();
    diff::Tensor diff_t = diff::sub(out, tape.constant(target));
    diff::Tensor loss = diff::sum(diff::hadamard(diff_t, diff_t));
    const double rel = loss.value()(0, 0) / target_norm2;
    if (!std::isfinite(rel)) throw NumericError("adapt-check: non-finite error at step " + std::to_string(step));
    if (step == 0) rep.initial_rel_error = rel;
    rep.final_rel_error = rel;
    if (step == steps) break;
    tape.backward(loss);
    for (std::size_t l = 0; l < amc.w1.size(); ++l) {
      diff::adam_step(amc.w1[l], amct.w1[l].grad(), adam[2 * l], lr);
      diff::adam_step(amc.w2[l], amct.w2[l].grad(), adam[2 * l + 1], lr);
    }
  }
  return rep;
}

void cmd_adapt_check(const config::RunConfig& cfg) {
  const std::string outdir = outdir_of(cfg);
  const AdaptReport rep = run_adapt_check(cfg);
  std::ostringstream os;
  os.precision(17);
  os << "scenario = " << rep.scenario << "\n"
     << "steps = " << rep.steps << "\n"
     << "initial_rel_error = " << rep.initial_rel_error << "\n"
     << "final_rel_error = " << rep.final_rel_error << "\n";
  io::write_text_file(outdir + "/adapt_report.txt", os.str());
  write_resolved(cfg, outdir, "config_adapt-check.txt");
  std::cout << os.str();
}

}  // namespace fairprompt::cli
