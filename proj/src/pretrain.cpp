#include <fairprompt/pretrain.hpp>

#include <algorithm>
#include <cmath>

namespace fairprompt::pretrain {

Strategy parse_strategy(const std::string& name) {
  if (name == "gae") return Strategy::gae;
  if (name == "dgi" || name == "infomax") return Strategy::dgi;
  throw UsageError("unsupported strategy '" + name + "' (supported: gae, dgi)");
}

std::string strategy_name(Strategy s) { return s == Strategy::gae ? "gae" : "dgi"; }

namespace {

void check_ratios(const PretrainConfig& cfg) {
  const double total = cfg.ratio_train + cfg.ratio_val + cfg.ratio_test;
  if (std::abs(total - 1.0) > 1e-9)
    throw UsageError("pretrain: split ratios must sum to 1, got " + std::to_string(total));
  if (cfg.epochs < 1) throw UsageError("pretrain: epochs must be >= 1");
}

void check_finite(double loss, int epoch) {
  if (!std::isfinite(loss))
    throw NumericError("pretrain: non-finite loss at epoch " + std::to_string(epoch));
}

Matrix label_column(Index rows, double value) { return Matrix::Constant(rows, 1, value); }

// sigmoid(z_u . z_v) per listed pair
diff::Tensor pair_scores(const diff::Tensor& z, diff::IndexListPtr us, diff::IndexListPtr vs) {
  return diff::sigmoid(diff::row_sum(diff::hadamard(diff::gather_rows(z, us), diff::gather_rows(z, vs))));
}

}  // namespace

PretrainOutcome pretrain_gae(const graph::GraphDataset& g, const graph::NormalizedAdjacency& adj,
                             const PretrainConfig& cfg) {
  check_ratios(cfg);
  if (g.edges.empty()) throw ShapeError("pretrain_gae: graph has no edges");

  Rng rng(cfg.seed);
  gnn::EncoderParams enc = gnn::init_encoder(g.num_features(), cfg.hidden, rng);
  gnn::EdgeArrays ea = gnn::make_edge_arrays(adj);

  // edge split for the reconstruction objective
  std::vector<Index> order(g.edges.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Index>(i);
  shuffle_indices(order, rng);
  const auto n_edges = static_cast<double>(g.edges.size());
  const auto n_train = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(cfg.ratio_train * n_edges)));
  const auto n_val = std::min(order.size() - n_train,
                              static_cast<std::size_t>(std::floor(cfg.ratio_val * n_edges)));
  auto train_us = std::make_shared<diff::IndexList>();
  auto train_vs = std::make_shared<diff::IndexList>();
  auto val_us = std::make_shared<diff::IndexList>();
  auto val_vs = std::make_shared<diff::IndexList>();
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& e = g.edges[static_cast<std::size_t>(order[i])];
    if (i < n_train) {
      train_us->push_back(e.first);
      train_vs->push_back(e.second);
    } else if (i < n_train + n_val) {
      val_us->push_back(e.first);
      val_vs->push_back(e.second);
    }
  }

  auto is_edge = [&](Index u, Index v) {
    if (u > v) std::swap(u, v);
    return std::binary_search(g.edges.begin(), g.edges.end(), std::make_pair(u, v));
  };
  const auto possible_pairs = static_cast<std::uint64_t>(g.n) * static_cast<std::uint64_t>(g.n - 1) / 2;
  const bool has_non_edges = possible_pairs > g.edges.size();

  auto sample_negatives = [&](std::size_t count) {
    auto us = std::make_shared<diff::IndexList>();
    auto vs = std::make_shared<diff::IndexList>();
    while (us->size() < count) {
      const Index u = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(g.n)));
      const Index v = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(g.n)));
      if (u == v || is_edge(u, v)) continue;
      us->push_back(u);
      vs->push_back(v);
    }
    return std::make_pair(us, vs);
  };

  PretrainOutcome out;
  out.strategy = Strategy::gae;
  diff::Tape tape;
  std::vector<diff::AdamState> adam(enc.weights.size());
  double val_loss = 0.0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    tape.reset();
    diff::Tensor x = tape.constant(g.X);
    std::vector<diff::Tensor> ws = gnn::encoder_leaves(tape, enc);
    diff::Tensor z = gnn::forward_vanilla(ea, x, ws).output();

    diff::Tensor pos = pair_scores(z, train_us, train_vs);
    diff::Tensor loss = diff::bce_loss(pos, tape.constant(label_column(pos.rows(), 1.0)));
    std::size_t n_neg = 0;
    if (has_non_edges && cfg.negative_ratio > 0) {
      n_neg = train_us->size() * static_cast<std::size_t>(cfg.negative_ratio);
      auto [nus, nvs] = sample_negatives(n_neg);
      diff::Tensor neg = pair_scores(z, nus, nvs);
      diff::Tensor neg_loss = diff::bce_loss(neg, tape.constant(label_column(neg.rows(), 0.0)));
      const double wp = static_cast<double>(train_us->size()) / static_cast<double>(train_us->size() + n_neg);
      diff::Tensor mixed = diff::add(diff::hadamard(loss, tape.constant(Matrix::Constant(1, 1, wp))),
                                     diff::hadamard(neg_loss, tape.constant(Matrix::Constant(1, 1, 1.0 - wp))));
      loss = mixed;
    }
    const double train_loss = loss.value()(0, 0);
    check_finite(train_loss, epoch);
    out.train_loss.push_back(train_loss);

    if (!val_us->empty()) {
      diff::Tensor vpos = pair_scores(z, val_us, val_vs);
      diff::Tensor vloss = diff::bce_loss(vpos, tape.constant(label_column(vpos.rows(), 1.0)));
      if (has_non_edges) {
        auto [nus, nvs] = sample_negatives(val_us->size());
        diff::Tensor vneg = pair_scores(z, nus, nvs);
        diff::Tensor vnl = diff::bce_loss(vneg, tape.constant(label_column(vneg.rows(), 0.0)));
        val_loss = 0.5 * (vloss.value()(0, 0) + vnl.value()(0, 0));
      } else {
        val_loss = vloss.value()(0, 0);
      }
    } else {
      val_loss = train_loss;
    }

    tape.backward(loss);
    for (std::size_t l = 0; l < enc.weights.size(); ++l)
      diff::adam_step(enc.weights[l], ws[l].grad(), adam[l], cfg.lr);
  }
  out.final_train_loss = out.train_loss.back();
  out.final_val_loss = val_loss;
  enc.frozen = true;
  out.encoder = std::move(enc);
  return out;
}

PretrainOutcome pretrain_dgi(const graph::GraphDataset& g, const graph::NormalizedAdjacency& adj,
                             const PretrainConfig& cfg) {
  check_ratios(cfg);
  if (g.n < 2) throw ShapeError("pretrain_dgi: need at least 2 nodes");

  Rng rng(cfg.seed);
  gnn::EncoderParams enc = gnn::init_encoder(g.num_features(), cfg.hidden, rng);
  Matrix bilinear = xavier_uniform(enc.output_dim(), enc.output_dim(), rng);
  gnn::EdgeArrays ea = gnn::make_edge_arrays(adj);

  // node split for loss computation / monitoring
  std::vector<Index> order(static_cast<std::size_t>(g.n));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Index>(i);
  shuffle_indices(order, rng);
  const auto n_train = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(cfg.ratio_train * g.n)));
  const auto n_val = std::min(order.size() - n_train,
                              static_cast<std::size_t>(std::floor(cfg.ratio_val * g.n)));
  diff::IndexList train_nodes(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  diff::IndexList val_nodes(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                            order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  std::sort(train_nodes.begin(), train_nodes.end());
  std::sort(val_nodes.begin(), val_nodes.end());
  if (val_nodes.empty()) val_nodes = train_nodes;

  PretrainOutcome out;
  out.strategy = Strategy::dgi;
  diff::Tape tape;
  std::vector<diff::AdamState> adam(enc.weights.size());
  diff::AdamState adam_b;
  double val_loss = 0.0;
  std::vector<Index> perm(static_cast<std::size_t>(g.n));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<Index>(i);
    shuffle_indices(perm, rng);
    Matrix x_cor(g.n, g.X.cols());
    for (Index i = 0; i < g.n; ++i) x_cor.row(i) = g.X.row(perm[static_cast<std::size_t>(i)]);

    tape.reset();
    diff::Tensor x = tape.constant(g.X);
    diff::Tensor xc = tape.constant(std::move(x_cor));
    std::vector<diff::Tensor> ws = gnn::encoder_leaves(tape, enc);
    diff::Tensor b = tape.input(bilinear, true);
    diff::Tensor z_real = gnn::forward_vanilla(ea, x, ws).output();
    diff::Tensor z_cor = gnn::forward_vanilla(ea, xc, ws).output();
    diff::Tensor summary = diff::sigmoid(diff::mean_rows(z_real));  // 1 x D
    diff::Tensor score_real = diff::sigmoid(diff::matmul(diff::matmul(z_real, b), diff::transpose(summary)));
    diff::Tensor score_cor = diff::sigmoid(diff::matmul(diff::matmul(z_cor, b), diff::transpose(summary)));

    auto masked_loss = [&](const diff::IndexList& nodes) {
      diff::Tensor lr_ = diff::bce_loss(score_real, tape.constant(label_column(g.n, 1.0)), nodes);
      diff::Tensor lc_ = diff::bce_loss(score_cor, tape.constant(label_column(g.n, 0.0)), nodes);
      return diff::hadamard(diff::add(lr_, lc_), tape.constant(Matrix::Constant(1, 1, 0.5)));
    };
    diff::Tensor loss = masked_loss(train_nodes);
    const double train_loss = loss.value()(0, 0);
    check_finite(train_loss, epoch);
    out.train_loss.push_back(train_loss);
    val_loss = masked_loss(val_nodes).value()(0, 0);

    tape.backward(loss);
    for (std::size_t l = 0; l < enc.weights.size(); ++l)
      diff::adam_step(enc.weights[l], ws[l].grad(), adam[l], cfg.lr);
    diff::adam_step(bilinear, b.grad(), adam_b, cfg.lr);
  }
  out.final_train_loss = out.train_loss.back();
  out.final_val_loss = val_loss;
  out.dgi_bilinear = std::move(bilinear);
  enc.frozen = true;
  out.encoder = std::move(enc);
  return out;
}

PretrainOutcome pretrain(const graph::GraphDataset& g, const graph::NormalizedAdjacency& adj,
                         const PretrainConfig& cfg) {
  return cfg.strategy == Strategy::gae ? pretrain_gae(g, adj, cfg) : pretrain_dgi(g, adj, cfg);
}

}  // namespace fairprompt::pretrain
