#include <fairprompt/graph.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace fairprompt::graph {

namespace {

void build_csr(GraphDataset& g) {
  std::vector<std::vector<Index>> nbrs(static_cast<std::size_t>(g.n));
  for (const auto& [u, v] : g.edges) {
    nbrs[static_cast<std::size_t>(u)].push_back(v);
    nbrs[static_cast<std::size_t>(v)].push_back(u);
  }
  g.adj_offsets.assign(static_cast<std::size_t>(g.n) + 1, 0);
  g.adj_cols.clear();
  for (Index i = 0; i < g.n; ++i) {
    auto& row = nbrs[static_cast<std::size_t>(i)];
    std::sort(row.begin(), row.end());
    g.adj_offsets[static_cast<std::size_t>(i) + 1] =
        g.adj_offsets[static_cast<std::size_t>(i)] + static_cast<Index>(row.size());
    g.adj_cols.insert(g.adj_cols.end(), row.begin(), row.end());
  }
}

void finalize_edges(GraphDataset& g, std::vector<std::pair<Index, Index>> raw) {
  for (auto& [u, v] : raw) {
    if (u > v) std::swap(u, v);
  }
  std::sort(raw.begin(), raw.end());
  raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
  g.edges = std::move(raw);
  build_csr(g);
}

std::vector<std::string> split_line(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

int parse_binary(const std::string& tok, const char* what, std::size_t lineno) {
  if (tok == "0") return 0;
  if (tok == "1") return 1;
  throw IoError(std::string("nodes file line ") + std::to_string(lineno) + ": non-binary " + what + " '" +
                tok + "'");
}

}  // namespace

GraphDataset make_dataset(Index n, std::vector<std::pair<Index, Index>> edges, Matrix x,
                          std::vector<int> y, std::vector<int> s) {
  if (x.rows() != n || static_cast<Index>(y.size()) != n || static_cast<Index>(s.size()) != n)
    throw ShapeError("make_dataset: X/y/s sizes do not match n=" + std::to_string(n));
  GraphDataset g;
  g.n = n;
  g.X = std::move(x);
  g.y = std::move(y);
  g.s = std::move(s);
  for (Index j = 0; j < g.X.cols(); ++j) g.feature_names.push_back("f" + std::to_string(j));
  std::vector<std::pair<Index, Index>> kept;
  for (const auto& [u, v] : edges) {
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw ShapeError("make_dataset: edge (" + std::to_string(u) + "," + std::to_string(v) +
                       ") out of range");
    if (u != v) kept.emplace_back(u, v);
  }
  finalize_edges(g, std::move(kept));
  return g;
}

GraphDataset load_dataset(const std::string& nodes_path, const std::string& edges_path, bool standardize,
                          bool drop_sensitive_cols) {
  std::ifstream nf(nodes_path);
  if (!nf) throw IoError("cannot open nodes file: " + nodes_path);
  std::string header;
  if (!std::getline(nf, header)) throw IoError("empty nodes file: " + nodes_path);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  auto head = split_line(header, ',');
  if (head.size() < 4 || head[0] != "id" || head[1] != "label" || head[2] != "sensitive" || head[3] != "f0")
    throw IoError("nodes file header must be 'id,label,sensitive,f0,...', got '" + header + "'");
  const Index d = static_cast<Index>(head.size()) - 3;

  std::vector<std::vector<double>> feats;
  std::vector<Index> ids;
  std::vector<int> labels, sens;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(nf, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto toks = split_line(line, ',');
    if (static_cast<Index>(toks.size()) != d + 3)
      throw IoError("nodes file line " + std::to_string(lineno) + ": expected " + std::to_string(d + 3) +
                    " fields, got " + std::to_string(toks.size()));
    ids.push_back(static_cast<Index>(std::stoll(toks[0])));
    labels.push_back(parse_binary(toks[1], "label", lineno));
    sens.push_back(parse_binary(toks[2], "sensitive", lineno));
    std::vector<double> row(static_cast<std::size_t>(d));
    for (Index j = 0; j < d; ++j) row[static_cast<std::size_t>(j)] = std::stod(toks[static_cast<std::size_t>(j) + 3]);
    feats.push_back(std::move(row));
  }
  const Index n = static_cast<Index>(ids.size());
  if (n == 0) throw IoError("nodes file has no rows: " + nodes_path);

  GraphDataset g;
  g.n = n;
  g.X.resize(n, d);
  g.y.assign(static_cast<std::size_t>(n), 0);
  g.s.assign(static_cast<std::size_t>(n), 0);
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (Index r = 0; r < n; ++r) {
    const Index id = ids[static_cast<std::size_t>(r)];
    if (id < 0 || id >= n || seen[static_cast<std::size_t>(id)])
      throw IoError("nodes file: ids must be a permutation of 0.." + std::to_string(n - 1) +
                    " (offending id " + std::to_string(id) + ")");
    seen[static_cast<std::size_t>(id)] = true;
    g.y[static_cast<std::size_t>(id)] = labels[static_cast<std::size_t>(r)];
    g.s[static_cast<std::size_t>(id)] = sens[static_cast<std::size_t>(r)];
    for (Index j = 0; j < d; ++j) g.X(id, j) = feats[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
  }
  g.feature_names.assign(head.begin() + 3, head.end());

  std::ifstream ef(edges_path);
  if (!ef) throw IoError("cannot open edges file: " + edges_path);
  std::vector<std::pair<Index, Index>> raw;
  lineno = 0;
  while (std::getline(ef, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto toks = split_line(line, '\t');
    if (toks.size() != 2)
      throw IoError("edges file line " + std::to_string(lineno) + ": expected 'u<TAB>v'");
    const Index u = static_cast<Index>(std::stoll(toks[0]));
    const Index v = static_cast<Index>(std::stoll(toks[1]));
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw IoError("edges file line " + std::to_string(lineno) + ": node id out of range [0," +
                    std::to_string(n) + ") in edge (" + toks[0] + "," + toks[1] + ")");
    if (u == v) continue;  // self loops are not stored
    raw.emplace_back(u, v);
  }
  finalize_edges(g, std::move(raw));

  if (drop_sensitive_cols) {
    std::vector<Index> keep;
    for (Index j = 0; j < g.X.cols(); ++j) {
      bool same = true;
      for (Index i = 0; i < n && same; ++i) same = (g.X(i, j) == static_cast<double>(g.s[static_cast<std::size_t>(i)]));
      if (!same) keep.push_back(j);
    }
    if (static_cast<Index>(keep.size()) != g.X.cols()) {
      Matrix xr(n, static_cast<Index>(keep.size()));
      std::vector<std::string> names;
      for (std::size_t k = 0; k < keep.size(); ++k) {
        xr.col(static_cast<Index>(k)) = g.X.col(keep[k]);
        names.push_back(g.feature_names[static_cast<std::size_t>(keep[k])]);
      }
      g.X = std::move(xr);
      g.feature_names = std::move(names);
    }
  }

  if (standardize) standardize_features(g);
  return g;
}

void write_dataset(const GraphDataset& g, const std::string& nodes_path, const std::string& edges_path) {
  std::ofstream nf(nodes_path);
  if (!nf) throw IoError("cannot write nodes file: " + nodes_path);
  nf << "id,label,sensitive";
  for (Index j = 0; j < g.X.cols(); ++j) nf << ",f" << j;
  nf << "\n";
  nf.precision(17);
  for (Index i = 0; i < g.n; ++i) {
    nf << i << "," << g.y[static_cast<std::size_t>(i)] << "," << g.s[static_cast<std::size_t>(i)];
    for (Index j = 0; j < g.X.cols(); ++j) nf << "," << g.X(i, j);
    nf << "\n";
  }
  std::ofstream ef(edges_path);
  if (!ef) throw IoError("cannot write edges file: " + edges_path);
  for (const auto& [u, v] : g.edges) ef << u << "\t" << v << "\n";
}

void standardize_features(GraphDataset& g) {
  if (g.standardized) return;
  for (Index j = 0; j < g.X.cols(); ++j) {
    const double mean = g.X.col(j).mean();
    g.X.col(j).array() -= mean;
    const double var = g.X.col(j).squaredNorm() / static_cast<double>(g.n);
    const double sd = std::sqrt(var);
    if (sd > 0.0) g.X.col(j) /= sd;
  }
  g.standardized = true;
}

NormalizedAdjacency normalize_adjacency(const GraphDataset& g) {
  NormalizedAdjacency a;
  a.n = g.n;
  a.offsets.assign(static_cast<std::size_t>(g.n) + 1, 0);
  a.self_coeff.resize(static_cast<std::size_t>(g.n));
  std::vector<double> inv_sqrt(static_cast<std::size_t>(g.n));
  for (Index i = 0; i < g.n; ++i)
    inv_sqrt[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(static_cast<double>(g.degree(i) + 1));
  for (Index i = 0; i < g.n; ++i) {
    const double di = inv_sqrt[static_cast<std::size_t>(i)];
    a.self_coeff[static_cast<std::size_t>(i)] = di * di;
    // row = sorted neighbors plus the self entry in column order
    const Index beg = g.adj_offsets[static_cast<std::size_t>(i)];
    const Index end = g.adj_offsets[static_cast<std::size_t>(i) + 1];
    bool self_done = false;
    auto push = [&](Index col, double val) {
      a.cols.push_back(col);
      a.vals.push_back(val);
      if (col != i) {
        a.src.push_back(col);
        a.dst.push_back(i);
        a.coeff.push_back(val);
      }
    };
    for (Index k = beg; k < end; ++k) {
      const Index j = g.adj_cols[static_cast<std::size_t>(k)];
      if (!self_done && j > i) {
        push(i, di * di);
        self_done = true;
      }
      push(j, di * inv_sqrt[static_cast<std::size_t>(j)]);
    }
    if (!self_done) push(i, di * di);
    a.offsets[static_cast<std::size_t>(i) + 1] = static_cast<Index>(a.cols.size());
  }
  return a;
}

SplitMasks sample_kshot(const GraphDataset& g, Index k, std::uint64_t seed) {
  std::vector<Index> class0, class1;
  for (Index i = 0; i < g.n; ++i) (g.y[static_cast<std::size_t>(i)] == 0 ? class0 : class1).push_back(i);
  if (static_cast<Index>(class0.size()) < k || static_cast<Index>(class1.size()) < k)
    throw ShapeError("sample_kshot: a class has fewer than k=" + std::to_string(k) + " members (" +
                     std::to_string(class0.size()) + "/" + std::to_string(class1.size()) + ")");
  Rng rng(seed);
  SplitMasks m;
  std::vector<bool> taken(static_cast<std::size_t>(g.n), false);
  for (auto* cls : {&class0, &class1}) {
    shuffle_indices(*cls, rng);
    for (Index i = 0; i < k; ++i) {
      m.train_labeled.push_back((*cls)[static_cast<std::size_t>(i)]);
      taken[static_cast<std::size_t>((*cls)[static_cast<std::size_t>(i)])] = true;
    }
  }
  std::sort(m.train_labeled.begin(), m.train_labeled.end());
  std::vector<Index> rest;
  for (Index i = 0; i < g.n; ++i)
    if (!taken[static_cast<std::size_t>(i)]) rest.push_back(i);
  shuffle_indices(rest, rng);
  const std::size_t half = rest.size() / 2;
  m.val.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(half));
  m.test.assign(rest.begin() + static_cast<std::ptrdiff_t>(half), rest.end());
  std::sort(m.val.begin(), m.val.end());
  std::sort(m.test.begin(), m.test.end());
  return m;
}

GraphDataset gen_synthetic(const SynthConfig& cfg) {
  if (cfg.n <= 0) throw UsageError("gen_synthetic: n must be positive");
  if (cfg.p_in < 0.0 || cfg.p_in > 1.0 || cfg.p_out < 0.0 || cfg.p_out > 1.0)
    throw UsageError("gen_synthetic: edge probabilities must lie in [0,1]");
  if (cfg.rho_ys < 0.0 || cfg.rho_ys > 1.0) throw UsageError("gen_synthetic: rho_ys must lie in [0,1]");
  if (cfg.d_label < 0 || cfg.d_sens < 0 || cfg.d_noise < 0)
    throw UsageError("gen_synthetic: block widths must be non-negative");
  const Index d = cfg.d_label + cfg.d_sens + cfg.d_noise;
  if (d == 0) throw UsageError("gen_synthetic: at least one feature block must be non-empty");

  Rng rng(cfg.seed);
  GraphDataset g;
  g.n = cfg.n;
  g.s.resize(static_cast<std::size_t>(cfg.n));
  g.y.resize(static_cast<std::size_t>(cfg.n));
  for (Index i = 0; i < cfg.n; ++i) {
    g.s[static_cast<std::size_t>(i)] = uniform_real(rng, 0.0, 1.0) < 0.5 ? 0 : 1;
    if (uniform_real(rng, 0.0, 1.0) < cfg.rho_ys)
      g.y[static_cast<std::size_t>(i)] = g.s[static_cast<std::size_t>(i)];
    else
      g.y[static_cast<std::size_t>(i)] = uniform_real(rng, 0.0, 1.0) < 0.5 ? 0 : 1;
  }

  std::vector<std::pair<Index, Index>> raw;
  for (Index u = 0; u < cfg.n; ++u) {
    for (Index v = u + 1; v < cfg.n; ++v) {
      const double p =
          (g.s[static_cast<std::size_t>(u)] == g.s[static_cast<std::size_t>(v)]) ? cfg.p_in : cfg.p_out;
      if (uniform_real(rng, 0.0, 1.0) < p) raw.emplace_back(u, v);
    }
  }
  finalize_edges(g, std::move(raw));

  std::normal_distribution<double> gauss(0.0, 1.0);
  g.X.resize(cfg.n, d);
  for (Index i = 0; i < cfg.n; ++i) {
    const double ly = cfg.mu_label * (2.0 * g.y[static_cast<std::size_t>(i)] - 1.0);
    const double ls = cfg.mu_sens * (2.0 * g.s[static_cast<std::size_t>(i)] - 1.0);
    Index j = 0;
    for (Index b = 0; b < cfg.d_label; ++b, ++j) g.X(i, j) = ly + gauss(rng);
    for (Index b = 0; b < cfg.d_sens; ++b, ++j) g.X(i, j) = ls + gauss(rng);
    for (Index b = 0; b < cfg.d_noise; ++b, ++j) g.X(i, j) = gauss(rng);
  }
  g.feature_names.clear();
  for (Index b = 0; b < cfg.d_label; ++b) g.feature_names.push_back("lbl" + std::to_string(b));
  for (Index b = 0; b < cfg.d_sens; ++b) g.feature_names.push_back("sen" + std::to_string(b));
  for (Index b = 0; b < cfg.d_noise; ++b) g.feature_names.push_back("nse" + std::to_string(b));
  return g;
}

std::vector<HomophilyRow> homophily_stats(const GraphDataset& g) {
  if (g.edges.empty()) throw ShapeError("homophily_stats: graph has no edges");
  std::vector<HomophilyRow> rows(2);
  for (int grp = 0; grp < 2; ++grp) rows[static_cast<std::size_t>(grp)].group = grp;
  for (Index i = 0; i < g.n; ++i) {
    const Index deg = g.degree(i);
    if (deg == 0) continue;
    Index same = 0;
    for (Index k = g.adj_offsets[static_cast<std::size_t>(i)]; k < g.adj_offsets[static_cast<std::size_t>(i) + 1];
         ++k) {
      if (g.s[static_cast<std::size_t>(g.adj_cols[static_cast<std::size_t>(k)])] ==
          g.s[static_cast<std::size_t>(i)])
        ++same;
    }
    auto& row = rows[static_cast<std::size_t>(g.s[static_cast<std::size_t>(i)])];
    row.frac_same += static_cast<double>(same) / static_cast<double>(deg);
    row.frac_other += static_cast<double>(deg - same) / static_cast<double>(deg);
    row.nodes_counted += 1;
  }
  for (auto& row : rows) {
    if (row.nodes_counted > 0) {
      row.frac_same /= static_cast<double>(row.nodes_counted);
      row.frac_other /= static_cast<double>(row.nodes_counted);
    }
  }
  return rows;
}

std::string homophily_csv(const std::vector<HomophilyRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "group,frac_same,frac_other\n";
  for (const auto& r : rows) os << r.group << "," << r.frac_same << "," << r.frac_other << "\n";
  return os.str();
}

}  // namespace fairprompt::graph
