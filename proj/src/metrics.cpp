#include <fairprompt/metrics.hpp>

#include <cmath>
#include <sstream>

namespace fairprompt::metrics {

namespace {

void check_eval(const std::vector<Index>& eval_set, std::size_t n, const char* op) {
  if (eval_set.empty()) throw ShapeError(std::string(op) + ": empty evaluation set");
  for (Index i : eval_set)
    if (i < 0 || static_cast<std::size_t>(i) >= n)
      throw ShapeError(std::string(op) + ": index " + std::to_string(i) + " out of range");
}

}  // namespace

MetricValue accuracy(const std::vector<int>& y_pred, const std::vector<int>& y,
                     const std::vector<Index>& eval_set) {
  check_eval(eval_set, y.size(), "accuracy");
  Index correct = 0;
  for (Index i : eval_set)
    if (y_pred[static_cast<std::size_t>(i)] == y[static_cast<std::size_t>(i)]) ++correct;
  return {static_cast<double>(correct) / static_cast<double>(eval_set.size()), true};
}

MetricValue delta_sp(const std::vector<int>& y_pred, const std::vector<int>& s,
                     const std::vector<Index>& eval_set) {
  check_eval(eval_set, s.size(), "delta_sp");
  Index pos[2] = {0, 0}, tot[2] = {0, 0};
  for (Index i : eval_set) {
    const int grp = s[static_cast<std::size_t>(i)];
    ++tot[grp];
    if (y_pred[static_cast<std::size_t>(i)] == 1) ++pos[grp];
  }
  if (tot[0] == 0 || tot[1] == 0) return {0.0, false};
  const double r1 = static_cast<double>(pos[1]) / static_cast<double>(tot[1]);
  const double r0 = static_cast<double>(pos[0]) / static_cast<double>(tot[0]);
  return {std::abs(r1 - r0), true};
}

MetricValue delta_eo(const std::vector<int>& y_pred, const std::vector<int>& y, const std::vector<int>& s,
                     const std::vector<Index>& eval_set) {
  check_eval(eval_set, s.size(), "delta_eo");
  Index pos[2] = {0, 0}, tot[2] = {0, 0};
  for (Index i : eval_set) {
    if (y[static_cast<std::size_t>(i)] != 1) continue;
    const int grp = s[static_cast<std::size_t>(i)];
    ++tot[grp];
    if (y_pred[static_cast<std::size_t>(i)] == 1) ++pos[grp];
  }
  if (tot[0] == 0 || tot[1] == 0) return {0.0, false};
  const double r1 = static_cast<double>(pos[1]) / static_cast<double>(tot[1]);
  const double r0 = static_cast<double>(pos[0]) / static_cast<double>(tot[0]);
  return {std::abs(r1 - r0), true};
}

MetricValue delta_gsp(const Matrix& scores, const std::vector<int>& s, const std::vector<Index>& eval_set) {
  check_eval(eval_set, s.size(), "delta_gsp");
  Eigen::RowVectorXd mean0 = Eigen::RowVectorXd::Zero(scores.cols());
  Eigen::RowVectorXd mean1 = Eigen::RowVectorXd::Zero(scores.cols());
  Index cnt0 = 0, cnt1 = 0;
  for (Index i : eval_set) {
    if (s[static_cast<std::size_t>(i)] == 0) {
      mean0 += scores.row(i);
      ++cnt0;
    } else {
      mean1 += scores.row(i);
      ++cnt1;
    }
  }
  if (cnt0 == 0 || cnt1 == 0) return {0.0, false};
  mean0 /= static_cast<double>(cnt0);
  mean1 /= static_cast<double>(cnt1);
  return {(mean0 - mean1).norm(), true};
}

LayerDisparity layer_disparity_probe(const std::vector<Matrix>& layers, const std::vector<int>& s) {
  if (layers.empty()) throw ShapeError("layer_disparity_probe: no layers");
  LayerDisparity out;
  std::vector<Index> all(static_cast<std::size_t>(layers.front().rows()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Index>(i);
  for (const auto& h : layers) {
    const MetricValue d = delta_gsp(h, s, all);
    if (!d.defined) throw ShapeError("layer_disparity_probe: a sensitive group is empty");
    out.delta.push_back(d.value);
  }
  constexpr double kDegenerate = 1e-9;
  constexpr double kGammaCap = 10.0;
  for (std::size_t l = 1; l < out.delta.size(); ++l) {
    const double prev = out.delta[l - 1];
    const double cur = out.delta[l];
    if (prev > kDegenerate) {
      const double gamma = std::min(cur / prev, kGammaCap);
      out.gamma_hat.push_back({gamma, true});
      out.eps_hat.push_back({cur - gamma * prev, true});
    } else {
      out.gamma_hat.push_back({0.0, false});
      out.eps_hat.push_back({0.0, false});
    }
  }
  return out;
}

std::array<Index, 4> group_cell_counts(const std::vector<int>& y, const std::vector<int>& s,
                                       const std::vector<Index>& eval_set) {
  std::array<Index, 4> cells{};
  for (Index i : eval_set)
    ++cells[static_cast<std::size_t>(2 * s[static_cast<std::size_t>(i)] + y[static_cast<std::size_t>(i)])];
  return cells;
}

std::string metrics_csv_row(const std::string& run_id, const std::string& dataset,
                            const std::string& pretrain, const std::string& mode, double lambda,
                            std::uint64_t seed, const MetricsRecord& rec) {
  std::ostringstream os;
  os.precision(17);
  auto field = [&](const MetricValue& m) {
    if (m.defined)
      os << m.value;
    else
      os << "nan";
  };
  os << run_id << "," << dataset << "," << pretrain << "," << mode << "," << lambda << "," << seed << ",";
  field(rec.acc);
  os << ",";
  field(rec.dsp);
  os << ",";
  field(rec.deo);
  os << ",";
  field(rec.dgsp);
  return os.str();
}

}  // namespace fairprompt::metrics
