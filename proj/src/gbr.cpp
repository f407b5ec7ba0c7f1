#include "ctsense/gbr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ctsense {

void Dataset::validate() const {
  for (const auto& r : rows) {
    if (std::abs(r.total_mm - (r.inlet_mm + r.outlet_mm)) > 1e-9)
      throw std::invalid_argument("dL_all must equal dL_I + dL_O");
    for (double f : r.features)
      if (!std::isfinite(f))
        throw std::invalid_argument("non-finite feature value");
  }
}

std::string to_string(Target t) {
  switch (t) {
    case Target::Inlet: return "inlet";
    case Target::Outlet: return "outlet";
    case Target::Total: return "total";
  }
  throw std::logic_error("unreachable");
}

double target_value(const DataRow& row, Target t) {
  switch (t) {
    case Target::Inlet: return row.inlet_mm;
    case Target::Outlet: return row.outlet_mm;
    case Target::Total: return row.total_mm;
  }
  throw std::logic_error("unreachable");
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& d,
                                             double train_fraction,
                                             std::uint64_t seed) {
  if (d.rows.empty()) throw std::invalid_argument("empty dataset");
  std::vector<std::size_t> order(d.rows.size());
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates with explicit modulo draws keeps the partition portable.
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i)
    std::swap(order[i], order[rng() % (i + 1)]);

  const std::size_t n_train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(d.rows.size())));
  Dataset train, test;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_train ? train : test).rows.push_back(d.rows[order[i]]);
  return {std::move(train), std::move(test)};
}

double RegressionTree::predict(std::span<const double> features) const {
  int idx = 0;
  while (nodes[idx].feature >= 0) {
    const TreeNode& n = nodes[idx];
    idx = features[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[idx].value;
}

namespace {

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;  // SSE reduction
};

double subset_mean(const std::vector<double>& y,
                   const std::vector<int>& idx) {
  double s = 0.0;
  for (int i : idx) s += y[i];
  return s / static_cast<double>(idx.size());
}

// Best variance-reduction split over all (feature, midpoint) candidates.
SplitChoice best_split(const std::vector<std::vector<double>>& x,
                       const std::vector<double>& y,
                       const std::vector<int>& idx) {
  const int n_features = static_cast<int>(x.front().size());
  const std::size_t n = idx.size();

  double total = 0.0, total_sq = 0.0;
  for (int i : idx) {
    total += y[i];
    total_sq += y[i] * y[i];
  }
  const double parent_sse = total_sq - total * total / static_cast<double>(n);

  SplitChoice best;
  std::vector<std::pair<double, double>> vals(n);  // (feature value, target)
  for (int f = 0; f < n_features; ++f) {
    for (std::size_t k = 0; k < n; ++k)
      vals[k] = {x[idx[k]][f], y[idx[k]]};
    std::sort(vals.begin(), vals.end());

    double left_sum = 0.0, left_sq = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      left_sum += vals[k].second;
      left_sq += vals[k].second * vals[k].second;
      if (vals[k].first == vals[k + 1].first) continue;
      const std::size_t n_left = k + 1;
      const std::size_t n_right = n - n_left;
      const double right_sum = total - left_sum;
      const double right_sq = total_sq - left_sq;
      const double sse =
          (left_sq - left_sum * left_sum / static_cast<double>(n_left)) +
          (right_sq - right_sum * right_sum / static_cast<double>(n_right));
      const double gain = parent_sse - sse;
      if (gain > best.gain + 1e-12) {
        best.found = true;
        best.feature = f;
        best.threshold = 0.5 * (vals[k].first + vals[k + 1].first);
        best.gain = gain;
      }
    }
  }
  return best;
}

int grow(std::vector<TreeNode>& nodes, const std::vector<std::vector<double>>& x,
         const std::vector<double>& y, const std::vector<int>& idx, int depth,
         int max_depth, int min_samples_leaf) {
  const int me = static_cast<int>(nodes.size());
  nodes.emplace_back();

  // Nodes smaller than min_samples_leaf (or at depth) emit the mean.
  SplitChoice split;
  if (depth < max_depth &&
      idx.size() >= std::max<std::size_t>(2, min_samples_leaf))
    split = best_split(x, y, idx);

  if (!split.found) {
    nodes[me].value = subset_mean(y, idx);
    return me;
  }

  std::vector<int> left_idx, right_idx;
  for (int i : idx)
    (x[i][split.feature] <= split.threshold ? left_idx : right_idx)
        .push_back(i);

  nodes[me].feature = split.feature;
  nodes[me].threshold = split.threshold;
  const int l =
      grow(nodes, x, y, left_idx, depth + 1, max_depth, min_samples_leaf);
  const int r =
      grow(nodes, x, y, right_idx, depth + 1, max_depth, min_samples_leaf);
  nodes[me].left = l;
  nodes[me].right = r;
  return me;
}

}  // namespace

RegressionTree fit_tree(const std::vector<std::vector<double>>& features,
                        const std::vector<double>& residuals, int max_depth,
                        int min_samples_leaf) {
  if (features.empty() || features.size() != residuals.size())
    throw std::invalid_argument("tree fit needs matching non-empty data");
  RegressionTree tree;
  std::vector<int> idx(features.size());
  std::iota(idx.begin(), idx.end(), 0);
  grow(tree.nodes, features, residuals, idx, 0, max_depth, min_samples_leaf);
  return tree;
}

double GradientBoostingModel::predict(std::span<const double> features) const {
  double acc = 0.0;
  for (const auto& t : trees) acc += t.predict(features);
  return init_value + learning_rate * acc;
}

GradientBoostingModel fit_gbr(const Dataset& train, Target target,
                              const GbrParams& params) {
  if (train.rows.empty()) throw std::invalid_argument("empty training set");

  std::vector<std::vector<double>> x;
  std::vector<double> y;
  x.reserve(train.rows.size());
  for (const auto& r : train.rows) {
    x.push_back(r.features);
    y.push_back(target_value(r, target));
  }

  GradientBoostingModel model;
  model.learning_rate = params.learning_rate;
  model.init_value =
      std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());

  std::vector<double> pred(y.size(), model.init_value);
  std::vector<double> residuals(y.size());
  for (int round = 0; round < params.n_estimators; ++round) {
    for (std::size_t i = 0; i < y.size(); ++i) residuals[i] = y[i] - pred[i];
    RegressionTree tree =
        fit_tree(x, residuals, params.max_depth, params.min_samples_leaf);
    for (std::size_t i = 0; i < y.size(); ++i)
      pred[i] += params.learning_rate * tree.predict(x[i]);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

double mae(std::span<const double> predictions, std::span<const double> truth) {
  if (predictions.size() != truth.size() || predictions.empty())
    throw std::invalid_argument("mae needs equal-length non-empty inputs");
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    acc += std::abs(predictions[i] - truth[i]);
  return acc / static_cast<double>(predictions.size());
}

namespace {

nlohmann::json tree_to_json(const RegressionTree& t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : t.nodes) {
    if (n.feature < 0) {
      nodes.push_back({{"value", n.value}});
    } else {
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right}});
    }
  }
  return nodes;
}

RegressionTree tree_from_json(const nlohmann::json& j) {
  RegressionTree t;
  for (const auto& jn : j) {
    TreeNode n;
    if (jn.contains("feature")) {
      jn.at("feature").get_to(n.feature);
      jn.at("threshold").get_to(n.threshold);
      jn.at("left").get_to(n.left);
      jn.at("right").get_to(n.right);
    } else {
      jn.at("value").get_to(n.value);
    }
    t.nodes.push_back(n);
  }
  return t;
}

}  // namespace

nlohmann::json GradientBoostingModel::to_json() const {
  nlohmann::json trees_json = nlohmann::json::array();
  for (const auto& t : trees) trees_json.push_back(tree_to_json(t));
  return {{"format_version", 1},
          {"init_value", init_value},
          {"learning_rate", learning_rate},
          {"trees", trees_json}};
}

GradientBoostingModel GradientBoostingModel::from_json(
    const nlohmann::json& j) {
  if (j.value("format_version", 0) != 1)
    throw std::runtime_error("unsupported model format version");
  GradientBoostingModel m;
  j.at("init_value").get_to(m.init_value);
  j.at("learning_rate").get_to(m.learning_rate);
  for (const auto& jt : j.at("trees")) m.trees.push_back(tree_from_json(jt));
  return m;
}

void write_csv(const std::string& path, const Dataset& d) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  const std::size_t n_feat = d.rows.empty() ? 0 : d.rows.front().features.size();
  for (std::size_t i = 0; i < n_feat; ++i)
    std::fprintf(f, "f%02zu,", i);
  std::fprintf(f, "dL_inlet_mm,dL_outlet_mm,dL_total_mm,sensor,repetition,seed\n");
  for (const auto& r : d.rows) {
    // %.17g round-trips IEEE doubles exactly
    for (double v : r.features) std::fprintf(f, "%.17g,", v);
    std::fprintf(f, "%.17g,%.17g,%.17g,%s,%d,%llu\n", r.inlet_mm, r.outlet_mm,
                 r.total_mm, r.sensor.c_str(), r.repetition,
                 static_cast<unsigned long long>(r.seed));
  }
  std::fclose(f);
}

Dataset read_dataset_csv(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "r");
  if (!f) throw std::runtime_error("cannot open: " + path);
  Dataset d;
  char line[16384];
  bool header = true;
  std::size_t n_feat = 0;
  while (std::fgets(line, sizeof line, f)) {
    std::string row(line);
    while (!row.empty() && (row.back() == '\n' || row.back() == '\r'))
      row.pop_back();
    if (row.empty()) continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = row.find(',', pos);
      cells.push_back(row.substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (header) {
      if (cells.size() < 7) {
        std::fclose(f);
        throw std::runtime_error("dataset CSV header too short");
      }
      n_feat = cells.size() - 6;
      header = false;
      continue;
    }
    if (cells.size() != n_feat + 6) {
      std::fclose(f);
      throw std::runtime_error("dataset CSV row width mismatch");
    }
    DataRow r;
    for (std::size_t i = 0; i < n_feat; ++i)
      r.features.push_back(std::stod(cells[i]));
    r.inlet_mm = std::stod(cells[n_feat]);
    r.outlet_mm = std::stod(cells[n_feat + 1]);
    r.total_mm = std::stod(cells[n_feat + 2]);
    r.sensor = cells[n_feat + 3];
    r.repetition = std::stoi(cells[n_feat + 4]);
    r.seed = std::stoull(cells[n_feat + 5]);
    d.rows.push_back(std::move(r));
  }
  std::fclose(f);
  d.validate();
  return d;
}

}  // namespace ctsense
