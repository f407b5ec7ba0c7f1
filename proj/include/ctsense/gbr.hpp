#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace ctsense {

struct DataRow {
  std::vector<double> features;
  double inlet_mm = 0.0;   // dL_I
  double outlet_mm = 0.0;  // dL_O
  double total_mm = 0.0;   // dL_all = dL_I + dL_O
  // recording metadata
  std::string sensor;
  int repetition = 0;
  std::uint64_t seed = 0;
};

struct Dataset {
  std::vector<DataRow> rows;

  std::size_t size() const { return rows.size(); }
  void validate() const;  // additivity of targets, finite features
};

enum class Target { Inlet, Outlet, Total };

std::string to_string(Target t);
double target_value(const DataRow& row, Target t);

/// Seeded shuffle, then floor(fraction * n) rows for training; disjoint and
/// exhaustive.
std::pair<Dataset, Dataset> train_test_split(const Dataset& d,
                                             double train_fraction,
                                             std::uint64_t seed);

struct TreeNode {
  int feature = -1;        // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;      // leaf output
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // node 0 is the root

  double predict(std::span<const double> features) const;
};

struct GbrParams {
  int n_estimators = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  int min_samples_leaf = 2;
};

/// CART regression tree on the given residuals: greedy variance-reduction
/// splits with midpoint thresholds between consecutive distinct values. Ties
/// break toward the lowest feature index, then the lowest threshold.
RegressionTree fit_tree(const std::vector<std::vector<double>>& features,
                        const std::vector<double>& residuals, int max_depth,
                        int min_samples_leaf = 2);

struct GradientBoostingModel {
  double init_value = 0.0;  // training-target mean
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;

  double predict(std::span<const double> features) const;

  nlohmann::json to_json() const;  // versioned document
  static GradientBoostingModel from_json(const nlohmann::json& j);
};

/// Squared-loss boosting: residuals recomputed each round against the current
/// ensemble.
GradientBoostingModel fit_gbr(const Dataset& train, Target target,
                              const GbrParams& params = {});

double mae(std::span<const double> predictions, std::span<const double> truth);

/// CSV schema: f00..fNN,dL_inlet_mm,dL_outlet_mm,dL_total_mm,sensor,
/// repetition,seed.
void write_csv(const std::string& path, const Dataset& d);
Dataset read_dataset_csv(const std::string& path);

}  // namespace ctsense
