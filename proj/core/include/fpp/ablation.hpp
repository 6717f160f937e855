#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fpp/eval.hpp"
#include "fpp/train.hpp"

namespace fpp::eval {

struct AblationRow {
  int id = 0;                      // 1..6
  std::string input;               // "high" or "high+low"
  std::string loss;                // "loss1", "loss2" or "loss1+loss2"
  double depth_rmse = 0.0;         // held-out, all qualifying pixels
  double depth_rmse_clipped = 0.0; // excluding wrong-order pixels
  double order_accuracy = 0.0;
  double order_variance = 0.0;     // predicted k over masked pixels
  double order_variance_gt = 0.0;
};

struct AblationResult {
  std::vector<AblationRow> rows;
  std::vector<nn::TrainResult> runs;  // one per row, same order
};

/// Trains and evaluates the six input/loss configurations on the same
/// dataset with identical seeds: #1 high/L1, #2 high/L2, #3 high+low/L1,
/// #4 high+low/L2, #5 high+low/L1+L2, #6 high/L1+L2 (the full method).
AblationResult run_ablation(const std::vector<nn::DatasetSample>& samples,
                            const SystemGeometry& geom,
                            const nn::NetworkConfig& base_config,
                            const nn::TrainSchedule& schedule,
                            const nn::TrainOptions& base_options,
                            std::pair<double, double> valid_range = {-50.0, 50.0},
                            bool parallel = false);

void write_ablation_csv(const std::filesystem::path& path,
                        const AblationResult& result);

/// Held-out metrics of a trained network on one dataset split.
struct SplitMetrics {
  double depth_rmse = 0.0;
  double depth_rmse_clipped = 0.0;
  double order_accuracy = 0.0;
  double order_variance = 0.0;
  double order_variance_gt = 0.0;
};

SplitMetrics evaluate_split(const nn::Network& net,
                            const std::vector<nn::DatasetSample>& samples,
                            const std::string& split, const SystemGeometry& geom,
                            bool two_channel,
                            std::pair<double, double> valid_range);

/// Number of worker threads: hardware concurrency capped by FPPLAB_THREADS.
unsigned max_threads();

}  // namespace fpp::eval
