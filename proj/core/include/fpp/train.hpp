#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fpp/eval.hpp"
#include "fpp/geometry.hpp"
#include "fpp/net.hpp"
#include "fpp/optim.hpp"
#include "fpp/selfsup.hpp"
#include "fpp/sim.hpp"

namespace fpp::nn {

/// One scene of a dataset, as the trainer consumes it.
struct DatasetSample {
  std::string scene_id;
  std::string split;
  PhaseMap phi_low;   // period 1
  PhaseMap phi_high;  // period a
  Grid modulation;
  Mask validity;      // ground-truth valid pixels
  Grid k_gt;
  Grid phi_gt;
  Grid depth_true;
  Mask loss_mask;     // preprocessing mask (self-supervised; no ground truth)
  Mask metric_mask;   // preprocessing AND validity
};

std::vector<DatasetSample> load_dataset(const std::filesystem::path& dataset_dir,
                                        const eval::PreprocessParams& preprocess);

struct TrainSchedule {
  int stage1_epochs = 20;
  int stage2_epochs = 20;
  double stage1_lr = 5e-4;
  double stage2_lr = 1e-5;
};

struct TrainOptions {
  selfsup::LossWeights weights;       // full-loss weights, default (1, 2)
  bool two_channel_input = false;     // feed (phi_h, phi_l)/pi instead of phi_h/pi
  bool circular_high = true;          // circular distance in the Loss2 residual
  bool circular_low = true;           // circular distance in the Loss1 residual
  double weight_decay = 1e-4;
  std::uint64_t seed = 1;
};

struct EpochLog {
  int epoch = 0;
  int stage = 0;
  double loss = 0.0;
  double loss1 = 0.0;
  double loss2 = 0.0;
  double lr = 0.0;
  double val_order_accuracy = 0.0;
  double saturation_fraction = 0.0;  // |k_o| > 10, vanishing-gradient diagnostic
};

struct LossSnapshot {
  double loss1 = 0.0;
  double loss2 = 0.0;
  double total = 0.0;
};

struct TrainResult {
  Network net;
  std::vector<EpochLog> log;
  LossSnapshot stage1_final;    // raw terms measured with stage-1 final weights
  LossSnapshot stage2_initial;  // measured at the start of stage 2
};

/// Stage 1 drops the Loss2 term (weights (w1, 0)); stage 2 resumes from the
/// stage-1 checkpoint with the full loss. A Loss2-only configuration
/// (w1 == 0) keeps its single objective in both stages. Writes checkpoints
/// under checkpoint_dir when given; with `resume`, skips stage 1 and starts
/// stage 2 from the given weights.
TrainResult train_two_stage(const std::vector<DatasetSample>& samples,
                            const SystemGeometry& geom,
                            const NetworkConfig& config,
                            const TrainSchedule& schedule,
                            const TrainOptions& options,
                            const std::filesystem::path* checkpoint_dir = nullptr,
                            const Network* resume = nullptr);

void write_training_log_csv(const std::filesystem::path& path,
                            const std::vector<EpochLog>& log);

/// Builds the network input tensor: phi_h/pi, optionally stacked with
/// phi_l/pi as a second channel.
Tensor network_input(const DatasetSample& sample, bool two_channel);

/// Inference: forward, soft order, rounded integer order.
struct Prediction {
  Grid k_soft;
  FringeOrderMap order;        // integer
  AbsolutePhaseMap absolute;   // phi_h + 2*pi*k
};
Prediction predict(const Network& net, const DatasetSample& sample,
                   bool two_channel);

/// FPA-per-parameter checkpoint with a text index and the network config.
void save_checkpoint(const Network& net, const std::filesystem::path& dir);
Network load_checkpoint(const std::filesystem::path& dir);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t near_zero = 0;     // both analytic and FD below floor; ratio skipped
  std::size_t kink_skipped = 0;  // FD at h and h/2 disagree: the probe straddles
                                 // a kink (activation or L1 corner), where
                                 // central differences are not the derivative
};

/// Central-difference check of d loss / d params on a caller-supplied loss.
GradCheckReport finite_difference_check(const std::function<Tensor()>& loss_fn,
                                        std::vector<Tensor> params, double step,
                                        std::size_t entries_per_param,
                                        std::uint64_t seed);

/// The full pipeline check: CNN -> soft order -> compose -> correspond ->
/// circular bilinear synthesis -> weighted L1 loss, on a small random scene.
GradCheckReport grad_check(const NetworkConfig& config, std::uint64_t seed,
                           std::size_t size = 16);

}  // namespace fpp::nn
