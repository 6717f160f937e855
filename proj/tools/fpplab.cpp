#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "fpp/ablation.hpp"
#include "fpp/config.hpp"
#include "fpp/io.hpp"
#include "fpp/train.hpp"

namespace fs = std::filesystem;
using namespace fpp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exclusive lock on an output directory; one run per directory at a time.
class OutputLock {
 public:
  explicit OutputLock(const fs::path& dir) : path_(dir / ".fpplab.lock") {
    fs::create_directories(dir);
    FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f)
      throw io::IoError(path_.string(),
                        "output directory is locked by another run");
    std::fclose(f);
  }
  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
};

cfg::RunConfig load_config(const std::string& path) {
  if (path.empty()) throw UsageError("--config is required");
  return cfg::RunConfig::load(path);
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed) {
  const cfg::RunConfig config = load_config(config_path);
  OutputLock lock{fs::path(out_dir)};
  const std::uint64_t dataset_seed = seed.value_or(config.dataset_seed);
  sim::make_dataset(config.scenes, config.geometry, config.frequencies,
                    config.n_steps, dataset_seed, out_dir);
  std::cout << "dataset written to " << out_dir << " (" << config.scenes.size()
            << " scenes)\n";
  return kExitOk;
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              const std::string& dataset_dir_arg, const std::string& model_path,
              std::optional<std::uint64_t> seed, bool stage1_only) {
  const cfg::RunConfig config = load_config(config_path);
  const std::string dataset_dir =
      !dataset_dir_arg.empty() ? dataset_dir_arg : config.dataset_dir;
  if (dataset_dir.empty())
    throw UsageError("no dataset: pass DATASET_DIR or set paths.dataset_dir");

  OutputLock lock{fs::path(out_dir)};
  const std::vector<nn::DatasetSample> samples =
      nn::load_dataset(dataset_dir, config.preprocess);

  nn::TrainOptions options = config.train_options();
  if (seed) options.seed = *seed;
  nn::TrainSchedule schedule = config.schedule;
  if (stage1_only) schedule.stage2_epochs = 0;

  const fs::path checkpoints = fs::path(out_dir) / "checkpoints";
  nn::Network resumed;
  const nn::Network* resume = nullptr;
  if (!model_path.empty()) {
    resumed = nn::load_checkpoint(model_path);
    resume = &resumed;
  }

  const nn::TrainResult result =
      nn::train_two_stage(samples, config.geometry, config.network, schedule,
                          options, &checkpoints, resume);
  nn::write_training_log_csv(fs::path(out_dir) / "training_log.csv", result.log);
  io::write_text_file(fs::path(out_dir) / "run_config.cfg",
                      config.to_kv().serialize());
  if (!result.log.empty()) {
    const nn::EpochLog& last = result.log.back();
    std::cout << "final stage " << last.stage << " loss " << last.loss
              << ", val order accuracy " << last.val_order_accuracy << '\n';
  }
  std::cout << "checkpoint written to " << (checkpoints / "final").string() << '\n';
  return kExitOk;
}

PhaseMap load_phase(const fs::path& path, int period) {
  PhaseMap map;
  map.values = io::read_fpa_grid(path);
  map.period_number = period;
  return map;
}

void write_unwrap_outputs(const fs::path& out_dir, const AbsolutePhaseMap& abs,
                          const Grid& k, const SystemGeometry& geom) {
  io::write_fpa(out_dir / "phi.fpa", abs.values);
  io::write_fpa(out_dir / "k.fpa", k);
  AbsolutePhaseMap unit = abs;
  unit.period_number = 1;
  for (double& v : unit.values) v /= abs.period_number;
  io::write_fpa(out_dir / "depth.fpa", sim::phase_to_height(unit, geom));
}

int cmd_unwrap(const std::string& config_path, const std::string& out_dir,
               const std::string& method, const std::string& model_path,
               const std::vector<std::string>& inputs) {
  const cfg::RunConfig config = load_config(config_path);
  OutputLock lock{fs::path(out_dir)};
  const int a = config.geometry.period_number;

  if (method == "mftpu") {
    if (inputs.size() != config.frequencies.periods.size())
      throw UsageError("mftpu needs one wrapped map per configured frequency");
    std::vector<PhaseMap> wrapped;
    for (std::size_t i = 0; i < inputs.size(); ++i)
      wrapped.push_back(load_phase(inputs[i], config.frequencies.periods[i]));
    const tpu::HierarchicalResult result =
        tpu::unwrap_hierarchical(config.frequencies, wrapped);
    write_unwrap_outputs(out_dir, result.absolute, result.order.values,
                         config.geometry);
    std::cout << "mftpu: " << result.out_of_range << " out-of-range orders\n";
    return kExitOk;
  }

  if (method == "dftpu") {
    if (inputs.size() != 2)
      throw UsageError("dftpu needs exactly 2 wrapped maps (unit, high)");
    const PhaseMap low = load_phase(inputs[0], 1);
    const PhaseMap high = load_phase(inputs[1], a);
    const tpu::TwoFreqResult result =
        tpu::unwrap_two_freq(tpu::unit_absolute_phase(low), high, a);
    write_unwrap_outputs(out_dir, result.absolute, result.order.values,
                         config.geometry);
    std::cout << "dftpu: " << result.out_of_range << " out-of-range orders\n";
    return kExitOk;
  }

  if (method == "selfsup") {
    if (model_path.empty()) throw UsageError("selfsup needs --model CHECKPOINT");
    const nn::Network net = nn::load_checkpoint(model_path);
    const bool two_channel = net.config().in_channels == 2;
    if (inputs.size() != (two_channel ? 2u : 1u))
      throw UsageError(two_channel
                           ? "this model needs 2 inputs: high, low wrapped maps"
                           : "this model needs 1 input: the high wrapped map");
    nn::DatasetSample sample;
    sample.phi_high = load_phase(inputs[0], a);
    sample.phi_low.period_number = 1;
    sample.phi_low.values = two_channel
                                ? io::read_fpa_grid(inputs[1])
                                : Grid(sample.phi_high.values.rows(),
                                       sample.phi_high.values.cols(), 0.0);
    const nn::Prediction pred = nn::predict(net, sample, two_channel);
    write_unwrap_outputs(out_dir, pred.absolute, pred.order.values,
                         config.geometry);
    io::write_fpa(fs::path(out_dir) / "k_soft.fpa", pred.k_soft);
    return kExitOk;
  }

  throw UsageError("unknown method: " + method + " (mftpu|dftpu|selfsup)");
}

int cmd_eval(const std::string& config_path, const std::string& out_dir,
             const std::vector<std::string>& inputs) {
  if (inputs.size() != 3) throw UsageError("eval needs PRED TRUTH MASK");
  const cfg::RunConfig config = load_config(config_path);
  OutputLock lock{fs::path(out_dir)};

  const Grid pred = io::read_fpa_grid(inputs[0]);
  const Grid truth = io::read_fpa_grid(inputs[1]);
  const Mask mask = io::read_fpa_mask(inputs[2]);
  const double rmse = eval::depth_rmse(pred, truth, mask, config.valid_range);

  std::ostringstream csv;
  csv.precision(9);
  csv << "metric,value\n";
  csv << "depth_rmse_mm," << rmse << '\n';
  csv << "masked_pixels," << count_true(mask) << '\n';
  io::write_text_file(fs::path(out_dir) / "metrics.csv", csv.str());
  std::cout << "depth RMSE " << rmse << " mm\n";
  return kExitOk;
}

int cmd_ablate(const std::string& config_path, const std::string& out_dir,
               const std::string& dataset_dir_arg, bool parallel) {
  const cfg::RunConfig config = load_config(config_path);
  const std::string dataset_dir =
      !dataset_dir_arg.empty() ? dataset_dir_arg : config.dataset_dir;
  if (dataset_dir.empty())
    throw UsageError("no dataset: pass DATASET_DIR or set paths.dataset_dir");

  OutputLock lock{fs::path(out_dir)};
  const std::vector<nn::DatasetSample> samples =
      nn::load_dataset(dataset_dir, config.preprocess);
  const eval::AblationResult result = eval::run_ablation(
      samples, config.geometry, config.network, config.schedule,
      config.train_options(), config.valid_range, parallel);
  write_ablation_csv(fs::path(out_dir) / "ablation.csv", result);
  for (std::size_t i = 0; i < result.runs.size(); ++i)
    nn::write_training_log_csv(
        fs::path(out_dir) / ("ablation_log_" + std::to_string(i + 1) + ".csv"),
        result.runs[i].log);
  for (const eval::AblationRow& row : result.rows)
    std::cout << '#' << row.id << " rmse " << row.depth_rmse << " mm, accuracy "
              << row.order_accuracy << '\n';
  return kExitOk;
}

int cmd_plot(const std::string& out_dir, const std::vector<std::string>& inputs) {
  if (inputs.empty()) throw UsageError("plot needs at least one FPA array");
  OutputLock lock{fs::path(out_dir)};
  for (const std::string& input : inputs) {
    const Grid grid = io::read_fpa_grid(input);
    const std::string stem = fs::path(input).stem().string();
    io::write_pgm(fs::path(out_dir) / (stem + ".pgm"), grid);
    io::write_histogram_csv(fs::path(out_dir) / (stem + "_hist.csv"), grid, 64);
  }
  std::cout << inputs.size() << " arrays exported to " << out_dir << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fpplab: fringe projection phase-unwrapping lab"};
  app.require_subcommand(1);

  std::string config_path, out_dir, method, model_path, dataset_dir;
  std::vector<std::string> inputs;
  std::optional<std::uint64_t> seed;
  bool stage1_only = false, parallel = false;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* opt = cmd->add_option("--config", config_path, "run configuration file");
    if (needs_config) opt->required();
    cmd->add_option("--out", out_dir, "output directory")->required();
    return cmd;
  };

  auto* simulate = add_common(app.add_subcommand("simulate", "render a dataset"), true);
  simulate->add_option("--seed", seed, "override the dataset seed");

  auto* train = add_common(app.add_subcommand("train", "two-stage training"), true);
  train->add_option("dataset", dataset_dir, "dataset directory");
  train->add_option("--seed", seed, "override the training seed");
  train->add_option("--model", model_path, "resume stage 2 from this checkpoint");
  train->add_flag("--stage1-only", stage1_only, "stop after stage 1");

  auto* unwrap = add_common(app.add_subcommand("unwrap", "phase unwrapping"), true);
  unwrap->add_option("--method", method, "mftpu|dftpu|selfsup")->required();
  unwrap->add_option("--model", model_path, "checkpoint for selfsup");
  unwrap->add_option("inputs", inputs, "wrapped-phase FPA files");

  auto* evalc = add_common(app.add_subcommand("eval", "depth metrics"), true);
  evalc->add_option("inputs", inputs, "PRED TRUTH MASK FPA files");

  auto* ablate = add_common(app.add_subcommand("ablate", "six-configuration study"), true);
  ablate->add_option("dataset", dataset_dir, "dataset directory");
  ablate->add_flag("--parallel", parallel, "train configurations in parallel");

  auto* plot = add_common(app.add_subcommand("plot", "PGM/histogram exports"), false);
  plot->add_option("inputs", inputs, "FPA arrays");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, out_dir, seed);
    if (train->parsed())
      return cmd_train(config_path, out_dir, dataset_dir, model_path, seed,
                       stage1_only);
    if (unwrap->parsed())
      return cmd_unwrap(config_path, out_dir, method, model_path, inputs);
    if (evalc->parsed()) return cmd_eval(config_path, out_dir, inputs);
    if (ablate->parsed())
      return cmd_ablate(config_path, out_dir, dataset_dir, parallel);
    if (plot->parsed()) return cmd_plot(out_dir, inputs);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const io::IoError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const nn::InvalidStateError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
}
