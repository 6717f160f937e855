#include "fpp/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fpp/io.hpp"
#include "fpp/rng.hpp"

namespace fpp::nn {

std::vector<DatasetSample> load_dataset(const std::filesystem::path& dataset_dir,
                                        const eval::PreprocessParams& preprocess) {
  const sim::DatasetManifest manifest =
      sim::read_manifest(dataset_dir / "manifest.tsv");

  std::vector<DatasetSample> samples;
  samples.reserve(manifest.entries.size());
  for (const sim::ManifestEntry& entry : manifest.entries) {
    auto role_path = [&](const std::string& role) {
      auto it = entry.roles.find(role);
      if (it == entry.roles.end())
        throw io::IoError(dataset_dir.string(),
                          "scene " + entry.scene_id + " missing role " + role);
      return dataset_dir / it->second;
    };

    DatasetSample s;
    s.scene_id = entry.scene_id;
    s.split = entry.split;
    s.phi_low.values = io::read_fpa_grid(role_path("wrapped_f1"));
    s.phi_low.period_number = 1;

    // The highest projected frequency is the only other wrapped role here.
    int highest = 0;
    for (const auto& [role, rel] : entry.roles)
      if (role.rfind("wrapped_f", 0) == 0)
        highest = std::max(highest, std::stoi(role.substr(9)));
    s.phi_high.values = io::read_fpa_grid(role_path("wrapped_f" + std::to_string(highest)));
    s.phi_high.period_number = highest;

    s.modulation = io::read_fpa_grid(role_path("modulation"));
    s.validity = io::read_fpa_mask(role_path("validity"));
    s.k_gt = io::read_fpa_grid(role_path("k_gt"));
    s.phi_gt = io::read_fpa_grid(role_path("phi_gt"));
    s.depth_true = io::read_fpa_grid(role_path("depth_true"));

    ModulationMap mod;
    mod.modulation = s.modulation;
    mod.background = Grid(s.modulation.rows(), s.modulation.cols(), 0.0);
    s.loss_mask = eval::preprocess_mask(mod, preprocess);
    s.metric_mask = s.loss_mask;
    for (std::size_t i = 0; i < s.metric_mask.size(); ++i)
      s.metric_mask[i] = (s.metric_mask[i] && s.validity[i]) ? 1 : 0;

    samples.push_back(std::move(s));
  }
  return samples;
}

Tensor network_input(const DatasetSample& sample, bool two_channel) {
  const Grid& high = sample.phi_high.values;
  const std::size_t h = high.rows(), w = high.cols();
  Tensor input = Tensor::zeros({two_channel ? 2u : 1u, h, w});
  for (std::size_t i = 0; i < h * w; ++i)
    input.data()[i] = high[i] / M_PI;
  if (two_channel)
    for (std::size_t i = 0; i < h * w; ++i)
      input.data()[h * w + i] = sample.phi_low.values[i] / M_PI;
  return input;
}

Prediction predict(const Network& net, const DatasetSample& sample,
                   bool two_channel) {
  const Tensor k_o = net.forward(network_input(sample, two_channel));
  const Tensor k_soft =
      selfsup::soft_fringe_order(k_o, sample.phi_high.period_number);

  Prediction pred;
  pred.k_soft = k_soft.channel_as_grid();
  FringeOrderMap soft{pred.k_soft, FringeOrderMap::Kind::Soft};
  pred.order = tpu::round_order(soft, sample.phi_high.period_number);
  pred.absolute = selfsup::compose_absolute(sample.phi_high, pred.order);
  return pred;
}

namespace {

struct StageSpec {
  int stage = 1;
  int epochs = 0;
  double lr = 0.0;
  selfsup::LossWeights weights;
};

struct ForwardOutcome {
  selfsup::LossTerms terms;
  double saturation = 0.0;
};

ForwardOutcome forward_loss(const Network& net, const DatasetSample& sample,
                            const selfsup::ProjectorTables& tables,
                            const SystemGeometry& geom,
                            const selfsup::LossWeights& weights,
                            const TrainOptions& options) {
  const int a = sample.phi_high.period_number;
  const Tensor k_o = net.forward(network_input(sample, options.two_channel_input));

  std::size_t saturated = 0;
  for (double v : k_o.data())
    if (std::abs(v) > 10.0) ++saturated;

  const Tensor k_soft = selfsup::soft_fringe_order(k_o, a);
  const Tensor phi_abs = selfsup::compose_absolute(sample.phi_high, k_soft);
  selfsup::CorrespondenceField field = selfsup::correspond(phi_abs, a, geom);

  // Every preprocessed pixel stays in the loss; coordinates that wander off
  // the pattern are pinned to its edge (zero slope there). Masking them out
  // instead would hand the optimizer a degenerate optimum: push the hard
  // pixels out of bounds and empty the masked mean.
  field.x_p = clamp(field.x_p, 0.0, geom.projector_width - 1.0);
  field.in_bounds = sample.loss_mask;

  auto [synth_l, synth_h] = selfsup::synthesize_phases(field, tables);
  ForwardOutcome out;
  out.terms = selfsup::self_supervised_loss(sample.phi_low, synth_l,
                                            sample.phi_high, synth_h,
                                            sample.loss_mask, weights,
                                            options.circular_high,
                                            options.circular_low);
  out.saturation =
      static_cast<double>(saturated) / static_cast<double>(k_o.numel());
  return out;
}

double validation_accuracy(const Network& net,
                           const std::vector<const DatasetSample*>& val,
                           const TrainOptions& options) {
  if (val.empty()) return 0.0;
  double acc = 0.0;
  for (const DatasetSample* s : val) {
    const Prediction pred = predict(net, *s, options.two_channel_input);
    acc += eval::fringe_order_accuracy(pred.order.values, s->k_gt, s->metric_mask);
  }
  return acc / static_cast<double>(val.size());
}

LossSnapshot evaluate_loss(const Network& net,
                           const std::vector<const DatasetSample*>& train,
                           const selfsup::ProjectorTables& tables,
                           const SystemGeometry& geom,
                           const selfsup::LossWeights& weights,
                           const TrainOptions& options) {
  LossSnapshot snap;
  for (const DatasetSample* s : train) {
    const ForwardOutcome out =
        forward_loss(net, *s, tables, geom, weights, options);
    snap.loss1 += out.terms.loss1;
    snap.loss2 += out.terms.loss2;
    snap.total += out.terms.total.item();
  }
  const auto n = static_cast<double>(train.size());
  snap.loss1 /= n;
  snap.loss2 /= n;
  snap.total /= n;
  return snap;
}

void run_stage(Network& net, const StageSpec& stage,
               const std::vector<const DatasetSample*>& train,
               const std::vector<const DatasetSample*>& val,
               const selfsup::ProjectorTables& tables, const SystemGeometry& geom,
               const TrainOptions& options, std::vector<EpochLog>& log) {
  Adam::Options adam_options;
  adam_options.lr = stage.lr;
  adam_options.weight_decay = options.weight_decay;
  Adam adam(net.parameters(), adam_options);

  for (int epoch = 1; epoch <= stage.epochs; ++epoch) {
    EpochLog row;
    row.epoch = epoch;
    row.stage = stage.stage;
    row.lr = stage.lr;
    for (const DatasetSample* s : train) {
      adam.zero_grad();
      ForwardOutcome out =
          forward_loss(net, *s, tables, geom, stage.weights, options);
      const double total = out.terms.total.item();
      if (!std::isfinite(total))
        throw InvalidStateError("training loss is not finite");
      backward(out.terms.total);
      adam.step();
      row.loss += total;
      row.loss1 += out.terms.loss1;
      row.loss2 += out.terms.loss2;
      row.saturation_fraction += out.saturation;
    }
    const auto n = static_cast<double>(train.size());
    row.loss /= n;
    row.loss1 /= n;
    row.loss2 /= n;
    row.saturation_fraction /= n;
    row.val_order_accuracy = validation_accuracy(net, val, options);
    log.push_back(row);
  }
}

}  // namespace

TrainResult train_two_stage(const std::vector<DatasetSample>& samples,
                            const SystemGeometry& geom,
                            const NetworkConfig& config,
                            const TrainSchedule& schedule,
                            const TrainOptions& options,
                            const std::filesystem::path* checkpoint_dir,
                            const Network* resume) {
  options.weights.validate();
  std::vector<const DatasetSample*> train, val;
  for (const DatasetSample& s : samples) {
    if (s.split == "train") train.push_back(&s);
    if (s.split == "val") val.push_back(&s);
  }
  if (train.empty()) throw std::invalid_argument("training split is empty");
  const int a = train.front()->phi_high.period_number;
  for (const DatasetSample* s : train)
    if (s->phi_high.period_number != a)
      throw std::invalid_argument("samples disagree on the period number");

  SystemGeometry g = geom;
  g.period_number = a;
  const selfsup::ProjectorTables tables = selfsup::ProjectorTables::build(g);

  // Loss2-only configurations keep their single objective in both stages.
  selfsup::LossWeights stage1_weights =
      options.weights.w1 > 0.0
          ? selfsup::LossWeights{options.weights.w1, 0.0}
          : options.weights;

  TrainResult result;
  result.net = resume ? *resume : Network(config, mix_seed(options.seed, 0));

  if (!resume) {
    StageSpec stage1{1, schedule.stage1_epochs, schedule.stage1_lr, stage1_weights};
    run_stage(result.net, stage1, train, val, tables, g, options, result.log);
    result.stage1_final =
        evaluate_loss(result.net, train, tables, g, options.weights, options);
    if (checkpoint_dir) {
      save_checkpoint(result.net, *checkpoint_dir / "stage1");
      // Reload so a later resume reproduces stage 2 bit-exactly: both paths
      // pass the stage boundary through the same f32 files.
      result.net = load_checkpoint(*checkpoint_dir / "stage1");
    }
  }

  result.stage2_initial =
      evaluate_loss(result.net, train, tables, g, options.weights, options);
  StageSpec stage2{2, schedule.stage2_epochs, schedule.stage2_lr, options.weights};
  run_stage(result.net, stage2, train, val, tables, g, options, result.log);

  if (checkpoint_dir) save_checkpoint(result.net, *checkpoint_dir / "final");
  return result;
}

void write_training_log_csv(const std::filesystem::path& path,
                            const std::vector<EpochLog>& log) {
  std::ostringstream out;
  out << "epoch,stage,loss,loss1,loss2,lr,order_accuracy_on_val,sat_frac\n";
  out.precision(12);
  for (const EpochLog& row : log)
    out << row.epoch << ',' << row.stage << ',' << row.loss << ',' << row.loss1
        << ',' << row.loss2 << ',' << row.lr << ',' << row.val_order_accuracy
        << ',' << row.saturation_fraction << '\n';
  io::write_text_file(path, out.str());
}

void save_checkpoint(const Network& net, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const NetworkConfig& c = net.config();

  std::ostringstream cfg;
  cfg << "channels =";
  for (int ch : c.channels) cfg << ' ' << ch;
  cfg << "\nkernel_size = " << c.kernel_size << "\ndepth = " << c.depth
      << "\ndownsample_levels = " << c.downsample_levels
      << "\nactivation = " << to_string(c.activation)
      << "\nin_channels = " << c.in_channels << '\n';
  io::write_text_file(dir / "network.cfg", cfg.str());

  std::ostringstream index;
  for (std::size_t i = 0; i < net.parameters().size(); ++i) {
    const Tensor& p = net.parameters()[i];
    const std::string file = "param_" + std::to_string(i) + ".fpa";

    io::FpaArray array;
    // FPA holds at most 3 dims; flatten trailing dims and record the true
    // shape in the index.
    if (p.shape().size() <= 3) {
      array.shape = p.shape();
      if (array.shape.size() == 1) array.shape.push_back(1);
    } else {
      std::size_t rest = 1;
      for (std::size_t d = 1; d < p.shape().size(); ++d) rest *= p.shape()[d];
      array.shape = {p.shape()[0], rest};
    }
    array.data.resize(p.numel());
    for (std::size_t j = 0; j < p.numel(); ++j)
      array.data[j] = static_cast<float>(p.data()[j]);
    io::write_fpa(dir / file, array);

    index << net.parameter_names()[i] << '\t' << file << '\t';
    for (std::size_t d = 0; d < p.shape().size(); ++d)
      index << (d ? "," : "") << p.shape()[d];
    index << '\n';
  }
  io::write_text_file(dir / "index.tsv", index.str());
}

Network load_checkpoint(const std::filesystem::path& dir) {
  std::istringstream cfg(io::read_text_file(dir / "network.cfg"));
  NetworkConfig c;
  c.channels.clear();
  std::string line;
  while (std::getline(cfg, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    key.erase(std::remove(key.begin(), key.end(), ' '), key.end());
    std::istringstream value(line.substr(eq + 1));
    if (key == "channels") {
      int ch;
      while (value >> ch) c.channels.push_back(ch);
    } else if (key == "kernel_size") value >> c.kernel_size;
    else if (key == "depth") value >> c.depth;
    else if (key == "downsample_levels") value >> c.downsample_levels;
    else if (key == "in_channels") value >> c.in_channels;
    else if (key == "activation") {
      std::string name;
      value >> name;
      c.activation = activation_from_string(name);
    }
  }

  Network net(c, /*seed=*/0);

  std::istringstream index(io::read_text_file(dir / "index.tsv"));
  std::size_t i = 0;
  while (std::getline(index, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string name, file, shape;
    if (!std::getline(ls, name, '\t') || !std::getline(ls, file, '\t') ||
        !std::getline(ls, shape))
      throw io::IoError((dir / "index.tsv").string(), "malformed index line");
    if (i >= net.parameters().size())
      throw io::IoError(dir.string(), "checkpoint has more parameters than the network");
    if (net.parameter_names()[i] != name)
      throw io::IoError(dir.string(), "checkpoint parameter order mismatch at " + name);

    const io::FpaArray array = io::read_fpa(dir / file);
    Tensor& p = net.parameters()[i];
    if (array.data.size() != p.numel())
      throw io::IoError(dir.string(), "checkpoint size mismatch for " + name);
    for (std::size_t j = 0; j < p.numel(); ++j)
      p.data()[j] = static_cast<double>(array.data[j]);
    ++i;
  }
  if (i != net.parameters().size())
    throw io::IoError(dir.string(), "checkpoint is missing parameters");
  return net;
}

GradCheckReport finite_difference_check(const std::function<Tensor()>& loss_fn,
                                        std::vector<Tensor> params, double step,
                                        std::size_t entries_per_param,
                                        std::uint64_t seed) {
  // One backward provides every analytic gradient.
  Tensor loss = loss_fn();
  for (Tensor& p : params) p.grad().clear();
  backward(loss);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (Tensor& p : params) {
    p.impl()->ensure_grad();
    analytic.push_back(p.grad());
  }

  GradCheckReport report;
  Rng rng(seed);
  constexpr double kFloor = 1e-7;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& p = params[pi];
    const std::size_t n = p.numel();
    const std::size_t checks = std::min(entries_per_param, n);
    for (std::size_t c = 0; c < checks; ++c) {
      const auto idx = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
      const double saved = p.data()[idx];
      auto central = [&](double h) {
        p.data()[idx] = saved + h;
        const double up = loss_fn().item();
        p.data()[idx] = saved - h;
        const double down = loss_fn().item();
        p.data()[idx] = saved;
        return (up - down) / (2.0 * h);
      };
      const double fd = central(step);
      const double fd_half = central(step / 2.0);
      const double an = analytic[pi][idx];

      // Richardson consistency: on a smooth stretch the two estimates agree
      // to O(h^2); a gap means the probe straddles a kink of the piecewise-
      // linear parts (activations, L1 corners), where no central difference
      // equals the one-sided derivative the backward pass computes.
      const double gap = std::abs(fd - fd_half) /
                         std::max(std::abs(fd) + std::abs(fd_half), kFloor);
      if (gap > 3e-5) {
        report.kink_skipped++;
        continue;
      }

      report.checked++;
      if (std::abs(fd) < kFloor && std::abs(an) < kFloor) {
        report.near_zero++;  // flat region; a ratio would divide by ~0
        continue;
      }
      const double rel =
          std::abs(an - fd) / std::max(std::abs(an) + std::abs(fd), kFloor);
      report.max_rel_error = std::max(report.max_rel_error, rel);
    }
  }
  return report;
}

GradCheckReport grad_check(const NetworkConfig& config, std::uint64_t seed,
                           std::size_t size) {
  if (size > 16) throw std::invalid_argument("grad_check expects a tiny instance");
  NetworkConfig c = config;
  c.validate();

  SystemGeometry geom;
  geom.camera_width = static_cast<int>(size);
  geom.camera_height = static_cast<int>(size);
  geom.period_number = 4;
  const int a = geom.period_number;
  const selfsup::ProjectorTables tables = selfsup::ProjectorTables::build(geom);

  Rng rng(mix_seed(seed, 7));
  SceneParams params;
  params.z0 = 0.4 + 0.2 * rng.uniform();
  SceneSpec scene = sim::make_scene(SceneKind::Plane, params, geom, seed);
  scene.noise_sigma = 1.5;
  const FringeImageSet low_set =
      sim::render_scene(scene, geom, 1, 4, mix_seed(seed, 1));
  const FringeImageSet high_set =
      sim::render_scene(scene, geom, a, 4, mix_seed(seed, 2));

  Network net(c, mix_seed(seed, 3));
  DatasetSample sample;
  sample.phi_low = phase::extract_wrapped_phase(low_set);
  sample.phi_high = phase::extract_wrapped_phase(high_set);
  sample.loss_mask = Mask(size, size, 1);

  TrainOptions options;
  options.two_channel_input = c.in_channels == 2;

  // The loss is differentiable except on a measure-zero set: zero L1
  // residuals, the one-period wrap seam at x_p = W_p/2, the circular
  // residual's corners at 0 and pi, and the in-bounds boundary. Finite
  // differences are only meaningful away from those, so drop a safety band
  // around each from the mask before checking.
  {
    const Tensor k_o = net.forward(network_input(sample, options.two_channel_input));
    const Tensor k_soft = selfsup::soft_fringe_order(k_o, a);
    const Tensor phi_abs = selfsup::compose_absolute(sample.phi_high, k_soft);
    selfsup::CorrespondenceField field = selfsup::correspond(phi_abs, a, geom);
    auto [synth_l, synth_h] = selfsup::synthesize_phases(field, tables);

    constexpr double kResidualMargin = 0.05;  // rad
    constexpr double kSeamMargin = 2.0;       // projector pixels
    const double seam_col = geom.projector_width / 2.0;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < sample.loss_mask.size(); ++i) {
      const double xp = field.x_p.data()[i];
      const double r_low = synth_l.data()[i] - sample.phi_low.values[i];
      const double r_high =
          phase::wrap(synth_h.data()[i] - sample.phi_high.values[i]);
      const bool ok = field.in_bounds[i] &&
                      xp > kSeamMargin &&
                      xp < geom.projector_width - 1 - kSeamMargin &&
                      std::abs(xp - seam_col) > kSeamMargin &&
                      std::abs(r_low) > kResidualMargin &&
                      std::abs(r_high) > kResidualMargin &&
                      M_PI - std::abs(r_high) > kResidualMargin;
      sample.loss_mask[i] = ok ? 1 : 0;
      kept += ok ? 1 : 0;
    }
    if (kept < sample.loss_mask.size() / 4)
      throw InvalidStateError("grad_check could not find a smooth region");
  }

  auto loss_fn = [&]() {
    const ForwardOutcome out = forward_loss(net, sample, tables, geom,
                                            options.weights, options);
    return out.terms.total;
  };
  return finite_difference_check(loss_fn, net.parameters(), 1e-4, 4,
                                 mix_seed(seed, 4));
}

}  // namespace fpp::nn
