#include "fpp/ablation.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

#include "fpp/io.hpp"

namespace fpp::eval {

unsigned max_threads() {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("FPPLAB_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && static_cast<unsigned>(cap) < n) n = static_cast<unsigned>(cap);
  }
  return n;
}

SplitMetrics evaluate_split(const nn::Network& net,
                            const std::vector<nn::DatasetSample>& samples,
                            const std::string& split, const SystemGeometry& geom,
                            bool two_channel,
                            std::pair<double, double> valid_range) {
  double sq = 0.0, sq_clipped = 0.0;
  double k_sum = 0.0, k_sum2 = 0.0, gt_sum = 0.0, gt_sum2 = 0.0;
  std::size_t count = 0, count_clipped = 0, hits = 0, masked = 0;

  for (const nn::DatasetSample& s : samples) {
    if (s.split != split) continue;
    const nn::Prediction pred = nn::predict(net, s, two_channel);

    AbsolutePhaseMap unit = pred.absolute;
    unit.period_number = 1;
    for (double& v : unit.values) v /= s.phi_high.period_number;
    const Grid depth = sim::phase_to_height(unit, geom);

    for (std::size_t i = 0; i < depth.size(); ++i) {
      if (!s.metric_mask[i]) continue;
      ++masked;
      const double kp = pred.order.values[i];
      k_sum += kp;
      k_sum2 += kp * kp;
      gt_sum += s.k_gt[i];
      gt_sum2 += s.k_gt[i] * s.k_gt[i];
      const bool order_ok = kp == s.k_gt[i];
      if (order_ok) ++hits;
      if (s.depth_true[i] < valid_range.first || s.depth_true[i] > valid_range.second)
        continue;
      const double d = depth[i] - s.depth_true[i];
      sq += d * d;
      ++count;
      if (order_ok) {
        sq_clipped += d * d;
        ++count_clipped;
      }
    }
  }
  if (masked == 0 || count == 0)
    throw std::invalid_argument("evaluate_split: no qualifying pixels in split " + split);

  SplitMetrics m;
  m.depth_rmse = std::sqrt(sq / static_cast<double>(count));
  m.depth_rmse_clipped =
      count_clipped ? std::sqrt(sq_clipped / static_cast<double>(count_clipped))
                    : std::numeric_limits<double>::quiet_NaN();
  m.order_accuracy = static_cast<double>(hits) / static_cast<double>(masked);
  const double n = static_cast<double>(masked);
  m.order_variance = k_sum2 / n - (k_sum / n) * (k_sum / n);
  m.order_variance_gt = gt_sum2 / n - (gt_sum / n) * (gt_sum / n);
  return m;
}

namespace {

struct ConfigSpec {
  int id;
  bool two_channel;
  bool use_loss1;
  bool use_loss2;
};

constexpr ConfigSpec kConfigs[] = {
    {1, false, true, false}, {2, false, false, true}, {3, true, true, false},
    {4, true, false, true},  {5, true, true, true},   {6, false, true, true},
};

}  // namespace

AblationResult run_ablation(const std::vector<nn::DatasetSample>& samples,
                            const SystemGeometry& geom,
                            const nn::NetworkConfig& base_config,
                            const nn::TrainSchedule& schedule,
                            const nn::TrainOptions& base_options,
                            std::pair<double, double> valid_range,
                            bool parallel) {
  AblationResult result;
  result.rows.resize(std::size(kConfigs));
  result.runs.resize(std::size(kConfigs));

  auto run_one = [&](std::size_t idx) {
    const ConfigSpec& spec = kConfigs[idx];
    nn::NetworkConfig config = base_config;
    config.in_channels = spec.two_channel ? 2 : 1;
    nn::TrainOptions options = base_options;
    options.two_channel_input = spec.two_channel;
    options.weights.w1 = spec.use_loss1 ? base_options.weights.w1 : 0.0;
    options.weights.w2 = spec.use_loss2 ? base_options.weights.w2 : 0.0;

    result.runs[idx] =
        nn::train_two_stage(samples, geom, config, schedule, options);
    const SplitMetrics metrics =
        evaluate_split(result.runs[idx].net, samples, "val", geom,
                       spec.two_channel, valid_range);

    AblationRow& row = result.rows[idx];
    row.id = spec.id;
    row.input = spec.two_channel ? "high+low" : "high";
    row.loss = spec.use_loss1 && spec.use_loss2
                   ? "loss1+loss2"
                   : (spec.use_loss1 ? "loss1" : "loss2");
    row.depth_rmse = metrics.depth_rmse;
    row.depth_rmse_clipped = metrics.depth_rmse_clipped;
    row.order_accuracy = metrics.order_accuracy;
    row.order_variance = metrics.order_variance;
    row.order_variance_gt = metrics.order_variance_gt;
  };

  if (parallel && max_threads() > 1) {
    std::vector<std::exception_ptr> errors(std::size(kConfigs));
    std::vector<std::thread> workers;
    for (std::size_t idx = 0; idx < std::size(kConfigs); ++idx)
      workers.emplace_back([&, idx] {
        try {
          run_one(idx);
        } catch (...) {
          errors[idx] = std::current_exception();
        }
      });
    for (std::thread& t : workers) t.join();
    for (const std::exception_ptr& e : errors)
      if (e) std::rethrow_exception(e);
  } else {
    for (std::size_t idx = 0; idx < std::size(kConfigs); ++idx) run_one(idx);
  }
  return result;
}

void write_ablation_csv(const std::filesystem::path& path,
                        const AblationResult& result) {
  std::ostringstream out;
  out << "id,input,loss,depth_rmse_mm,depth_rmse_clipped_mm,order_accuracy,"
         "order_variance\n";
  out.precision(9);
  for (const AblationRow& row : result.rows)
    out << '#' << row.id << ',' << row.input << ',' << row.loss << ','
        << row.depth_rmse << ',' << row.depth_rmse_clipped << ','
        << row.order_accuracy << ',' << row.order_variance << '\n';
  io::write_text_file(path, out.str());
}

}  // namespace fpp::eval
