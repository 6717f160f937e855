#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fpp/eval.hpp"
#include "fpp/geometry.hpp"
#include "fpp/net.hpp"
#include "fpp/selfsup.hpp"
#include "fpp/sim.hpp"
#include "fpp/train.hpp"

namespace fpp::cfg {

/// Flat `key = value` store with `[section]` headers; keys are held in file
/// order as "section.key". No nesting.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::filesystem::path& path);
  std::string serialize() const;

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_seed(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int> get_int_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value);

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

  friend bool operator==(const KeyValueConfig& a, const KeyValueConfig& b) {
    return a.entries_ == b.entries_;
  }

 private:
  const std::string* find(const std::string& key) const;
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Everything one reproducible run needs. Seeds are explicit; parsing fails
/// when they are missing.
struct RunConfig {
  SystemGeometry geometry;
  FrequencySet frequencies;
  int n_steps = 4;
  std::vector<sim::SceneRequest> scenes;
  nn::NetworkConfig network;
  nn::TrainSchedule schedule;
  selfsup::LossWeights weights;
  bool two_channel_input = false;
  bool circular_high = true;
  bool circular_low = true;
  double weight_decay = 1e-4;
  eval::PreprocessParams preprocess;
  std::pair<double, double> valid_range{-50.0, 50.0};
  std::uint64_t dataset_seed = 0;
  std::uint64_t train_seed = 0;
  std::string dataset_dir;
  std::string model_dir;

  static RunConfig from_kv(const KeyValueConfig& kv);
  KeyValueConfig to_kv() const;
  static RunConfig load(const std::filesystem::path& path);

  nn::TrainOptions train_options() const;
};

}  // namespace fpp::cfg
