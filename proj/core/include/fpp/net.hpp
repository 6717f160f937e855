#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fpp/ops.hpp"
#include "fpp/tensor.hpp"

namespace fpp::nn {

enum class Activation { ReLU, LeakyReLU };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation activation);

/// Scaled-down encoder/decoder backbone. downsample_levels = 0 degenerates
/// to a plain CNN; otherwise channels[i] is the width of encoder level i and
/// the decoder mirrors it with skip concatenations.
struct NetworkConfig {
  std::vector<int> channels = {8, 16, 32};  // one entry per level
  int kernel_size = 3;
  int depth = 2;  // convs per level
  int downsample_levels = 2;
  Activation activation = Activation::LeakyReLU;
  int in_channels = 1;
  // Appends a constant normalized column-coordinate channel to the first
  // and last conv inputs. Absolute projector position is what the fringe
  // order encodes; without this the net must recover position from border
  // padding alone, which converges far too slowly at the default schedule.
  bool coord_features = true;

  void validate() const;
};

class Network {
 public:
  Network() = default;
  Network(NetworkConfig config, std::uint64_t seed);

  /// phi_h as 1xHxW (or CxHxW matching in_channels); returns k_o, 1xHxW.
  Tensor forward(const Tensor& input) const;

  const NetworkConfig& config() const { return config_; }
  std::vector<Tensor>& parameters() { return params_; }
  const std::vector<Tensor>& parameters() const { return params_; }
  const std::vector<std::string>& parameter_names() const { return names_; }

  Tensor parameter(const std::string& name);

 private:
  Tensor add_param(const std::string& name, std::vector<std::size_t> shape);
  void kaiming_init(std::uint64_t seed);
  Tensor conv_block(const Tensor& x, std::size_t first_param, int convs) const;
  Tensor activate(const Tensor& x) const;

  NetworkConfig config_;
  std::vector<Tensor> params_;
  std::vector<std::string> names_;
  // Parameter index of each block's first conv, laid out at construction.
  std::vector<std::size_t> encoder_blocks_;
  std::vector<std::size_t> decoder_blocks_;
  std::size_t out_conv_ = 0;
};

}  // namespace fpp::nn
