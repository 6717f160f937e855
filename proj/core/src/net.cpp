#include "fpp/net.hpp"

#include <cmath>
#include <stdexcept>

#include "fpp/rng.hpp"

namespace fpp::nn {

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "leaky_relu") return Activation::LeakyReLU;
  throw std::invalid_argument("unknown activation: " + name);
}

std::string to_string(Activation activation) {
  return activation == Activation::ReLU ? "relu" : "leaky_relu";
}

void NetworkConfig::validate() const {
  if (kernel_size < 1 || kernel_size % 2 == 0)
    throw std::invalid_argument("kernel size must be odd and positive");
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  if (downsample_levels < 0)
    throw std::invalid_argument("downsample_levels must be >= 0");
  if (static_cast<int>(channels.size()) != downsample_levels + 1)
    throw std::invalid_argument(
        "channels must list one width per level (downsample_levels + 1)");
  for (int c : channels)
    if (c < 1) throw std::invalid_argument("channel widths must be positive");
  if (in_channels < 1) throw std::invalid_argument("in_channels must be >= 1");
}

Network::Network(NetworkConfig config, std::uint64_t seed)
    : config_(std::move(config)) {
  config_.validate();
  const int k = config_.kernel_size;
  const int levels = config_.downsample_levels;
  const int coord = config_.coord_features ? 2 : 0;

  auto add_block = [&](const std::string& tag, int in_ch, int out_ch) {
    const std::size_t first = params_.size();
    for (int d = 0; d < config_.depth; ++d) {
      const int ic = d == 0 ? in_ch : out_ch;
      add_param(tag + ".conv" + std::to_string(d) + ".weight",
                {static_cast<std::size_t>(out_ch), static_cast<std::size_t>(ic),
                 static_cast<std::size_t>(k), static_cast<std::size_t>(k)});
      add_param(tag + ".conv" + std::to_string(d) + ".bias",
                {static_cast<std::size_t>(out_ch)});
    }
    return first;
  };

  for (int level = 0; level <= levels; ++level) {
    const int in_ch = level == 0 ? config_.in_channels + coord
                                 : config_.channels[level - 1];
    encoder_blocks_.push_back(
        add_block("enc" + std::to_string(level), in_ch, config_.channels[level]));
  }
  for (int level = levels - 1; level >= 0; --level) {
    // Decoder input: upsampled deeper features concatenated with the skip.
    const int in_ch = config_.channels[level + 1] + config_.channels[level];
    decoder_blocks_.push_back(
        add_block("dec" + std::to_string(level), in_ch, config_.channels[level]));
  }
  out_conv_ = params_.size();
  add_param("out.weight",
            {1, static_cast<std::size_t>(config_.channels[0] + coord),
             static_cast<std::size_t>(k), static_cast<std::size_t>(k)});
  add_param("out.bias", {1});

  kaiming_init(seed);
}

Tensor Network::add_param(const std::string& name, std::vector<std::size_t> shape) {
  Tensor t = Tensor::zeros(std::move(shape), /*requires_grad=*/true);
  params_.push_back(t);
  names_.push_back(name);
  return t;
}

Tensor Network::parameter(const std::string& name) {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return params_[i];
  throw std::invalid_argument("no parameter named " + name);
}

void Network::kaiming_init(std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    if (p.shape().size() != 4) continue;  // biases stay zero
    const std::size_t fan_in = p.shape()[1] * p.shape()[2] * p.shape()[3];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (double& v : p.data()) v = rng.uniform(-bound, bound);
  }
}

Tensor Network::activate(const Tensor& x) const {
  return config_.activation == Activation::ReLU ? relu(x) : leaky_relu(x, 0.01);
}

Tensor Network::conv_block(const Tensor& x, std::size_t first_param, int convs) const {
  Tensor h = x;
  for (int d = 0; d < convs; ++d) {
    const Tensor& w = params_[first_param + 2 * static_cast<std::size_t>(d)];
    const Tensor& b = params_[first_param + 2 * static_cast<std::size_t>(d) + 1];
    h = activate(conv2d(h, w, b));
  }
  return h;
}

Tensor Network::forward(const Tensor& input) const {
  if (input.shape().size() != 3 ||
      input.shape()[0] != static_cast<std::size_t>(config_.in_channels))
    throw std::invalid_argument("network input must be in_channels x H x W");
  const std::size_t h = input.shape()[1], w = input.shape()[2];
  const auto div = static_cast<std::size_t>(1) << config_.downsample_levels;
  if (h % div != 0 || w % div != 0)
    throw std::invalid_argument(
        "input H and W must be divisible by 2^downsample_levels");

  Tensor coord;
  if (config_.coord_features) {
    // Two positional channels: the normalized column and its logit warp.
    // The fringe order is monotone in the column, and the output passes
    // through a sigmoid (soft order), so the logit ramp matches the shape
    // the head has to produce and keeps its tails learnable.
    coord = Tensor::zeros({2, h, w});
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const double u =
            (static_cast<double>(x) + 0.5) / static_cast<double>(w);
        coord.data()[y * w + x] = 2.0 * u - 1.0;
        coord.data()[h * w + y * w + x] = std::log(u / (1.0 - u));
      }
  }

  std::vector<Tensor> skips;
  Tensor x = config_.coord_features ? concat_channels(input, coord) : input;
  for (int level = 0; level <= config_.downsample_levels; ++level) {
    if (level > 0) x = avg_pool2(x);
    x = conv_block(x, encoder_blocks_[static_cast<std::size_t>(level)],
                   config_.depth);
    if (level < config_.downsample_levels) skips.push_back(x);
  }
  for (int level = config_.downsample_levels - 1; level >= 0; --level) {
    x = upsample2(x);
    x = concat_channels(x, skips[static_cast<std::size_t>(level)]);
    const std::size_t block =
        decoder_blocks_[static_cast<std::size_t>(config_.downsample_levels - 1 - level)];
    x = conv_block(x, block, config_.depth);
  }
  if (config_.coord_features) x = concat_channels(x, coord);
  return conv2d(x, params_[out_conv_], params_[out_conv_ + 1]);
}

}  // namespace fpp::nn
