#pragma once

#include <vector>

#include "fpp/tensor.hpp"

namespace fpp::nn {

/// Bias-corrected Adam with L2-style weight decay folded into the gradient
/// before the moment updates.
class Adam {
 public:
  struct Options {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double weight_decay = 0.0;
    double epsilon = 1e-8;
  };

  Adam(std::vector<Tensor> params, Options options);

  void step();
  void zero_grad();

  double learning_rate() const { return options_.lr; }
  void set_learning_rate(double lr) { options_.lr = lr; }
  std::int64_t step_count() const { return step_count_; }

 private:
  std::vector<Tensor> params_;
  Options options_;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
  std::int64_t step_count_ = 0;
};

}  // namespace fpp::nn
