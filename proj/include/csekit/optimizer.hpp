#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace csekit {

struct AdamWConfig {
  double learning_rate = 3e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;

  void validate() const;
};

/// Adam with decoupled weight decay over a fixed list of parameter blocks.
/// Moment buffers are allocated on the first step from the block sizes.
class AdamW {
 public:
  explicit AdamW(AdamWConfig config);

  void step(const std::vector<std::span<double>>& params, const std::vector<std::span<const double>>& grads);

  std::int64_t steps_taken() const { return t_; }
  const AdamWConfig& config() const { return config_; }

 private:
  AdamWConfig config_;
  std::int64_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

/// Only "adamw" is implemented.
void require_supported_optimizer(std::string_view name);

}  // namespace csekit
