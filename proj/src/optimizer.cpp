#include "csekit/optimizer.hpp"

#include <cmath>
#include <string>

#include "csekit/error.hpp"

namespace csekit {

void AdamWConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("AdamW betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("AdamW eps must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
}

AdamW::AdamW(AdamWConfig config) : config_(config) { config_.validate(); }

void AdamW::step(const std::vector<std::span<double>>& params, const std::vector<std::span<const double>>& grads) {
  if (params.size() != grads.size()) throw ArgumentError("AdamW: parameter and gradient block counts differ");
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.size(), 0.0);
      v_.emplace_back(p.size(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw ArgumentError("AdamW: parameter block count changed between steps");

  ++t_;
  const auto& c = config_;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t_));
  const double step_size = c.learning_rate / bc1;
  const double decay = 1.0 - c.learning_rate * c.weight_decay;
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto p = params[b];
    auto g = grads[b];
    if (p.size() != g.size() || p.size() != m_[b].size())
      throw ArgumentError("AdamW: block " + std::to_string(b) + " size mismatch");
    double* m = m_[b].data();
    double* v = v_[b].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      p[i] *= decay;
      p[i] -= step_size * m[i] / (std::sqrt(v[i] / bc2) + c.eps);
    }
  }
}

void require_supported_optimizer(std::string_view name) {
  if (name != "adamw") throw ConfigError("unsupported optimizer '" + std::string(name) + "' (only adamw is implemented)");
}

}  // namespace csekit
