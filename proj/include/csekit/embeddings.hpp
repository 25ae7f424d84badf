#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csekit/util.hpp"

namespace csekit {

inline constexpr std::string_view kSentencePlaceholder = "{s}";
inline constexpr std::string_view kMaskPlaceholder = "{mask}";
inline constexpr double kUnitNormTolerance = 1e-6;

/// A point on (or, before normalization, near) the unit hypersphere.
struct Embedding {
  Eigen::VectorXd values;

  Eigen::Index dim() const { return values.size(); }
  double norm() const { return values.norm(); }
  bool is_unit(double tol = kUnitNormTolerance) const { return std::abs(norm() - 1.0) < tol; }
  Embedding normalized() const;
};

enum class PoolingStrategy { kFirstToken, kMeanTokens, kPromptMask };

std::string_view to_string(PoolingStrategy strategy);
PoolingStrategy parse_pooling(std::string_view name);

struct PoolingConfig {
  PoolingStrategy strategy = PoolingStrategy::kFirstToken;
  std::optional<std::string> prompt_template;

  /// Throws ConfigError when prompt_mask pooling lacks a well-formed template.
  void validate() const;
};

/// Substitutes `sentence` for the single `{s}` in `prompt_template`; the
/// `{mask}` placeholder is kept verbatim for the pooling stage.
std::string wrap_with_template(std::string_view sentence, std::string_view prompt_template);

/// Inner product of two unit vectors.
double cosine_similarity(const Embedding& a, const Embedding& b);

struct EncoderHandle {
  std::string backbone = "toy";
  PoolingConfig pooling;
  int dim = 32;
};

/// Abstract sentence encoder f. Inference-mode `encode` is const and
/// reentrant; trainable encoders additionally expose stochastic passes.
class SentenceEncoder {
 public:
  virtual ~SentenceEncoder() = default;

  virtual int dim() const = 0;
  virtual Embedding encode_one(std::string_view sentence, bool normalize) const = 0;

  /// One forward pass with training-time noise (dropout) drawn from `rng`.
  /// Encoders without stochastic layers fall back to `encode_one`.
  virtual Embedding encode_stochastic(std::string_view sentence, Rng& rng) const;

  std::vector<Embedding> encode(std::span<const std::string> sentences, bool normalize = true) const;
};

/// Encodes a batch through `encoder`; the free-function form used by the
/// metrics and evaluation code.
std::vector<Embedding> encode(std::span<const std::string> sentences, const SentenceEncoder& encoder,
                              bool normalize = true);

/// Stacks embeddings as rows of an n x d matrix.
Eigen::MatrixXd stack_rows(std::span<const Embedding> embeddings);

}  // namespace csekit
