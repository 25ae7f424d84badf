#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "csekit/embeddings.hpp"

namespace csekit {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ToyEncoderConfig {
  int hash_buckets = 8192;
  int hidden = 64;
  int dim = 32;
  double dropout = 0.1;
  /// Adjacent-token features alongside unigrams, so word order is visible.
  bool bigrams = true;
  PoolingConfig pooling;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Small CPU-trainable encoder: hashed unigram/bigram embedding table, a
/// context vector c mixing the unigram and bigram rows with two learned
/// scalar weights, pooling, dropout, and one dense layer.
///
///   c = (g_u * sum(unigram rows) + g_b * sum(bigram rows)) / #features
///   first_token: h = E[cls]  + c
///   prompt_mask: h = E[mask] + c   (computed over the template-wrapped text)
///   mean_tokens: h = c
///   f(s) = normalize(W dropout(h) + b)
class ToyEncoder final : public SentenceEncoder {
 public:
  struct Parameters {
    RowMatrix embeddings;   // hash_buckets x hidden
    Eigen::MatrixXd dense;  // dim x hidden
    Eigen::VectorXd bias;   // dim
    Eigen::Vector2d mix;    // (g_u, g_b)
  };

  /// Everything backward() needs from one forward pass.
  struct Cache {
    std::vector<int> features;
    std::size_t unigram_count = 0;  // features[0, unigram_count) are unigrams
    int pooled_row = -1;  // -1 for mean_tokens
    Eigen::VectorXd unigram_sum;
    Eigen::VectorXd bigram_sum;
    Eigen::VectorXd dropout_scale;  // empty in inference mode
    Eigen::VectorXd hidden;         // post-dropout h
    Eigen::VectorXd output;         // z before normalization
    bool normalized = true;
  };

  explicit ToyEncoder(ToyEncoderConfig config);

  int dim() const override { return config_.dim; }
  Embedding encode_one(std::string_view sentence, bool normalize) const override;
  Embedding encode_stochastic(std::string_view sentence, Rng& rng) const override;

  /// Forward pass; `rng` non-null enables dropout.
  Embedding forward(std::string_view sentence, Rng* rng, bool normalize, Cache* cache) const;

  /// Accumulates d(loss)/d(parameters) into `grads` given d(loss)/d(f(s)).
  void backward(const Cache& cache, const Eigen::VectorXd& grad_output, Parameters& grads) const;

  Parameters zero_gradients() const;
  Parameters& parameters() { return params_; }
  const Parameters& parameters() const { return params_; }
  const ToyEncoderConfig& config() const { return config_; }

  /// Feature-row ids of a sentence after template wrapping and tokenization:
  /// unigrams (including the always-present class feature) then bigrams.
  std::vector<int> features_of(std::string_view sentence, int* pooled_row, std::size_t* unigram_count = nullptr) const;

  void save(const std::filesystem::path& path) const;
  static ToyEncoder load(const std::filesystem::path& path);

 private:
  int bucket(std::string_view feature) const;

  ToyEncoderConfig config_;
  Parameters params_;
};

/// Flat views over a parameter set, in a fixed order, for the optimizer.
std::vector<std::span<double>> flat_views(ToyEncoder::Parameters& params);
std::vector<std::span<const double>> flat_views(const ToyEncoder::Parameters& params);

/// Builds the encoder named by `handle`. Only the "toy" backbone ships with
/// this build; any other identifier raises EnvironmentError.
std::unique_ptr<ToyEncoder> load_encoder(const EncoderHandle& handle, const ToyEncoderConfig& base);

}  // namespace csekit
