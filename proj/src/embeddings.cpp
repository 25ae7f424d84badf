#include "csekit/embeddings.hpp"

#include <cmath>

#include "csekit/error.hpp"

namespace csekit {

namespace {

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

void check_template(std::string_view prompt_template) {
  auto ns = count_occurrences(prompt_template, kSentencePlaceholder);
  auto nm = count_occurrences(prompt_template, kMaskPlaceholder);
  if (ns != 1 || nm != 1) {
    throw ConfigError("pooling template must contain {s} and {mask} exactly once each (found " +
                      std::to_string(ns) + " {s}, " + std::to_string(nm) + " {mask})");
  }
}

}  // namespace

Embedding Embedding::normalized() const {
  double n = values.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw NumericError("cannot normalize a zero or non-finite vector");
  return Embedding{values / n};
}

std::string_view to_string(PoolingStrategy strategy) {
  switch (strategy) {
    case PoolingStrategy::kFirstToken: return "first_token";
    case PoolingStrategy::kMeanTokens: return "mean_tokens";
    case PoolingStrategy::kPromptMask: return "prompt_mask";
  }
  return "first_token";
}

PoolingStrategy parse_pooling(std::string_view name) {
  if (name == "first_token") return PoolingStrategy::kFirstToken;
  if (name == "mean_tokens") return PoolingStrategy::kMeanTokens;
  if (name == "prompt_mask") return PoolingStrategy::kPromptMask;
  throw ConfigError("unknown pooling strategy '" + std::string(name) + "'");
}

void PoolingConfig::validate() const {
  if (strategy != PoolingStrategy::kPromptMask) return;
  if (!prompt_template) throw ConfigError("prompt_mask pooling requires a template");
  check_template(*prompt_template);
}

std::string wrap_with_template(std::string_view sentence, std::string_view prompt_template) {
  check_template(prompt_template);
  std::string out(prompt_template);
  auto pos = out.find(kSentencePlaceholder);
  out.replace(pos, kSentencePlaceholder.size(), sentence);
  return out;
}

double cosine_similarity(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) {
    throw ArgumentError("cosine_similarity: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                        std::to_string(b.dim()) + ")");
  }
  return a.values.dot(b.values);
}

Embedding SentenceEncoder::encode_stochastic(std::string_view sentence, Rng& /*rng*/) const {
  return encode_one(sentence, true);
}

std::vector<Embedding> SentenceEncoder::encode(std::span<const std::string> sentences, bool normalize) const {
  if (sentences.empty()) throw ArgumentError("encode: empty input list");
  std::vector<Embedding> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(encode_one(s, normalize));
  return out;
}

std::vector<Embedding> encode(std::span<const std::string> sentences, const SentenceEncoder& encoder,
                              bool normalize) {
  return encoder.encode(sentences, normalize);
}

Eigen::MatrixXd stack_rows(std::span<const Embedding> embeddings) {
  if (embeddings.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(embeddings.size()), embeddings.front().dim());
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    if (embeddings[i].dim() != m.cols()) throw ArgumentError("stack_rows: inconsistent embedding dimension");
    m.row(static_cast<Eigen::Index>(i)) = embeddings[i].values.transpose();
  }
  return m;
}

}  // namespace csekit
