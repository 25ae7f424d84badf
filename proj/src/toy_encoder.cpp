#include "csekit/toy_encoder.hpp"

#include <cmath>
#include <fstream>

#include "csekit/error.hpp"

namespace csekit {

namespace {

constexpr std::string_view kClsToken = "[cls]";
constexpr std::string_view kMaskToken = "[mask]";
constexpr std::uint64_t kFileMagic = 0x32304b4553435954ULL;

}  // namespace

void ToyEncoderConfig::validate() const {
  if (hash_buckets < 16) throw ConfigError("toy encoder: hash_buckets must be >= 16");
  if (hidden < 1 || dim < 1) throw ConfigError("toy encoder: hidden and dim must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("toy encoder: dropout must lie in [0, 1)");
  pooling.validate();
}

ToyEncoder::ToyEncoder(ToyEncoderConfig config) : config_(std::move(config)) {
  config_.validate();
  Rng rng(derive_seed(config_.seed, 0x70a1));
  params_.embeddings.resize(config_.hash_buckets, config_.hidden);
  params_.dense.resize(config_.dim, config_.hidden);
  params_.bias = Eigen::VectorXd::Zero(config_.dim);
  params_.mix = Eigen::Vector2d::Ones();
  const double emb_scale = 1.0 / std::sqrt(static_cast<double>(config_.hidden));
  for (Eigen::Index r = 0; r < params_.embeddings.rows(); ++r)
    for (Eigen::Index c = 0; c < params_.embeddings.cols(); ++c)
      params_.embeddings(r, c) = standard_normal(rng) * emb_scale;
  for (Eigen::Index c = 0; c < params_.dense.cols(); ++c)
    for (Eigen::Index r = 0; r < params_.dense.rows(); ++r)
      params_.dense(r, c) = standard_normal(rng) * emb_scale;
}

int ToyEncoder::bucket(std::string_view feature) const {
  return static_cast<int>(fnv1a(feature) % static_cast<std::uint64_t>(config_.hash_buckets));
}

std::vector<int> ToyEncoder::features_of(std::string_view sentence, int* pooled_row, std::size_t* unigram_count) const {
  std::vector<std::string> tokens;
  const auto strategy = config_.pooling.strategy;
  if (strategy == PoolingStrategy::kPromptMask) {
    tokens = tokenize(wrap_with_template(sentence, *config_.pooling.prompt_template));
    bool found = false;
    for (auto& t : tokens) {
      if (!found && t.find(kMaskPlaceholder) != std::string::npos) {
        t = std::string(kMaskToken);
        found = true;
      }
    }
    if (!found) throw ConfigError("prompt_mask pooling: mask token lost during tokenization");
  } else {
    tokens = tokenize(sentence);
  }

  std::vector<int> features;
  features.reserve(2 * tokens.size() + 1);
  features.push_back(bucket(std::string("u:").append(kClsToken)));
  for (const auto& t : tokens) features.push_back(bucket("u:" + t));
  if (unigram_count) *unigram_count = features.size();
  if (config_.bigrams) {
    for (std::size_t i = 1; i < tokens.size(); ++i) features.push_back(bucket("b:" + tokens[i - 1] + " " + tokens[i]));
  }

  if (pooled_row) {
    switch (strategy) {
      case PoolingStrategy::kFirstToken: *pooled_row = bucket(std::string("p:").append(kClsToken)); break;
      case PoolingStrategy::kPromptMask: *pooled_row = bucket(std::string("p:").append(kMaskToken)); break;
      case PoolingStrategy::kMeanTokens: *pooled_row = -1; break;
    }
  }
  return features;
}

Embedding ToyEncoder::forward(std::string_view sentence, Rng* rng, bool normalize, Cache* cache) const {
  int pooled_row = -1;
  std::size_t unigrams = 0;
  std::vector<int> features = features_of(sentence, &pooled_row, &unigrams);

  Eigen::VectorXd usum = Eigen::VectorXd::Zero(config_.hidden);
  Eigen::VectorXd bsum = Eigen::VectorXd::Zero(config_.hidden);
  for (std::size_t i = 0; i < features.size(); ++i) (i < unigrams ? usum : bsum) += params_.embeddings.row(features[i]).transpose();
  Eigen::VectorXd h = (params_.mix[0] * usum + params_.mix[1] * bsum) / static_cast<double>(features.size());
  if (pooled_row >= 0) h += params_.embeddings.row(pooled_row).transpose();

  Eigen::VectorXd scale;
  if (rng && config_.dropout > 0.0) {
    scale.resize(config_.hidden);
    const double keep = 1.0 - config_.dropout;
    for (Eigen::Index i = 0; i < scale.size(); ++i) scale[i] = uniform01(*rng) < keep ? 1.0 / keep : 0.0;
    h = h.cwiseProduct(scale);
  }

  Eigen::VectorXd z = params_.dense * h + params_.bias;
  Embedding out{z};
  if (normalize) out = out.normalized();

  if (cache) {
    cache->features = std::move(features);
    cache->unigram_count = unigrams;
    cache->pooled_row = pooled_row;
    cache->unigram_sum = std::move(usum);
    cache->bigram_sum = std::move(bsum);
    cache->dropout_scale = std::move(scale);
    cache->hidden = std::move(h);
    cache->output = std::move(z);
    cache->normalized = normalize;
  }
  return out;
}

Embedding ToyEncoder::encode_one(std::string_view sentence, bool normalize) const {
  return forward(sentence, nullptr, normalize, nullptr);
}

Embedding ToyEncoder::encode_stochastic(std::string_view sentence, Rng& rng) const {
  return forward(sentence, &rng, true, nullptr);
}

void ToyEncoder::backward(const Cache& cache, const Eigen::VectorXd& grad_output, Parameters& grads) const {
  Eigen::VectorXd gz = grad_output;
  if (cache.normalized) {
    const double n = cache.output.norm();
    Eigen::VectorXd y = cache.output / n;
    gz = (grad_output - y * y.dot(grad_output)) / n;
  }
  grads.dense.noalias() += gz * cache.hidden.transpose();
  grads.bias += gz;
  Eigen::VectorXd gh = params_.dense.transpose() * gz;
  if (cache.dropout_scale.size() > 0) gh = gh.cwiseProduct(cache.dropout_scale);
  if (cache.pooled_row >= 0) grads.embeddings.row(cache.pooled_row) += gh.transpose();
  const double inv = 1.0 / static_cast<double>(cache.features.size());
  grads.mix[0] += inv * gh.dot(cache.unigram_sum);
  grads.mix[1] += inv * gh.dot(cache.bigram_sum);
  for (std::size_t i = 0; i < cache.features.size(); ++i) {
    const double w = inv * params_.mix[i < cache.unigram_count ? 0 : 1];
    grads.embeddings.row(cache.features[i]) += w * gh.transpose();
  }
}

ToyEncoder::Parameters ToyEncoder::zero_gradients() const {
  Parameters g;
  g.embeddings = RowMatrix::Zero(params_.embeddings.rows(), params_.embeddings.cols());
  g.dense = Eigen::MatrixXd::Zero(params_.dense.rows(), params_.dense.cols());
  g.bias = Eigen::VectorXd::Zero(params_.bias.size());
  g.mix = Eigen::Vector2d::Zero();
  return g;
}

std::vector<std::span<const double>> flat_views(const ToyEncoder::Parameters& params) {
  return {
      std::span<const double>(params.embeddings.data(), static_cast<std::size_t>(params.embeddings.size())),
      std::span<const double>(params.dense.data(), static_cast<std::size_t>(params.dense.size())),
      std::span<const double>(params.bias.data(), static_cast<std::size_t>(params.bias.size())),
      std::span<const double>(params.mix.data(), 2),
  };
}

std::vector<std::span<double>> flat_views(ToyEncoder::Parameters& params) {
  return {
      std::span<double>(params.embeddings.data(), static_cast<std::size_t>(params.embeddings.size())),
      std::span<double>(params.dense.data(), static_cast<std::size_t>(params.dense.size())),
      std::span<double>(params.bias.data(), static_cast<std::size_t>(params.bias.size())),
      std::span<double>(params.mix.data(), 2),
  };
}

void ToyEncoder::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EnvironmentError("cannot write encoder to " + path.string());
  auto put = [&](auto v) { out.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
  put(kFileMagic);
  put(static_cast<std::int64_t>(config_.hash_buckets));
  put(static_cast<std::int64_t>(config_.hidden));
  put(static_cast<std::int64_t>(config_.dim));
  put(config_.dropout);
  put(static_cast<std::int64_t>(config_.bigrams));
  put(static_cast<std::int64_t>(config_.pooling.strategy));
  put(config_.seed);
  const std::string tmpl = config_.pooling.prompt_template.value_or("");
  put(static_cast<std::int64_t>(tmpl.size()));
  out.write(tmpl.data(), static_cast<std::streamsize>(tmpl.size()));
  for (auto view : flat_views(params_)) out.write(reinterpret_cast<const char*>(view.data()), static_cast<std::streamsize>(view.size_bytes()));
  if (!out) throw EnvironmentError("short write while saving encoder to " + path.string());
}

ToyEncoder ToyEncoder::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EnvironmentError("cannot open encoder file " + path.string());
  auto get = [&](auto& v) { in.read(reinterpret_cast<char*>(&v), sizeof(v)); };
  std::uint64_t magic = 0;
  get(magic);
  if (magic != kFileMagic) throw ParseError(path.string() + ": not a toy encoder file");
  std::int64_t buckets = 0, hidden = 0, dim = 0, bigrams = 0, strategy = 0, tmpl_len = 0;
  ToyEncoderConfig cfg;
  get(buckets);
  get(hidden);
  get(dim);
  get(cfg.dropout);
  get(bigrams);
  get(strategy);
  get(cfg.seed);
  get(tmpl_len);
  if (!in || tmpl_len < 0 || tmpl_len > (1 << 20)) throw ParseError(path.string() + ": corrupt header");
  std::string tmpl(static_cast<std::size_t>(tmpl_len), '\0');
  in.read(tmpl.data(), tmpl_len);
  cfg.hash_buckets = static_cast<int>(buckets);
  cfg.hidden = static_cast<int>(hidden);
  cfg.dim = static_cast<int>(dim);
  cfg.bigrams = bigrams != 0;
  cfg.pooling.strategy = static_cast<PoolingStrategy>(strategy);
  if (!tmpl.empty()) cfg.pooling.prompt_template = tmpl;
  ToyEncoder enc(cfg);
  for (auto view : flat_views(enc.params_)) in.read(reinterpret_cast<char*>(view.data()), static_cast<std::streamsize>(view.size_bytes()));
  if (!in) throw ParseError(path.string() + ": truncated parameter block");
  return enc;
}

std::unique_ptr<ToyEncoder> load_encoder(const EncoderHandle& handle, const ToyEncoderConfig& base) {
  if (handle.backbone != "toy") {
    throw EnvironmentError("backbone '" + handle.backbone +
                           "' is not available in this build (only the CPU 'toy' encoder ships)");
  }
  if (handle.dim < 1) throw ConfigError("encoder dimension must be positive");
  ToyEncoderConfig cfg = base;
  cfg.dim = handle.dim;
  cfg.pooling = handle.pooling;
  return std::make_unique<ToyEncoder>(cfg);
}

}  // namespace csekit
