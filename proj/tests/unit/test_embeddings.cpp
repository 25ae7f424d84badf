#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "csekit/embeddings.hpp"
#include "csekit/error.hpp"
#include "csekit/toy_encoder.hpp"

using namespace csekit;

namespace {

const std::string kTemplate = "This sentence: \"{s}\" means {mask}";

Embedding unit(std::initializer_list<double> v) {
  Embedding e;
  e.values = Eigen::VectorXd::Map(v.begin(), static_cast<Eigen::Index>(v.size()));
  return e;
}

ToyEncoderConfig small_config(PoolingStrategy strategy = PoolingStrategy::kFirstToken) {
  ToyEncoderConfig c;
  c.hash_buckets = 256;
  c.hidden = 16;
  c.dim = 16;
  c.seed = 3;
  c.pooling.strategy = strategy;
  if (strategy == PoolingStrategy::kPromptMask) c.pooling.prompt_template = kTemplate;
  return c;
}

}  // namespace

TEST(WrapWithTemplate, SubstitutesSentenceKeepsMask) {
  EXPECT_EQ(wrap_with_template("A dog runs.", kTemplate), "This sentence: \"A dog runs.\" means {mask}");
  EXPECT_EQ(wrap_with_template("", kTemplate), "This sentence: \"\" means {mask}");
}

TEST(WrapWithTemplate, MalformedTemplatesAreConfigErrors) {
  EXPECT_THROW(wrap_with_template("x", "This sentence: \"{s}\" means"), ConfigError);
  EXPECT_THROW(wrap_with_template("x", "{s} {s} {mask}"), ConfigError);
  EXPECT_THROW(wrap_with_template("x", "{mask} {mask} {s}"), ConfigError);
  EXPECT_THROW(wrap_with_template("x", "means {mask}"), ConfigError);
}

TEST(WrapWithTemplate, InjectiveInSentence) {
  const std::vector<std::string> inputs = {"a", "b", "a b", "ab", "", " a", "a dog", "A dog"};
  std::set<std::string> seen;
  for (const auto& s : inputs) seen.insert(wrap_with_template(s, kTemplate));
  EXPECT_EQ(seen.size(), inputs.size());
}

TEST(PoolingConfig, PromptMaskNeedsTemplate) {
  PoolingConfig p;
  p.strategy = PoolingStrategy::kPromptMask;
  EXPECT_THROW(p.validate(), ConfigError);
  p.prompt_template = "no placeholders";
  EXPECT_THROW(p.validate(), ConfigError);
  p.prompt_template = kTemplate;
  EXPECT_NO_THROW(p.validate());
  EXPECT_EQ(parse_pooling("mean_tokens"), PoolingStrategy::kMeanTokens);
  EXPECT_THROW(parse_pooling("max"), ConfigError);
}

TEST(Cosine, TrivialPairs) {
  const auto e1 = unit({1, 0, 0});
  const auto e2 = unit({0, 1, 0});
  const auto neg = unit({-1, 0, 0});
  EXPECT_DOUBLE_EQ(cosine_similarity(e1, e1), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(e1, neg), -1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(e1, e2), 0.0);
  EXPECT_THROW(cosine_similarity(e1, unit({1, 0})), ArgumentError);
}

TEST(Cosine, SymmetricExactly) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    Embedding a, b;
    a.values = Eigen::VectorXd::NullaryExpr(9, [&] { return g(rng); }).normalized();
    b.values = Eigen::VectorXd::NullaryExpr(9, [&] { return g(rng); }).normalized();
    EXPECT_EQ(cosine_similarity(a, b), cosine_similarity(b, a));
  }
}

class EncoderPooling : public ::testing::TestWithParam<PoolingStrategy> {};

TEST_P(EncoderPooling, ShapeNormAndDeterminism) {
  ToyEncoder enc(small_config(GetParam()));
  const std::vector<std::string> s = {"the cat sat", "a dog runs far", "the cat sat"};
  const auto out = enc.encode(s);
  ASSERT_EQ(out.size(), 3u);
  for (const auto& e : out) {
    EXPECT_EQ(e.dim(), 16);
    EXPECT_LT(std::abs(e.norm() - 1.0), 1e-6);
  }
  EXPECT_EQ(out[0].values, out[2].values);
  EXPECT_NEAR(cosine_similarity(out[0], out[0]), 1.0, 1e-6);
}

INSTANTIATE_TEST_SUITE_P(All, EncoderPooling,
                         ::testing::Values(PoolingStrategy::kFirstToken, PoolingStrategy::kMeanTokens,
                                           PoolingStrategy::kPromptMask));

TEST(Encoder, EmptyInputIsArgumentError) {
  ToyEncoder enc(small_config());
  EXPECT_THROW(enc.encode(std::vector<std::string>{}), ArgumentError);
}

TEST(Encoder, DropoutPassesDifferButInferenceDoesNot) {
  ToyEncoder enc(small_config());
  Rng rng(5);
  const auto a = enc.encode_stochastic("the cat sat on the mat", rng);
  const auto b = enc.encode_stochastic("the cat sat on the mat", rng);
  EXPECT_NE(a.values, b.values);
  EXPECT_LT(std::abs(a.norm() - 1.0), 1e-6);
  EXPECT_EQ(enc.encode_one("x y", true).values, enc.encode_one("x y", true).values);
}

TEST(Encoder, UnknownBackboneIsEnvironmentError) {
  EncoderHandle h;
  h.backbone = "bert-base-uncased";
  EXPECT_THROW(load_encoder(h, small_config()), EnvironmentError);
  h.backbone = "toy";
  h.dim = 8;
  EXPECT_EQ(load_encoder(h, small_config())->dim(), 8);
}

TEST(Encoder, SaveLoadRoundTrip) {
  ToyEncoder enc(small_config(PoolingStrategy::kMeanTokens));
  enc.parameters().mix = Eigen::Vector2d(0.25, 1.5);
  const auto path = std::filesystem::temp_directory_path() / "csekit_encoder_roundtrip.bin";
  enc.save(path);
  const ToyEncoder back = ToyEncoder::load(path);
  EXPECT_EQ(back.encode_one("a b c", true).values, enc.encode_one("a b c", true).values);
  EXPECT_EQ(back.config().pooling.strategy, PoolingStrategy::kMeanTokens);
  std::filesystem::remove(path);
}

TEST(Encoder, BackwardMatchesFiniteDifferences) {
  auto cfg = small_config(PoolingStrategy::kFirstToken);
  ToyEncoder enc(cfg);
  const std::string s = "the quick brown fox";
  Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(cfg.dim, -1.0, 1.0);
  auto loss = [&] { return w.dot(enc.encode_one(s, true).values); };

  ToyEncoder::Cache cache;
  enc.forward(s, nullptr, true, &cache);
  auto grads = enc.zero_gradients();
  enc.backward(cache, w, grads);

  auto params = flat_views(enc.parameters());
  auto g = flat_views(static_cast<const ToyEncoder::Parameters&>(grads));
  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t block = 0; block < params.size(); ++block) {
    for (std::size_t k = 0; k < params[block].size(); ++k) {
      if (g[block][k] == 0.0 && block == 0) continue;  // untouched embedding rows
      double& p = params[block][k];
      const double keep = p;
      p = keep + h;
      const double up = loss();
      p = keep - h;
      const double down = loss();
      p = keep;
      const double fd = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(fd - g[block][k]) / std::max({std::abs(fd), std::abs(g[block][k]), 1e-6}));
    }
  }
  EXPECT_LT(worst, 1e-4);
}
