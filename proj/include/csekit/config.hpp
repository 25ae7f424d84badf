#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "csekit/embeddings.hpp"
#include "csekit/lexical_metrics.hpp"
#include "csekit/llm_client.hpp"
#include "csekit/pattern_sim.hpp"
#include "csekit/synthetic.hpp"
#include "csekit/toy_encoder.hpp"
#include "csekit/train_eval.hpp"

namespace csekit {

struct LlmSettings {
  std::string model = "gpt-3.5-turbo-0613";
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key_env = "LLM_API_KEY";
  int concurrency = 4;
  bool mock = false;
  int max_retries = 3;
  int timeout_ms = 60000;
};

/// Every knob of every verb, flat. Paths are kept as written.
struct RunConfig {
  std::string corpus;
  std::string pattern_source;
  std::string dataset;  // hybrid JSONL consumed by train/grid/hist
  std::string eval;     // STS JSONL
  PatternKind pattern = PatternKind::kSTS;
  CorpusDomain domain = CorpusDomain::kWiki;
  bool hierarchical = false;
  std::size_t n_generated = 0;
  LlmSettings llm;
  EncoderHandle encoder;
  ToyEncoderConfig toy;
  TrainConfig train;
  int top_k = kDefaultTopK;
  GridSpec grid;
  PairMetric hist_metric = PairMetric::kMER;
  std::string hist_polarity = "positive";
  int hist_bins = kDefaultHistogramBins;
  SyntheticWorldConfig synth;
  std::vector<double> ablation_counts = {0, 50, 200};
  std::string out = "run";
  std::uint64_t seed = 0;

  /// Sets one key from its textual value; unknown keys raise ConfigError.
  void set(const std::string& key, const std::string& value);

  /// Fully-resolved key/value view, one entry per known key.
  std::map<std::string, std::string> resolved() const;

  /// Cross-field checks (the seed is propagated here too).
  void finalize();
};

/// Every key RunConfig::set accepts, in snapshot order.
const std::vector<std::string>& known_config_keys();

/// Parses `key = value` lines; `#` starts a comment; blank lines skipped.
/// Duplicate keys are an error.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text, const std::string& source);

RunConfig load_config(const std::filesystem::path& path);

/// Writes resolved() as sorted `key = value` lines.
void write_config_snapshot(const RunConfig& config, const std::filesystem::path& path);

HttpChatConfig to_http_config(const LlmSettings& llm);

}  // namespace csekit
