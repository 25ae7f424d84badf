#include "csekit/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "csekit/error.hpp"

namespace csekit {

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as " + expected);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

int to_int32(const std::string& key, const std::string& v) {
  const long long x = to_int(key, v);
  if (x < INT32_MIN || x > INT32_MAX) bad_value(key, v, "a 32-bit integer");
  return static_cast<int>(x);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  return out;
}

std::string from_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += format_double(xs[i]);
  }
  return out;
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

struct Entry {
  const char* key;
  void (*set)(RunConfig&, const std::string& key, const std::string& value);
  std::string (*get)(const RunConfig&);
};

#define CSEKIT_STR(field) [](RunConfig& c, const std::string&, const std::string& v) { c.field = v; }, \
                          [](const RunConfig& c) { return std::string(c.field); }
#define CSEKIT_DBL(field) [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_double(k, v); }, \
                          [](const RunConfig& c) { return format_double(c.field); }
#define CSEKIT_INT(field) [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_int32(k, v); }, \
                          [](const RunConfig& c) { return std::to_string(c.field); }
#define CSEKIT_BOOL(field) [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_bool(k, v); }, \
                           [](const RunConfig& c) { return from_bool(c.field); }
#define CSEKIT_LIST(field) [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_list(k, v); }, \
                           [](const RunConfig& c) { return from_list(c.field); }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {"corpus", CSEKIT_STR(corpus)},
      {"pattern_source", CSEKIT_STR(pattern_source)},
      {"dataset", CSEKIT_STR(dataset)},
      {"eval", CSEKIT_STR(eval)},
      {"pattern", [](RunConfig& c, const std::string&, const std::string& v) { c.pattern = parse_pattern_kind(v); },
       [](const RunConfig& c) { return std::string(to_string(c.pattern)); }},
      {"domain", [](RunConfig& c, const std::string&, const std::string& v) { c.domain = parse_corpus_domain(v); },
       [](const RunConfig& c) { return std::string(to_string(c.domain)); }},
      {"hierarchical", CSEKIT_BOOL(hierarchical)},
      {"n_generated",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.n_generated = static_cast<std::size_t>(to_u64(k, v)); },
       [](const RunConfig& c) { return std::to_string(c.n_generated); }},
      {"llm.model", CSEKIT_STR(llm.model)},
      {"llm.endpoint", CSEKIT_STR(llm.endpoint)},
      {"llm.api_key_env", CSEKIT_STR(llm.api_key_env)},
      {"llm.concurrency", CSEKIT_INT(llm.concurrency)},
      {"llm.mock", CSEKIT_BOOL(llm.mock)},
      {"llm.max_retries", CSEKIT_INT(llm.max_retries)},
      {"llm.timeout_ms", CSEKIT_INT(llm.timeout_ms)},
      {"encoder.backbone", CSEKIT_STR(encoder.backbone)},
      {"encoder.pooling",
       [](RunConfig& c, const std::string&, const std::string& v) { c.encoder.pooling.strategy = parse_pooling(v); },
       [](const RunConfig& c) { return std::string(to_string(c.encoder.pooling.strategy)); }},
      {"encoder.prompt_template",
       [](RunConfig& c, const std::string&, const std::string& v) {
         if (v.empty()) {
           c.encoder.pooling.prompt_template.reset();
         } else {
           c.encoder.pooling.prompt_template = v;
         }
       },
       [](const RunConfig& c) { return c.encoder.pooling.prompt_template.value_or(""); }},
      {"encoder.dim", CSEKIT_INT(encoder.dim)},
      {"encoder.hidden", CSEKIT_INT(toy.hidden)},
      {"encoder.hash_buckets", CSEKIT_INT(toy.hash_buckets)},
      {"encoder.dropout", CSEKIT_DBL(toy.dropout)},
      {"encoder.bigrams", CSEKIT_BOOL(toy.bigrams)},
      {"train.optimizer", CSEKIT_STR(train.optimizer)},
      {"train.learning_rate", CSEKIT_DBL(train.learning_rate)},
      {"train.weight_decay", CSEKIT_DBL(train.weight_decay)},
      {"train.batch_size", CSEKIT_INT(train.batch_size)},
      {"train.tau", CSEKIT_DBL(train.tau)},
      {"train.m1", CSEKIT_DBL(train.ht.m1)},
      {"train.m2", CSEKIT_DBL(train.ht.m2)},
      {"train.beta", CSEKIT_DBL(train.ht.beta)},
      {"train.epochs", CSEKIT_INT(train.epochs)},
      {"train.heldout_fraction", CSEKIT_DBL(train.heldout_fraction)},
      {"train.augmentation",
       [](RunConfig& c, const std::string&, const std::string& v) { c.train.augmentation = parse_augmentation(v); },
       [](const RunConfig& c) { return std::string(to_string(c.train.augmentation)); }},
      {"metrics.alpha", CSEKIT_DBL(train.metrics.alpha)},
      {"metrics.t", CSEKIT_DBL(train.metrics.t)},
      {"metrics.record_interval", CSEKIT_INT(train.record_interval)},
      {"metrics.top_k", CSEKIT_INT(top_k)},
      {"grid.learning_rates", CSEKIT_LIST(grid.learning_rates)},
      {"grid.m1s", CSEKIT_LIST(grid.m1s)},
      {"grid.m2s", CSEKIT_LIST(grid.m2s)},
      {"grid.betas", CSEKIT_LIST(grid.betas)},
      {"hist.metric", [](RunConfig& c, const std::string&, const std::string& v) { c.hist_metric = parse_pair_metric(v); },
       [](const RunConfig& c) { return std::string(to_string(c.hist_metric)); }},
      {"hist.polarity", CSEKIT_STR(hist_polarity)},
      {"hist.bins", CSEKIT_INT(hist_bins)},
      {"synth.corpus_size",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.synth.corpus_size = static_cast<std::size_t>(to_u64(k, v)); },
       [](const RunConfig& c) { return std::to_string(c.synth.corpus_size); }},
      {"synth.eval_pairs",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.synth.eval_pairs = static_cast<std::size_t>(to_u64(k, v)); },
       [](const RunConfig& c) { return std::to_string(c.synth.eval_pairs); }},
      {"synth.function_rate", CSEKIT_DBL(synth.function_rate)},
      {"synth.min_content", CSEKIT_INT(synth.min_content)},
      {"synth.max_content", CSEKIT_INT(synth.max_content)},
      {"ablation.counts", CSEKIT_LIST(ablation_counts)},
      {"out", CSEKIT_STR(out)},
      {"seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = to_u64(k, v); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
  };
  return table;
}

#undef CSEKIT_STR
#undef CSEKIT_DBL
#undef CSEKIT_INT
#undef CSEKIT_BOOL
#undef CSEKIT_LIST

}  // namespace

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& e : entries()) out.emplace_back(e.key);
    return out;
  }();
  return keys;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  for (const auto& e : entries()) {
    if (key == e.key) {
      try {
        e.set(*this, key, value);
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& err) {
        throw ConfigError("config key '" + key + "': " + err.what());
      }
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

std::map<std::string, std::string> RunConfig::resolved() const {
  std::map<std::string, std::string> out;
  for (const auto& e : entries()) out[e.key] = e.get(*this);
  return out;
}

void RunConfig::finalize() {
  train.seed = seed;
  toy.seed = seed;
  synth.seed = seed;
  for (double n : ablation_counts)
    if (!(n >= 0.0) || n != std::floor(n)) throw ConfigError("ablation.counts must be non-negative integers");
  toy.dim = encoder.dim;
  toy.pooling = encoder.pooling;
  if (n_generated > 0 && hierarchical && pattern == PatternKind::kNLI)
    throw UsageError("hierarchical generation is only defined for the STS pattern (no NLI intermediate prompt)");
  if (llm.concurrency < 1) throw ConfigError("llm.concurrency must be >= 1");
  if (llm.max_retries < 0) throw ConfigError("llm.max_retries must be >= 0");
  if (llm.timeout_ms < 1) throw ConfigError("llm.timeout_ms must be >= 1");
  if (top_k < 1) throw ConfigError("metrics.top_k must be >= 1");
  if (hist_bins < 1) throw ConfigError("hist.bins must be >= 1");
  if (hist_polarity != "positive" && hist_polarity != "negative")
    throw ConfigError("hist.polarity must be 'positive' or 'negative'");
  encoder.pooling.validate();
  toy.validate();
  train.validate();
}

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text, const std::string& source) {
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig cfg;
  for (const auto& [k, v] : parse_config_text(buf.str(), path.string())) {
    try {
      cfg.set(k, v);
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  return cfg;
}

void write_config_snapshot(const RunConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw EnvironmentError("cannot write " + path.string());
  for (const auto& [k, v] : config.resolved()) out << k << " = " << v << '\n';
}

HttpChatConfig to_http_config(const LlmSettings& llm) {
  HttpChatConfig out;
  out.endpoint = llm.endpoint;
  out.model = llm.model;
  out.api_key_env = llm.api_key_env;
  out.max_retries = llm.max_retries;
  out.timeout = std::chrono::milliseconds(llm.timeout_ms);
  return out;
}

}  // namespace csekit
