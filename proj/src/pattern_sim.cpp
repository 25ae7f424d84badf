#include "csekit/pattern_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <deque>

#include "csekit/error.hpp"
#include "csekit/lexicon.hpp"
#include "csekit/llm_client.hpp"
#include "csekit/util.hpp"

namespace csekit {

namespace {

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view band_name(PatternKind pattern, GenerationKind kind) {
  if (pattern == PatternKind::kNLI) return kind == GenerationKind::kPositive ? "NLI entailment" : "NLI contradiction";
  switch (kind) {
    case GenerationKind::kPositive: return "STS score > 4";
    case GenerationKind::kNegative: return "STS score < 1";
    case GenerationKind::kIntermediate: return "STS score in [1, 4]";
  }
  return "";
}

}  // namespace

std::string_view to_string(PatternKind kind) { return kind == PatternKind::kSTS ? "STS" : "NLI"; }

std::string_view to_string(GenerationKind kind) {
  switch (kind) {
    case GenerationKind::kPositive: return "positive";
    case GenerationKind::kIntermediate: return "intermediate";
    case GenerationKind::kNegative: return "negative";
  }
  return "positive";
}

std::string_view to_string(CorpusDomain domain) { return domain == CorpusDomain::kWiki ? "Wiki" : "NLI"; }

std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::kLlmSts: return "llm_sts";
    case Origin::kLlmNli: return "llm_nli";
    case Origin::kSupervised: return "supervised";
    case Origin::kCorpusOnly: return "corpus_only";
  }
  return "corpus_only";
}

PatternKind parse_pattern_kind(std::string_view name) {
  if (name == "STS" || name == "sts") return PatternKind::kSTS;
  if (name == "NLI" || name == "nli") return PatternKind::kNLI;
  throw ConfigError("unknown pattern kind '" + std::string(name) + "' (expected STS or NLI)");
}

CorpusDomain parse_corpus_domain(std::string_view name) {
  if (name == "Wiki" || name == "wiki") return CorpusDomain::kWiki;
  if (name == "NLI" || name == "nli") return CorpusDomain::kNLI;
  throw ConfigError("unknown corpus domain '" + std::string(name) + "' (expected Wiki or NLI)");
}

Origin parse_origin(std::string_view name) {
  if (name == "llm_sts") return Origin::kLlmSts;
  if (name == "llm_nli") return Origin::kLlmNli;
  if (name == "supervised") return Origin::kSupervised;
  if (name == "corpus_only") return Origin::kCorpusOnly;
  throw ParseError("unknown origin '" + std::string(name) + "'");
}

const PromptBundle& PromptSet::at(GenerationKind kind) const {
  auto it = bundles.find(kind);
  if (it == bundles.end()) throw ArgumentError("prompt set has no " + std::string(to_string(kind)) + " prompt");
  return it->second;
}

void QuadrupleExample::validate() const {
  auto fail = [&](const std::string& why) { throw DataError("record '" + anchor + "' (" + std::string(to_string(origin)) + "): " + why); };
  if (anchor.empty()) fail("empty anchor");
  switch (origin) {
    case Origin::kCorpusOnly:
      if (positive || intermediate || negative) fail("corpus_only records carry only an anchor");
      break;
    case Origin::kLlmNli:
      if (intermediate) fail("NLI-pattern records have no intermediate sentence");
      [[fallthrough]];
    case Origin::kLlmSts:
      if (!positive || !negative) fail("generated records need a positive and a negative");
      break;
    case Origin::kSupervised:
      if (!positive) fail("supervised records need a positive");
      if (intermediate) fail("supervised records have no intermediate sentence");
      break;
  }
}

std::string HybridDataset::name() const {
  return std::string(to_string(domain)) + "." + std::string(to_string(pattern));
}

PatternExamples sample_pattern_examples(const PatternSource& src, GenerationKind kind, std::uint64_t seed) {
  std::vector<std::size_t> eligible;
  if (src.kind == PatternKind::kSTS) {
    for (std::size_t i = 0; i < src.sts.size(); ++i) {
      const double s = src.sts[i].score;
      const bool ok = kind == GenerationKind::kPositive   ? s > 4.0
                      : kind == GenerationKind::kNegative ? s < 1.0
                                                          : (s >= 1.0 && s <= 4.0);
      if (ok) eligible.push_back(i);
    }
  } else {
    if (kind == GenerationKind::kIntermediate)
      throw UnsupportedCombinationError("NLI pattern sources have no intermediate band");
    for (std::size_t i = 0; i < src.nli.size(); ++i) eligible.push_back(i);
  }
  if (eligible.size() < 3) {
    throw DataError("pattern source band '" + std::string(band_name(src.kind, kind)) + "' has " +
                    std::to_string(eligible.size()) + " records; 3 are required");
  }
  Rng rng(derive_seed(seed, 0xe7a, static_cast<int>(kind)));
  // Partial Fisher-Yates for the first three slots.
  for (std::size_t i = 0; i < 3; ++i) {
    std::size_t j = i + uniform_index(rng, eligible.size() - i);
    std::swap(eligible[i], eligible[j]);
  }
  std::array<std::size_t, 3> chosen{eligible[0], eligible[1], eligible[2]};
  std::sort(chosen.begin(), chosen.end());

  PatternExamples out;
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t i = chosen[k];
    if (src.kind == PatternKind::kSTS) {
      out[k] = {src.sts[i].sentence1, src.sts[i].sentence2};
    } else {
      out[k] = {src.nli[i].premise, kind == GenerationKind::kPositive ? src.nli[i].entailment : src.nli[i].contradiction};
    }
  }
  return out;
}

PromptSet make_prompt_set(const PatternSource& src, bool hierarchical, std::uint64_t seed) {
  if (hierarchical && src.kind != PatternKind::kSTS)
    throw UnsupportedCombinationError("hierarchical generation requires the STS pattern");
  PromptSet set;
  set.pattern = src.kind;
  std::vector<GenerationKind> kinds{GenerationKind::kPositive, GenerationKind::kNegative};
  if (hierarchical) kinds.insert(kinds.begin() + 1, GenerationKind::kIntermediate);
  for (auto kind : kinds) {
    PromptBundle b;
    b.kind = kind;
    b.examples = sample_pattern_examples(src, kind, seed);
    b.role_instructions = build_prompt(kind, src.kind, b.examples);
    b.hash = hex64(fnv1a(b.role_instructions));
    set.bundles.emplace(kind, std::move(b));
  }
  return set;
}

std::string mock_generate(std::string_view anchor, GenerationKind kind, std::uint64_t seed) {
  auto tokens = split_ws(anchor);
  const std::size_t n = tokens.size();
  if (n == 0) throw ArgumentError("mock_generate: empty anchor");
  if (kind != GenerationKind::kPositive && n < 2)
    throw ArgumentError("mock_generate: " + std::string(to_string(kind)) + " generation needs at least 2 tokens");
  Rng rng(derive_seed(seed, 0x3c0c, static_cast<int>(kind)));

  switch (kind) {
    case GenerationKind::kPositive: {
      auto out = tokens;
      shuffle_in_place(out, rng);
      if (out == tokens) std::rotate(out.begin(), out.begin() + 1, out.end());
      return join(out);
    }
    case GenerationKind::kIntermediate: {
      const std::size_t drop = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(0.3 * static_cast<double>(n))));
      tokens.resize(n - drop);
      return join(tokens);
    }
    case GenerationKind::kNegative: {
      std::unordered_set<std::string> present;
      for (const auto& t : tokens) present.insert(lower(t));
      std::vector<std::string_view> candidates;
      for (auto w : content_lexicon())
        if (!present.count(std::string(w))) candidates.push_back(w);
      bool any_content = false;
      for (const auto& t : tokens) any_content |= !is_function_word(lower(t));
      for (auto& t : tokens) {
        if (any_content && is_function_word(lower(t))) continue;
        t = std::string(candidates[uniform_index(rng, candidates.size())]);
      }
      return join(tokens);
    }
  }
  return std::string(anchor);
}

std::string sanitize_generation(std::string_view raw) {
  std::string s = trim(raw);
  static constexpr std::string_view kLabels[] = {"hypothesis:", "sentence 2:", "sentence:", "new sentence:",
                                                 "revised sentence:", "output:", "answer:"};
  const std::string low = lower(s);
  for (auto label : kLabels) {
    if (low.rfind(label, 0) == 0) {
      s = trim(std::string_view(s).substr(label.size()));
      break;
    }
  }
  auto strip_pair = [&](std::string_view open, std::string_view close) {
    if (s.size() >= open.size() + close.size() && s.rfind(open, 0) == 0 &&
        s.compare(s.size() - close.size(), close.size(), close) == 0) {
      s = trim(std::string_view(s).substr(open.size(), s.size() - open.size() - close.size()));
      return true;
    }
    return false;
  };
  strip_pair("\"", "\"") || strip_pair("'", "'") || strip_pair("“", "”");
  return s;
}

GenerationResult generate_quadruple(std::string_view anchor, std::size_t anchor_index, const PromptSet& prompts,
                                    ChatClient& client, const GenerationOptions& options) {
  if (options.hierarchical && options.pattern != PatternKind::kSTS)
    throw UnsupportedCombinationError("hierarchical generation requires the STS pattern");
  if (prompts.pattern != options.pattern) throw ArgumentError("prompt set pattern does not match generation options");

  GenerationResult result;
  result.anchor_index = anchor_index;
  const std::string anchor_str = trim(anchor);

  auto obtain = [&](GenerationKind kind, const std::string& user) -> std::optional<std::string> {
    const PromptBundle& bundle = prompts.at(kind);
    for (int attempt = 0; attempt < 2; ++attempt) {
      ChatRequest req{bundle.role_instructions, user, kind, derive_seed(options.seed, anchor_index, static_cast<int>(kind), attempt)};
      std::string out;
      try {
        out = sanitize_generation(client.complete(req));
      } catch (const GenerationError& e) {
        throw GenerationError("anchor " + std::to_string(anchor_index) + ": " + e.what());
      }
      if (!out.empty() && out != anchor_str) return out;
    }
    result.flag_reason = std::string(to_string(kind)) + " generation empty or identical to the anchor after retry";
    return std::nullopt;
  };

  QuadrupleExample q;
  q.anchor = std::string(anchor);
  q.origin = options.pattern == PatternKind::kSTS ? Origin::kLlmSts : Origin::kLlmNli;
  q.provenance.model = options.model_id;
  try {
    q.positive = obtain(GenerationKind::kPositive, anchor_str);
    if (!q.positive) return result;
    q.provenance.prompt_hashes.push_back(prompts.at(GenerationKind::kPositive).hash);
    if (options.hierarchical) {
      q.intermediate = obtain(GenerationKind::kIntermediate, anchor_str);
      if (!q.intermediate) return result;
      q.provenance.prompt_hashes.push_back(prompts.at(GenerationKind::kIntermediate).hash);
    }
    // Both patterns condition the negative on the generated positive.
    q.negative = obtain(GenerationKind::kNegative, *q.positive);
    if (!q.negative) return result;
    q.provenance.prompt_hashes.push_back(prompts.at(GenerationKind::kNegative).hash);
  } catch (const ArgumentError& e) {
    result.flag_reason = e.what();
    return result;
  }
  result.record = std::move(q);
  return result;
}

std::vector<GenerationResult> generate_all(std::span<const std::string> anchors, std::span<const std::size_t> anchor_indices,
                                           const PromptSet& prompts, ChatClient& client, const GenerationOptions& options,
                                           int concurrency) {
  if (anchors.size() != anchor_indices.size()) throw ArgumentError("generate_all: anchors and indices differ in length");
  const std::size_t n = anchors.size();
  std::vector<GenerationResult> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = generate_quadruple(anchors[i], anchor_indices[i], prompts, client, options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(concurrency, 1)), 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

HybridDataset assemble_hybrid(std::span<const std::string> corpus, std::span<const QuadrupleExample> generated,
                              std::size_t n_generated, CorpusDomain domain, PatternKind pattern) {
  if (generated.size() != n_generated)
    throw ArgumentError("assemble_hybrid: " + std::to_string(generated.size()) + " generated records but n_generated = " +
                        std::to_string(n_generated));
  std::unordered_map<std::string, std::deque<std::size_t>> pending;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    generated[i].validate();
    if (!generated[i].is_generated()) throw ArgumentError("assemble_hybrid: record " + std::to_string(i) + " is not LLM-generated");
    pending[generated[i].anchor].push_back(i);
  }

  HybridDataset out;
  out.domain = domain;
  out.pattern = pattern;
  out.n_generated = n_generated;
  out.examples.reserve(corpus.size());
  for (const auto& sentence : corpus) {
    auto it = pending.find(sentence);
    if (it != pending.end() && !it->second.empty()) {
      out.examples.push_back(generated[it->second.front()]);
      it->second.pop_front();
    } else {
      QuadrupleExample q;
      q.anchor = sentence;
      q.origin = Origin::kCorpusOnly;
      out.examples.push_back(std::move(q));
    }
  }
  for (const auto& [anchor, left] : pending)
    if (!left.empty()) throw ConsistencyError("generated anchor not found in corpus sample: '" + anchor + "'");
  return out;
}

SimulationResult simulate_patterns(std::span<const std::string> corpus, const PatternSource& src, std::size_t n_generated,
                                   CorpusDomain domain, ChatClient& client, const GenerationOptions& options,
                                   int concurrency) {
  if (options.hierarchical && options.pattern != PatternKind::kSTS)
    throw UnsupportedCombinationError("hierarchical generation requires the STS pattern");
  if (src.kind != options.pattern) throw ArgumentError("pattern source kind does not match the requested pattern");
  if (n_generated > corpus.size())
    throw ArgumentError("n_generated = " + std::to_string(n_generated) + " exceeds corpus size " + std::to_string(corpus.size()));

  SimulationResult out;
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(options.seed, 0xa7c4));
  shuffle_in_place(order, rng);
  order.resize(n_generated);
  std::sort(order.begin(), order.end());
  out.anchor_indices = order;

  std::vector<QuadrupleExample> generated;
  if (n_generated > 0) {
    out.prompts = make_prompt_set(src, options.hierarchical, options.seed);
    std::vector<std::string> anchors;
    anchors.reserve(order.size());
    for (auto i : order) anchors.push_back(corpus[i]);
    auto results = generate_all(anchors, order, out.prompts, client, options, concurrency);
    for (auto& r : results) {
      if (r.record) {
        generated.push_back(std::move(*r.record));
      } else {
        out.flagged.emplace_back(r.anchor_index, r.flag_reason);
      }
    }
  } else {
    out.prompts.pattern = options.pattern;
  }
  out.dataset = assemble_hybrid(corpus, generated, generated.size(), domain, options.pattern);
  return out;
}

}  // namespace csekit
