#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csekit/repr_metrics.hpp"

namespace csekit {

class ChatClient;

enum class PatternKind { kSTS, kNLI };
enum class GenerationKind { kPositive, kIntermediate, kNegative };
enum class CorpusDomain { kWiki, kNLI };
enum class Origin { kLlmSts, kLlmNli, kSupervised, kCorpusOnly };

std::string_view to_string(PatternKind kind);
std::string_view to_string(GenerationKind kind);
std::string_view to_string(CorpusDomain domain);
std::string_view to_string(Origin origin);
PatternKind parse_pattern_kind(std::string_view name);
CorpusDomain parse_corpus_domain(std::string_view name);
Origin parse_origin(std::string_view name);

struct NliRecord {
  std::string premise;
  std::string entailment;
  std::string contradiction;
};

/// Pool of STS-scored pairs or NLI triples that in-context examples come from.
struct PatternSource {
  PatternKind kind = PatternKind::kSTS;
  std::vector<ScoredPair> sts;
  std::vector<NliRecord> nli;
};

struct ExamplePair {
  std::string input;
  std::string output;
  friend bool operator==(const ExamplePair&, const ExamplePair&) = default;
};

using PatternExamples = std::array<ExamplePair, 3>;

struct PromptBundle {
  std::string role_instructions;  // rendered prompt, examples included
  PatternExamples examples;
  GenerationKind kind = GenerationKind::kPositive;
  std::string hash;  // FNV-1a of role_instructions
};

/// One bundle per generation kind used by a run. Built once; every anchor
/// of the run sees the same three examples per kind.
struct PromptSet {
  PatternKind pattern = PatternKind::kSTS;
  std::map<GenerationKind, PromptBundle> bundles;

  const PromptBundle& at(GenerationKind kind) const;
};

struct Provenance {
  std::string model;
  std::vector<std::string> prompt_hashes;
};

struct QuadrupleExample {
  std::string anchor;
  std::optional<std::string> positive;
  std::optional<std::string> intermediate;
  std::optional<std::string> negative;
  Origin origin = Origin::kCorpusOnly;
  Provenance provenance;

  bool is_generated() const { return origin == Origin::kLlmSts || origin == Origin::kLlmNli; }
  /// Throws DataError if the origin-dependent field invariants are broken.
  void validate() const;
};

struct HybridDataset {
  std::vector<QuadrupleExample> examples;
  std::size_t n_generated = 0;
  CorpusDomain domain = CorpusDomain::kWiki;
  PatternKind pattern = PatternKind::kSTS;

  /// "[Data-Domain].[Similarity-Pattern]", e.g. "Wiki.STS".
  std::string name() const;
};

/// Three example pairs for one generation kind. STS bands: positive > 4,
/// negative < 1, intermediate in [1, 4]. NLI: (premise, entailment) or
/// (premise, contradiction). DataError names the band when fewer than three
/// records qualify.
PatternExamples sample_pattern_examples(const PatternSource& src, GenerationKind kind, std::uint64_t seed);

/// Renders one of the five prompt templates with the examples spliced in.
/// (intermediate, NLI) has no template and raises
/// UnsupportedCombinationError.
std::string build_prompt(GenerationKind kind, PatternKind pattern, const PatternExamples& examples);

PromptSet make_prompt_set(const PatternSource& src, bool hierarchical, std::uint64_t seed);

/// Offline stand-in for the LLM. Deterministic in (anchor, kind, seed):
///   positive:     seeded reordering of the anchor's tokens (same multiset)
///   intermediate: drops the last max(1, floor(0.3 n)) tokens
///   negative:     replaces content tokens with fixed-lexicon words absent
///                 from the sentence
std::string mock_generate(std::string_view anchor, GenerationKind kind, std::uint64_t seed);

/// Strips a leading "Hypothesis:" / "Sentence 2:"-style label, surrounding
/// quotes and whitespace.
std::string sanitize_generation(std::string_view raw);

struct GenerationResult {
  std::size_t anchor_index = 0;
  std::optional<QuadrupleExample> record;
  /// Set when the record was rejected (empty or anchor-identical output
  /// after one retry).
  std::string flag_reason;
};

struct GenerationOptions {
  PatternKind pattern = PatternKind::kSTS;
  bool hierarchical = false;
  std::uint64_t seed = 0;
  std::string model_id = "mock";
};

GenerationResult generate_quadruple(std::string_view anchor, std::size_t anchor_index, const PromptSet& prompts,
                                    ChatClient& client, const GenerationOptions& options);

/// Runs generate_quadruple over `anchors` with at most `concurrency`
/// in-flight client calls. Results come back in anchor order.
std::vector<GenerationResult> generate_all(std::span<const std::string> anchors, std::span<const std::size_t> anchor_indices,
                                           const PromptSet& prompts, ChatClient& client, const GenerationOptions& options,
                                           int concurrency);

/// Generated quadruples plus every remaining corpus sentence as a
/// corpus_only record, in corpus order.
HybridDataset assemble_hybrid(std::span<const std::string> corpus, std::span<const QuadrupleExample> generated,
                              std::size_t n_generated, CorpusDomain domain, PatternKind pattern);

struct SimulationResult {
  HybridDataset dataset;
  PromptSet prompts;
  /// Corpus positions drawn as anchors, ascending.
  std::vector<std::size_t> anchor_indices;
  /// (corpus position, reason) for anchors whose generation was rejected;
  /// those sentences stay corpus_only.
  std::vector<std::pair<std::size_t, std::string>> flagged;
};

/// Full pattern-simulation pipeline: draws `n_generated` distinct anchors
/// from the corpus (seeded), builds the prompt set, generates a quadruple per
/// anchor and assembles the hybrid dataset.
SimulationResult simulate_patterns(std::span<const std::string> corpus, const PatternSource& src, std::size_t n_generated,
                                   CorpusDomain domain, ChatClient& client, const GenerationOptions& options,
                                   int concurrency);

}  // namespace csekit
