#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csekit/pattern_sim.hpp"
#include "csekit/repr_metrics.hpp"

namespace csekit {

/// A small closed world for desk-scale experiments. Sentences are bags of
/// content words from the shared lexicon in random order, with function
/// words sprinkled in. Gold similarity depends on content words only:
/// score = 5 * Jaccard(content(s1), content(s2)).
struct SyntheticWorldConfig {
  std::size_t corpus_size = 200;
  std::size_t sts_source_pairs = 60;
  std::size_t nli_source_records = 30;
  std::size_t eval_pairs = 200;
  int min_content = 4;
  int max_content = 7;
  /// Chance of a function word before each content word.
  double function_rate = 0.3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticWorld {
  std::vector<std::string> corpus;
  std::vector<ScoredPair> sts_source;
  std::vector<NliRecord> nli_source;
  /// Held-out STS-style evaluation pairs, disjoint draws from the corpus.
  std::vector<ScoredPair> eval;
};

SyntheticWorld make_synthetic_world(const SyntheticWorldConfig& config);

/// Distinct non-function tokens of a sentence.
std::vector<std::string> content_tokens(std::string_view sentence);

/// 5 * |A ∩ B| / |A ∪ B| over content tokens; 0 when both are empty.
double content_similarity_score(std::string_view a, std::string_view b);

}  // namespace csekit
