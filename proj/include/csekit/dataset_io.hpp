#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "csekit/pattern_sim.hpp"
#include "csekit/repr_metrics.hpp"

namespace csekit {

// JSON-lines readers. Blank lines are skipped; any malformed line raises
// ParseError naming the file and line number.

/// `{"text": string}` per line.
std::vector<std::string> read_corpus_jsonl(const std::filesystem::path& path);
void write_corpus_jsonl(const std::vector<std::string>& corpus, const std::filesystem::path& path);

/// `{"sentence1": s, "sentence2": s, "score": number}` per line.
std::vector<ScoredPair> read_sts_jsonl(const std::filesystem::path& path);
void write_sts_jsonl(const std::vector<ScoredPair>& pairs, const std::filesystem::path& path);

/// `{"premise": s, "entailment": s, "contradiction": s}` per line.
std::vector<NliRecord> read_nli_jsonl(const std::filesystem::path& path);
void write_nli_jsonl(const std::vector<NliRecord>& records, const std::filesystem::path& path);

PatternSource read_pattern_source(const std::filesystem::path& path, PatternKind kind);

/// `{"anchor": s, "positive": s|null, "intermediate": s|null,
///   "negative": s|null, "origin": string}` per line.
std::string to_jsonl_line(const QuadrupleExample& record);
QuadrupleExample from_jsonl_line(const std::string& line, const std::string& where);

void write_hybrid_jsonl(const HybridDataset& dataset, std::ostream& out);
void write_hybrid_jsonl(const HybridDataset& dataset, const std::filesystem::path& path);
/// Domain and pattern are not stored per line; callers pass them.
HybridDataset read_hybrid_jsonl(const std::filesystem::path& path, CorpusDomain domain = CorpusDomain::kWiki,
                                PatternKind pattern = PatternKind::kSTS);

}  // namespace csekit
