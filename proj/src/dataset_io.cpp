#include "csekit/dataset_io.hpp"

#include <fstream>
#include <json.hpp>

#include "csekit/error.hpp"

namespace csekit {

namespace {

using nlohmann::json;

template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(where + ": invalid JSON (" + e.what() + ")");
    }
    try {
      fn(j, where);
    } catch (const json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EnvironmentError("cannot write " + path.string());
  return out;
}

std::string require_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string()) throw ParseError(where + ": field '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_string()) throw ParseError(where + ": field '" + key + "' must be a string or null");
  return j.at(key).get<std::string>();
}

}  // namespace

std::vector<std::string> read_corpus_jsonl(const std::filesystem::path& path) {
  std::vector<std::string> out;
  for_each_json_line(path, [&](const json& j, const std::string& where) { out.push_back(require_string(j, "text", where)); });
  return out;
}

void write_corpus_jsonl(const std::vector<std::string>& corpus, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const auto& s : corpus) out << json{{"text", s}}.dump() << '\n';
}

std::vector<ScoredPair> read_sts_jsonl(const std::filesystem::path& path) {
  std::vector<ScoredPair> out;
  for_each_json_line(path, [&](const json& j, const std::string& where) {
    if (!j.contains("score") || !j.at("score").is_number()) throw ParseError(where + ": field 'score' must be a number");
    out.push_back({require_string(j, "sentence1", where), require_string(j, "sentence2", where), j.at("score").get<double>()});
  });
  return out;
}

void write_sts_jsonl(const std::vector<ScoredPair>& pairs, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const auto& p : pairs) out << json{{"sentence1", p.sentence1}, {"sentence2", p.sentence2}, {"score", p.score}}.dump() << '\n';
}

std::vector<NliRecord> read_nli_jsonl(const std::filesystem::path& path) {
  std::vector<NliRecord> out;
  for_each_json_line(path, [&](const json& j, const std::string& where) {
    out.push_back({require_string(j, "premise", where), require_string(j, "entailment", where),
                   require_string(j, "contradiction", where)});
  });
  return out;
}

void write_nli_jsonl(const std::vector<NliRecord>& records, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const auto& r : records)
    out << json{{"premise", r.premise}, {"entailment", r.entailment}, {"contradiction", r.contradiction}}.dump() << '\n';
}

PatternSource read_pattern_source(const std::filesystem::path& path, PatternKind kind) {
  PatternSource src;
  src.kind = kind;
  if (kind == PatternKind::kSTS) {
    src.sts = read_sts_jsonl(path);
  } else {
    src.nli = read_nli_jsonl(path);
  }
  return src;
}

std::string to_jsonl_line(const QuadrupleExample& r) {
  auto opt = [](const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); };
  // Keys in fixed order so files are byte-stable.
  std::string out = "{";
  out += "\"anchor\":" + json(r.anchor).dump();
  out += ",\"positive\":" + opt(r.positive).dump();
  out += ",\"intermediate\":" + opt(r.intermediate).dump();
  out += ",\"negative\":" + opt(r.negative).dump();
  out += ",\"origin\":" + json(std::string(to_string(r.origin))).dump();
  out += "}";
  return out;
}

QuadrupleExample from_jsonl_line(const std::string& line, const std::string& where) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(where + ": invalid JSON (" + e.what() + ")");
  }
  QuadrupleExample q;
  q.anchor = require_string(j, "anchor", where);
  q.positive = optional_string(j, "positive", where);
  q.intermediate = optional_string(j, "intermediate", where);
  q.negative = optional_string(j, "negative", where);
  try {
    q.origin = parse_origin(require_string(j, "origin", where));
  } catch (const ParseError& e) {
    throw ParseError(where + ": " + e.what());
  }
  q.validate();
  return q;
}

void write_hybrid_jsonl(const HybridDataset& dataset, std::ostream& out) {
  for (const auto& r : dataset.examples) out << to_jsonl_line(r) << '\n';
}

void write_hybrid_jsonl(const HybridDataset& dataset, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_hybrid_jsonl(dataset, out);
}

HybridDataset read_hybrid_jsonl(const std::filesystem::path& path, CorpusDomain domain, PatternKind pattern) {
  HybridDataset ds;
  ds.domain = domain;
  ds.pattern = pattern;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open dataset " + path.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ds.examples.push_back(from_jsonl_line(line, path.string() + ":" + std::to_string(lineno)));
    if (ds.examples.back().is_generated()) ++ds.n_generated;
  }
  return ds;
}

}  // namespace csekit
