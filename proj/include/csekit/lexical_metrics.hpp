#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "csekit/embeddings.hpp"

namespace csekit {

struct EditCounts {
  int insertions = 0;
  int deletions = 0;
  int substitutions = 0;
  int retains = 0;

  int errors() const { return insertions + deletions + substitutions; }
  friend bool operator==(const EditCounts&, const EditCounts&) = default;
};

struct MerResult {
  double value = 0.0;
  EditCounts counts;
  /// Both inputs were empty after tokenization; `value` is meaningless.
  bool empty = false;
};

/// Match Error Rate (I+D+S)/(I+D+S+R) over a minimal-cost token alignment.
/// Among minimal-cost alignments the one with the most retains is used, so
/// the result is unique. Unit costs; retain is free.
MerResult mer_tokens(std::span<const std::string> reference, std::span<const std::string> hypothesis);

/// Tokenizes (lowercase, whitespace) and calls mer_tokens.
MerResult mer(std::string_view s1, std::string_view s2);

struct Histogram {
  std::vector<double> bin_edges;  // k + 1
  std::vector<double> densities;  // k

  std::size_t bins() const { return densities.size(); }
  double bin_width() const { return bin_edges.size() > 1 ? bin_edges[1] - bin_edges[0] : 0.0; }
};

/// Density-normalized histogram over [lo, hi] with equal-width bins; values
/// are clamped into range and `hi` falls into the last bin.
Histogram density_histogram(std::span<const double> values, double lo, double hi, int bins);

enum class PairMetric { kMER, kCS };

std::string_view to_string(PairMetric metric);
PairMetric parse_pair_metric(std::string_view name);

inline constexpr int kDefaultHistogramBins = 50;

/// Histogram of MER over [0,1] or cosine similarity over [-1,1] for every
/// pair. Cosine needs `encoder`. Empty-empty MER pairs are skipped.
Histogram pairwise_histogram(std::span<const std::pair<std::string, std::string>> pairs, PairMetric metric,
                             const SentenceEncoder* encoder, int bins = kDefaultHistogramBins);

/// `bin_left \t bin_right \t density` rows.
void write_histogram_tsv(const Histogram& hist, std::ostream& out);

}  // namespace csekit
