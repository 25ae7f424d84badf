#include "csekit/lexical_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "csekit/error.hpp"
#include "csekit/util.hpp"

namespace csekit {

namespace {

// Lexicographic DP score: fewer edits first, then more retains.
struct Cell {
  int cost = 0;
  int retains = 0;

  bool better_than(const Cell& o) const { return cost < o.cost || (cost == o.cost && retains > o.retains); }
  bool operator==(const Cell&) const = default;
};

}  // namespace

MerResult mer_tokens(std::span<const std::string> ref, std::span<const std::string> hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  MerResult out;
  if (n == 0 && m == 0) {
    out.empty = true;
    return out;
  }

  std::vector<Cell> dp((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> Cell& { return dp[i * (m + 1) + j]; };
  for (std::size_t i = 1; i <= n; ++i) at(i, 0) = {static_cast<int>(i), 0};
  for (std::size_t j = 1; j <= m; ++j) at(0, j) = {static_cast<int>(j), 0};
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const Cell& d = at(i - 1, j - 1);
      Cell best = ref[i - 1] == hyp[j - 1] ? Cell{d.cost, d.retains + 1} : Cell{d.cost + 1, d.retains};
      Cell del{at(i - 1, j).cost + 1, at(i - 1, j).retains};
      Cell ins{at(i, j - 1).cost + 1, at(i, j - 1).retains};
      if (del.better_than(best)) best = del;
      if (ins.better_than(best)) best = ins;
      at(i, j) = best;
    }
  }

  // Backtrace, preferring retain > substitute > delete > insert among moves
  // that reproduce the optimal cell.
  std::size_t i = n, j = m;
  EditCounts& c = out.counts;
  while (i > 0 || j > 0) {
    const Cell cur = at(i, j);
    if (i > 0 && j > 0) {
      const Cell& d = at(i - 1, j - 1);
      if (ref[i - 1] == hyp[j - 1] && cur == Cell{d.cost, d.retains + 1}) {
        ++c.retains;
        --i, --j;
        continue;
      }
      if (ref[i - 1] != hyp[j - 1] && cur == Cell{d.cost + 1, d.retains}) {
        ++c.substitutions;
        --i, --j;
        continue;
      }
    }
    if (i > 0 && cur == Cell{at(i - 1, j).cost + 1, at(i - 1, j).retains}) {
      ++c.deletions;
      --i;
      continue;
    }
    ++c.insertions;
    --j;
  }
  out.value = static_cast<double>(c.errors()) / static_cast<double>(c.errors() + c.retains);
  return out;
}

MerResult mer(std::string_view s1, std::string_view s2) {
  const auto a = tokenize(s1);
  const auto b = tokenize(s2);
  return mer_tokens(a, b);
}

Histogram density_histogram(std::span<const double> values, double lo, double hi, int bins) {
  if (bins < 1) throw ArgumentError("histogram needs at least one bin");
  if (!(hi > lo)) throw ArgumentError("histogram range must be non-empty");
  if (values.empty()) throw ArgumentError("histogram of an empty value list");
  Histogram h;
  const double width = (hi - lo) / bins;
  h.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int k = 0; k <= bins; ++k) h.bin_edges[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / bins;
  h.bin_edges.back() = hi;
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError("histogram value is not finite");
    const double clamped = std::clamp(v, lo, hi);
    auto k = std::clamp(static_cast<int>(std::floor((clamped - lo) / width)), 0, bins - 1);
    // settle against the stored edges so a value on an edge opens its bin
    while (k > 0 && clamped < h.bin_edges[static_cast<std::size_t>(k)]) --k;
    while (k < bins - 1 && clamped >= h.bin_edges[static_cast<std::size_t>(k) + 1]) ++k;
    ++counts[static_cast<std::size_t>(k)];
  }
  h.densities.resize(counts.size());
  const double norm = static_cast<double>(values.size()) * width;
  for (std::size_t k = 0; k < counts.size(); ++k) h.densities[k] = static_cast<double>(counts[k]) / norm;
  return h;
}

std::string_view to_string(PairMetric metric) { return metric == PairMetric::kMER ? "MER" : "CS"; }

PairMetric parse_pair_metric(std::string_view name) {
  if (name == "MER" || name == "mer") return PairMetric::kMER;
  if (name == "CS" || name == "cs") return PairMetric::kCS;
  throw UsageError("unknown pair metric '" + std::string(name) + "' (expected MER or CS)");
}

Histogram pairwise_histogram(std::span<const std::pair<std::string, std::string>> pairs, PairMetric metric,
                             const SentenceEncoder* encoder, int bins) {
  if (pairs.empty()) throw ArgumentError("pairwise_histogram: no pairs");
  if (metric == PairMetric::kCS && encoder == nullptr) throw ArgumentError("cosine-similarity histogram requires an encoder");
  std::vector<double> values;
  values.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    if (metric == PairMetric::kMER) {
      auto r = mer(a, b);
      if (!r.empty) values.push_back(r.value);
    } else {
      values.push_back(cosine_similarity(encoder->encode_one(a, true), encoder->encode_one(b, true)));
    }
  }
  if (values.empty()) throw DataError("pairwise_histogram: every pair was empty after tokenization");
  return metric == PairMetric::kMER ? density_histogram(values, 0.0, 1.0, bins) : density_histogram(values, -1.0, 1.0, bins);
}

void write_histogram_tsv(const Histogram& hist, std::ostream& out) {
  out << "bin_left\tbin_right\tdensity\n";
  for (std::size_t k = 0; k < hist.bins(); ++k)
    out << format_double(hist.bin_edges[k]) << '\t' << format_double(hist.bin_edges[k + 1]) << '\t'
        << format_double(hist.densities[k]) << '\n';
}

}  // namespace csekit
