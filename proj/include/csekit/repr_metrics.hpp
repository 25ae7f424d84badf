#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "csekit/augment.hpp"
#include "csekit/embeddings.hpp"

namespace csekit {

struct AlignUniformConfig {
  double alpha = 2.0;
  double t = 2.0;
  void validate() const;
};

/// Mean of ||e1 - e2||^alpha over positive pairs.
double alignment(std::span<const std::pair<Embedding, Embedding>> positive_pairs, const AlignUniformConfig& cfg);

/// log of the mean of exp(-t ||ei - ej||^2) over all unordered pairs i < j.
/// Exact O(n^2) enumeration.
double uniformity(std::span<const Embedding> embeddings, const AlignUniformConfig& cfg);

struct ScoredPair {
  std::string sentence1;
  std::string sentence2;
  double score = 0.0;
};

/// The view of a data split that the metrics need.
struct PairDataset {
  std::vector<std::pair<std::string, std::string>> positive_pairs;
  /// Sentences whose positive is their own augmented view.
  std::vector<std::string> self_positives;
  /// Distinct sentences for uniformity.
  std::vector<std::string> pool;
  /// Gold-scored pairs for Spearman; only required on evaluation data.
  std::vector<ScoredPair> scored;

  bool has_positive_pairs() const { return !positive_pairs.empty() || !self_positives.empty(); }
};

inline constexpr double kPositiveScoreThreshold = 4.0;

/// Positive pairs are those scored above `positive_threshold`; the pool is
/// every distinct sentence in order of first appearance.
PairDataset pair_dataset_from_scored(std::span<const ScoredPair> pairs, double positive_threshold = kPositiveScoreThreshold);

/// Appends `sentence` to `pool` if it has not been seen.
class PoolBuilder {
 public:
  void add(const std::string& sentence);
  std::vector<std::string> take() { return std::move(pool_); }

 private:
  std::vector<std::string> pool_;
  std::unordered_set<std::string> seen_;
};

struct TrajectorySnapshot {
  std::int64_t step = 0;
  double align_heldout = 0.0;
  double unif_heldout = 0.0;
  double align_eval = 0.0;
  double unif_eval = 0.0;
  double spearman_eval = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySnapshot> snapshots;
  int record_interval = 125;

  /// Rejects non-finite fields and non-increasing steps.
  void append(const TrajectorySnapshot& snap);
  bool empty() const { return snapshots.empty(); }
  std::size_t size() const { return snapshots.size(); }
};

struct RFDResult {
  double rfd_a = 0.0;
  double rfd_u = 0.0;
};

/// Mean over snapshots of (held-out - eval) alignment and uniformity.
RFDResult rfd(const Trajectory& trajectory);

struct SnapshotOptions {
  AlignUniformConfig metrics;
  /// Forms the positive view of `self_positives`.
  Augmentation augmentation = Augmentation::kDropout;
  std::uint64_t seed = 0;
};

TrajectorySnapshot record_snapshot(const SentenceEncoder& encoder, const PairDataset& heldout,
                                   const PairDataset& evaldata, std::int64_t step, const SnapshotOptions& options);

inline constexpr std::string_view kTrajectoryHeader = "step,align_heldout,unif_heldout,align_eval,unif_eval,spearman_eval";

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);
void write_trajectory_csv(const Trajectory& trajectory, const std::filesystem::path& path);
Trajectory read_trajectory_csv(std::istream& in, const std::string& source_name);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

}  // namespace csekit
