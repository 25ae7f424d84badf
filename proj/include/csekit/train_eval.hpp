#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "csekit/augment.hpp"
#include "csekit/losses.hpp"
#include "csekit/pattern_sim.hpp"
#include "csekit/repr_metrics.hpp"
#include "csekit/toy_encoder.hpp"

namespace csekit {

struct TrainConfig {
  std::string optimizer = "adamw";
  double learning_rate = 3e-5;
  int batch_size = 256;
  double tau = 5e-2;
  HTConfig ht;
  int epochs = 1;
  int record_interval = 125;
  double heldout_fraction = 0.10;
  std::uint64_t seed = 0;
  /// Positive view for corpus_only records.
  Augmentation augmentation = Augmentation::kDropout;
  double weight_decay = 0.01;
  AlignUniformConfig metrics;

  void validate() const;
};

struct STSEvalSet {
  std::vector<ScoredPair> records;

  /// At least two records, gold scores in [0, 5] and not all equal.
  void validate() const;
};

struct HeldoutSplit {
  HybridDataset train;
  HybridDataset heldout;
};

/// Seeded shuffle, then the first ceil(fraction * N) records are held out.
HeldoutSplit split_heldout(const HybridDataset& dataset, double fraction, std::uint64_t seed);

/// Metric view of a hybrid split: (anchor, positive) pairs for records that
/// have a positive, self-positives for corpus_only records, and every
/// distinct sentence in the pool.
PairDataset pair_dataset_from_hybrid(const HybridDataset& dataset);

struct StepLoss {
  std::int64_t step = 0;  // 1-based optimizer step
  int epoch = 0;
  std::size_t batch = 0;  // batch index within the epoch
  double total = 0.0;
  double contrastive = 0.0;
  double ht = 0.0;
  std::size_t ht_rows = 0;
};

struct TrainResult {
  Trajectory trajectory;
  std::vector<StepLoss> losses;
  std::size_t train_size = 0;
  std::size_t heldout_size = 0;
  std::int64_t steps = 0;
};

/// Trains `encoder` in place. A snapshot is taken before the first update,
/// after every `record_interval` updates, and after the final update.
/// Non-finite loss raises NumericError naming the batch.
TrainResult train(const TrainConfig& config, const HybridDataset& dataset, ToyEncoder& encoder, const STSEvalSet& evalset);

struct TrainedModel {
  std::unique_ptr<ToyEncoder> encoder;
  TrainResult result;
};

TrainedModel train(const TrainConfig& config, const HybridDataset& dataset, const EncoderHandle& handle,
                   const ToyEncoderConfig& base, const STSEvalSet& evalset);

/// epochs * ceil(n_train / batch_size).
std::int64_t planned_steps(std::size_t n_train, int batch_size, int epochs);

/// Held-out size produced by split_heldout for N records.
std::size_t heldout_count(std::size_t n, double fraction);

void write_losses_csv(const std::vector<StepLoss>& losses, std::ostream& out);
void write_losses_csv(const std::vector<StepLoss>& losses, const std::filesystem::path& path);

/// Spearman between cosine similarities of the encoded pairs and gold.
double evaluate_sts(const SentenceEncoder& encoder, const STSEvalSet& evalset);

inline constexpr int kDefaultTopK = 5;

/// Mean of the k largest spearman_eval values (all of them when fewer).
double top_k_average(const Trajectory& trajectory, int k);

struct GridSpec {
  std::vector<double> learning_rates;
  std::vector<double> m1s;
  std::vector<double> m2s;
  std::vector<double> betas;

  void validate() const;
  std::size_t cells() const { return learning_rates.size() * m1s.size() * m2s.size() * betas.size(); }
};

struct GridCell {
  double learning_rate = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  double beta = 0.0;
  std::optional<double> score;
  std::optional<RFDResult> rfd;
  std::string error;  // set when the cell failed

  bool ok() const { return score.has_value(); }
};

struct GridResult {
  std::vector<GridCell> cells;  // enumeration order lr -> m1 -> m2 -> beta
  std::optional<std::size_t> best;
  std::size_t failures = 0;

  TrainConfig best_config(const TrainConfig& base) const;
};

using EncoderFactory = std::function<std::unique_ptr<ToyEncoder>()>;

/// Trains one run per cell from a fresh encoder and scores it with
/// top_k_average. A failing cell is recorded and the search continues;
/// ties go to the first-enumerated cell.
GridResult grid_search(const GridSpec& grid, const TrainConfig& base, const HybridDataset& dataset,
                       const EncoderFactory& factory, const STSEvalSet& evalset, int top_k = kDefaultTopK);

/// One row per cell: hyperparameters, score, rfd, status, best marker.
void write_grid_report(const GridResult& result, std::ostream& out);
void write_grid_report(const GridResult& result, const std::filesystem::path& path);

struct AblationRow {
  std::size_t n_generated = 0;
  std::size_t n_flagged = 0;
  std::optional<double> score;
  std::optional<RFDResult> rfd;
  std::string error;
};

struct AblationSetup {
  std::vector<std::string> corpus;
  PatternSource source;
  CorpusDomain domain = CorpusDomain::kWiki;
  GenerationOptions generation;
  int concurrency = 1;
};

/// Varies the number of generated quadruples with everything else fixed:
/// one simulate_patterns + train per count.
std::vector<AblationRow> ablation_over_generated(const AblationSetup& setup, const std::vector<std::size_t>& counts,
                                                 ChatClient& client, const TrainConfig& config,
                                                 const EncoderFactory& factory, const STSEvalSet& evalset,
                                                 int top_k = kDefaultTopK);

void write_ablation_report(const std::vector<AblationRow>& rows, std::ostream& out);

}  // namespace csekit
