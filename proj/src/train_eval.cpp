#include "csekit/train_eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "csekit/error.hpp"
#include "csekit/optimizer.hpp"
#include "csekit/stats.hpp"

namespace csekit {

namespace {

// Roles keep every stochastic draw of a step independent of the others, so
// adding or removing one column (e.g. intermediates) leaves the rest intact.
enum Role : int { kRoleAnchor = 0, kRolePositive = 1, kRoleNegative = 2, kRoleIntermediate = 3, kRoleAugment = 4 };

constexpr std::uint64_t kEpochShuffleTag = 0xe90c;
constexpr std::uint64_t kStepTag = 0xd0;
constexpr std::uint64_t kSnapshotTag = 0x5a9;
constexpr std::uint64_t kSplitTag = 0x5b17;

struct EncodedColumn {
  Eigen::MatrixXd rows;
  std::vector<ToyEncoder::Cache> caches;
  std::vector<bool> present;
};

EncodedColumn encode_column(const ToyEncoder& encoder, const std::vector<const std::string*>& texts, std::uint64_t seed,
                            std::int64_t step, int role) {
  EncodedColumn col;
  const auto n = static_cast<Eigen::Index>(texts.size());
  col.rows = Eigen::MatrixXd::Zero(n, encoder.dim());
  col.caches.resize(texts.size());
  col.present.assign(texts.size(), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string* text = texts[static_cast<std::size_t>(i)];
    if (!text) continue;
    Rng rng(derive_seed(seed, kStepTag, step, i, role));
    col.rows.row(i) = encoder.forward(*text, &rng, true, &col.caches[static_cast<std::size_t>(i)]).values.transpose();
    col.present[static_cast<std::size_t>(i)] = true;
  }
  return col;
}

void backprop_column(const ToyEncoder& encoder, const EncodedColumn& col, const Eigen::MatrixXd& grad,
                     ToyEncoder::Parameters& grads) {
  if (grad.size() == 0) return;
  for (std::size_t i = 0; i < col.caches.size(); ++i) {
    if (!col.present[i]) continue;
    encoder.backward(col.caches[i], grad.row(static_cast<Eigen::Index>(i)).transpose(), grads);
  }
}

void set_zero(ToyEncoder::Parameters& p) {
  p.embeddings.setZero();
  p.dense.setZero();
  p.bias.setZero();
  p.mix.setZero();
}

}  // namespace

void TrainConfig::validate() const {
  require_supported_optimizer(optimizer);
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (record_interval < 1) throw ConfigError("record_interval must be >= 1");
  if (!(heldout_fraction > 0.0 && heldout_fraction < 1.0)) throw ConfigError("heldout_fraction must lie in (0, 1)");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  InfoNCEConfig{tau}.validate();
  ht.validate();
  metrics.validate();
}

void STSEvalSet::validate() const {
  if (records.size() < 2) throw DataError("STS eval set needs at least 2 records");
  bool varied = false;
  for (const auto& r : records) {
    if (!(r.score >= 0.0 && r.score <= 5.0)) throw DataError("STS gold score outside [0, 5]: " + format_double(r.score));
    varied |= r.score != records.front().score;
  }
  if (!varied) throw UndefinedCorrelationError("STS eval set gold scores are all equal");
}

std::size_t heldout_count(std::size_t n, double fraction) {
  const double x = fraction * static_cast<double>(n);
  // 0.1 * 30 evaluates to 3.0000000000000004; snap products that are an
  // integer up to rounding before taking the ceiling.
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, x)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(x));
}

HeldoutSplit split_heldout(const HybridDataset& dataset, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ArgumentError("held-out fraction must lie in (0, 1)");
  const std::size_t n = dataset.examples.size();
  if (n < 2) throw ArgumentError("split_heldout needs at least 2 records, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, kSplitTag));
  shuffle_in_place(order, rng);
  // ceil can reach n only for fractions within rounding of 1; keep one
  // training record regardless.
  const std::size_t h = std::min(heldout_count(n, fraction), n - 1);

  HeldoutSplit out;
  for (auto* part : {&out.train, &out.heldout}) {
    part->domain = dataset.domain;
    part->pattern = dataset.pattern;
  }
  for (std::size_t k = 0; k < n; ++k) {
    auto& part = k < h ? out.heldout : out.train;
    part.examples.push_back(dataset.examples[order[k]]);
    if (part.examples.back().is_generated()) ++part.n_generated;
  }
  return out;
}

PairDataset pair_dataset_from_hybrid(const HybridDataset& dataset) {
  PairDataset out;
  PoolBuilder pool;
  for (const auto& r : dataset.examples) {
    pool.add(r.anchor);
    if (r.positive) {
      out.positive_pairs.emplace_back(r.anchor, *r.positive);
      pool.add(*r.positive);
    } else {
      out.self_positives.push_back(r.anchor);
    }
    if (r.intermediate) pool.add(*r.intermediate);
    if (r.negative) pool.add(*r.negative);
  }
  out.pool = pool.take();
  return out;
}

std::int64_t planned_steps(std::size_t n_train, int batch_size, int epochs) {
  if (batch_size < 1 || epochs < 0) throw ArgumentError("planned_steps: invalid batch size or epoch count");
  const auto b = static_cast<std::size_t>(batch_size);
  return static_cast<std::int64_t>(epochs) * static_cast<std::int64_t>((n_train + b - 1) / b);
}

TrainResult train(const TrainConfig& config, const HybridDataset& dataset, ToyEncoder& encoder, const STSEvalSet& evalset) {
  config.validate();
  evalset.validate();
  if (dataset.examples.empty()) throw DataError("training dataset is empty");
  for (const auto& r : dataset.examples) r.validate();

  HeldoutSplit split = split_heldout(dataset, config.heldout_fraction, config.seed);
  const PairDataset heldout = pair_dataset_from_hybrid(split.heldout);
  if (heldout.pool.size() < 2) throw DataError("held-out split has fewer than 2 distinct sentences; use a larger dataset");
  const PairDataset evaldata = pair_dataset_from_scored(evalset.records);

  TrainResult result;
  result.train_size = split.train.examples.size();
  result.heldout_size = split.heldout.examples.size();
  result.trajectory.record_interval = config.record_interval;

  SnapshotOptions snap_opts;
  snap_opts.metrics = config.metrics;
  snap_opts.augmentation = config.augmentation;
  snap_opts.seed = derive_seed(config.seed, kSnapshotTag);
  auto snapshot = [&](std::int64_t step) {
    result.trajectory.append(record_snapshot(encoder, heldout, evaldata, step, snap_opts));
  };

  AdamW optimizer({.learning_rate = config.learning_rate, .weight_decay = config.weight_decay});
  const InfoNCEConfig nce{config.tau};
  ToyEncoder::Parameters grads = encoder.zero_gradients();
  const auto& records = split.train.examples;
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);

  std::int64_t step = 0;
  snapshot(step);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng shuffle_rng(derive_seed(config.seed, kEpochShuffleTag, epoch));
    shuffle_in_place(order, shuffle_rng);

    for (std::size_t start = 0, b = 0; start < order.size(); start += batch, ++b) {
      const std::size_t end = std::min(order.size(), start + batch);
      const std::size_t n = end - start;
      const std::int64_t next_step = step + 1;

      std::vector<std::string> augmented(n);
      std::vector<const std::string*> anchors(n), positives(n), negatives(n, nullptr), intermediates(n, nullptr);
      bool any_negative = false, any_intermediate = false;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& r = records[order[start + i]];
        anchors[i] = &r.anchor;
        if (r.positive) {
          positives[i] = &*r.positive;
        } else if (config.augmentation == Augmentation::kDropout) {
          positives[i] = &r.anchor;
        } else {
          Rng aug_rng(derive_seed(config.seed, kStepTag, next_step, i, kRoleAugment));
          augmented[i] = augment_text(r.anchor, config.augmentation, aug_rng);
          positives[i] = &augmented[i];
        }
        if (r.negative) {
          negatives[i] = &*r.negative;
          any_negative = true;
          if (r.intermediate) {
            intermediates[i] = &*r.intermediate;
            any_intermediate = true;
          }
        }
      }

      const auto where = [&] {
        return "batch index " + std::to_string(b) + " (epoch " + std::to_string(epoch) + ", step " +
               std::to_string(next_step) + ")";
      };
      EncodedColumn a, p, neg, mid;
      ContrastiveBatch cb;
      BatchGradient g;
      CombinedLoss loss;
      try {
        a = encode_column(encoder, anchors, config.seed, next_step, kRoleAnchor);
        p = encode_column(encoder, positives, config.seed, next_step, kRolePositive);
        cb.anchors = a.rows;
        cb.positives = p.rows;
        if (any_negative) {
          neg = encode_column(encoder, negatives, config.seed, next_step, kRoleNegative);
          cb.hard_negatives = neg.rows;
          cb.has_hard_negative = neg.present;
        }
        if (any_intermediate) {
          mid = encode_column(encoder, intermediates, config.seed, next_step, kRoleIntermediate);
          cb.intermediates = mid.rows;
          cb.has_ht_supervision = mid.present;
        }

        g = BatchGradient::zeros_like(cb);
        loss = combined_loss_with_grad(cb, nce, config.ht, &g);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " at " + where());
      }
      if (!std::isfinite(loss.total) || !std::isfinite(g.anchors.sum()) || !std::isfinite(g.positives.sum()))
        throw NumericError("non-finite loss at " + where());

      set_zero(grads);
      backprop_column(encoder, a, g.anchors, grads);
      backprop_column(encoder, p, g.positives, grads);
      if (any_negative) backprop_column(encoder, neg, g.hard_negatives, grads);
      if (any_intermediate) backprop_column(encoder, mid, g.intermediates, grads);
      optimizer.step(flat_views(encoder.parameters()), flat_views(std::as_const(grads)));
      step = next_step;

      StepLoss sl;
      sl.step = step;
      sl.epoch = epoch;
      sl.batch = b;
      sl.total = loss.total;
      sl.contrastive = loss.contrastive;
      sl.ht = loss.ht;
      sl.ht_rows = any_intermediate ? static_cast<std::size_t>(std::count(mid.present.begin(), mid.present.end(), true)) : 0;
      result.losses.push_back(sl);

      if (step % config.record_interval == 0) snapshot(step);
    }
  }
  if (result.trajectory.snapshots.back().step != step) snapshot(step);
  result.steps = step;
  return result;
}

TrainedModel train(const TrainConfig& config, const HybridDataset& dataset, const EncoderHandle& handle,
                   const ToyEncoderConfig& base, const STSEvalSet& evalset) {
  TrainedModel out;
  out.encoder = load_encoder(handle, base);
  out.result = train(config, dataset, *out.encoder, evalset);
  return out;
}

void write_losses_csv(const std::vector<StepLoss>& losses, std::ostream& out) {
  out << "step,epoch,batch,total,contrastive,ht,ht_rows\n";
  for (const auto& l : losses) {
    out << l.step << ',' << l.epoch << ',' << l.batch << ',' << format_double(l.total) << ',' << format_double(l.contrastive)
        << ',' << format_double(l.ht) << ',' << l.ht_rows << '\n';
  }
}

void write_losses_csv(const std::vector<StepLoss>& losses, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw EnvironmentError("cannot write " + path.string());
  write_losses_csv(losses, out);
}

double evaluate_sts(const SentenceEncoder& encoder, const STSEvalSet& evalset) {
  evalset.validate();
  std::vector<double> predicted, gold;
  predicted.reserve(evalset.records.size());
  gold.reserve(evalset.records.size());
  for (const auto& r : evalset.records) {
    predicted.push_back(cosine_similarity(encoder.encode_one(r.sentence1, true), encoder.encode_one(r.sentence2, true)));
    gold.push_back(r.score);
  }
  return spearman(predicted, gold);
}

double top_k_average(const Trajectory& trajectory, int k) {
  if (k < 1) throw ArgumentError("top_k_average: k must be >= 1");
  if (trajectory.empty()) throw ArgumentError("top_k_average: empty trajectory");
  std::vector<double> values;
  values.reserve(trajectory.size());
  for (const auto& s : trajectory.snapshots) values.push_back(s.spearman_eval);
  std::sort(values.begin(), values.end(), std::greater<>());
  const std::size_t m = std::min(values.size(), static_cast<std::size_t>(k));
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) sum += values[i];
  return sum / static_cast<double>(m);
}

void GridSpec::validate() const {
  if (learning_rates.empty() || m1s.empty() || m2s.empty() || betas.empty())
    throw ConfigError("grid: every hyperparameter list must be non-empty");
}

TrainConfig GridResult::best_config(const TrainConfig& base) const {
  if (!best) throw ArgumentError("grid search produced no successful cell");
  const GridCell& c = cells[*best];
  TrainConfig out = base;
  out.learning_rate = c.learning_rate;
  out.ht.m1 = c.m1;
  out.ht.m2 = c.m2;
  out.ht.beta = c.beta;
  return out;
}

GridResult grid_search(const GridSpec& grid, const TrainConfig& base, const HybridDataset& dataset,
                       const EncoderFactory& factory, const STSEvalSet& evalset, int top_k) {
  grid.validate();
  GridResult out;
  for (double lr : grid.learning_rates)
    for (double m1 : grid.m1s)
      for (double m2 : grid.m2s)
        for (double beta : grid.betas) {
          GridCell cell{lr, m1, m2, beta, std::nullopt, std::nullopt, {}};
          try {
            TrainConfig cfg = base;
            cfg.learning_rate = lr;
            cfg.ht = {m1, m2, beta};
            auto encoder = factory();
            TrainResult r = train(cfg, dataset, *encoder, evalset);
            cell.score = top_k_average(r.trajectory, top_k);
            cell.rfd = rfd(r.trajectory);
          } catch (const std::exception& e) {
            cell.error = e.what();
            ++out.failures;
          }
          if (cell.ok() && (!out.best || *cell.score > *out.cells[*out.best].score)) out.best = out.cells.size();
          out.cells.push_back(std::move(cell));
        }
  return out;
}

namespace {

std::string one_line(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char c) { return c == '\n' || c == '\r' || c == '\t'; }, ' ');
  return s;
}

}  // namespace

void write_grid_report(const GridResult& result, std::ostream& out) {
  out << "cell\tlearning_rate\tm1\tm2\tbeta\ttop5_spearman\trfd_a\trfd_u\tstatus\tbest\terror\n";
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const auto& c = result.cells[i];
    out << i << '\t' << format_double(c.learning_rate) << '\t' << format_double(c.m1) << '\t' << format_double(c.m2) << '\t'
        << format_double(c.beta) << '\t' << (c.score ? format_double(*c.score) : "nan") << '\t'
        << (c.rfd ? format_double(c.rfd->rfd_a) : "nan") << '\t' << (c.rfd ? format_double(c.rfd->rfd_u) : "nan") << '\t'
        << (c.ok() ? "ok" : "failed") << '\t' << (result.best == i ? "*" : "") << '\t' << one_line(c.error) << '\n';
  }
}

void write_grid_report(const GridResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw EnvironmentError("cannot write " + path.string());
  write_grid_report(result, out);
}

std::vector<AblationRow> ablation_over_generated(const AblationSetup& setup, const std::vector<std::size_t>& counts,
                                                 ChatClient& client, const TrainConfig& config,
                                                 const EncoderFactory& factory, const STSEvalSet& evalset, int top_k) {
  std::vector<AblationRow> rows;
  for (std::size_t n : counts) {
    AblationRow row;
    row.n_generated = n;
    try {
      SimulationResult sim =
          simulate_patterns(setup.corpus, setup.source, n, setup.domain, client, setup.generation, setup.concurrency);
      row.n_flagged = sim.flagged.size();
      auto encoder = factory();
      TrainResult r = train(config, sim.dataset, *encoder, evalset);
      row.score = top_k_average(r.trajectory, top_k);
      row.rfd = rfd(r.trajectory);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_ablation_report(const std::vector<AblationRow>& rows, std::ostream& out) {
  out << "n_generated\tn_flagged\ttop5_spearman\trfd_a\trfd_u\tstatus\terror\n";
  for (const auto& r : rows) {
    out << r.n_generated << '\t' << r.n_flagged << '\t' << (r.score ? format_double(*r.score) : "nan") << '\t'
        << (r.rfd ? format_double(r.rfd->rfd_a) : "nan") << '\t' << (r.rfd ? format_double(r.rfd->rfd_u) : "nan") << '\t'
        << (r.score ? "ok" : "failed") << '\t' << one_line(r.error) << '\n';
  }
}

}  // namespace csekit
