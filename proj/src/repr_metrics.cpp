#include "csekit/repr_metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "csekit/error.hpp"
#include "csekit/stats.hpp"

namespace csekit {

namespace {

double squared_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

void require_unit(const Embedding& e, const char* what) {
  if (!e.is_unit()) throw ArgumentError(std::string(what) + ": embeddings must be unit norm");
}

std::vector<Embedding> encode_all(const SentenceEncoder& encoder, const std::vector<std::string>& sentences) {
  return encoder.encode(sentences, true);
}

double pair_alignment(const SentenceEncoder& encoder, const PairDataset& data, const SnapshotOptions& options) {
  std::vector<std::pair<Embedding, Embedding>> pairs;
  pairs.reserve(data.positive_pairs.size() + data.self_positives.size());
  for (const auto& [a, b] : data.positive_pairs) pairs.emplace_back(encoder.encode_one(a, true), encoder.encode_one(b, true));
  for (std::size_t i = 0; i < data.self_positives.size(); ++i) {
    const auto& s = data.self_positives[i];
    Rng rng(derive_seed(options.seed, 0x5e1f, i));
    if (options.augmentation == Augmentation::kDropout) {
      Embedding first = encoder.encode_stochastic(s, rng);
      pairs.emplace_back(std::move(first), encoder.encode_stochastic(s, rng));
    } else {
      pairs.emplace_back(encoder.encode_one(s, true), encoder.encode_one(augment_text(s, options.augmentation, rng), true));
    }
  }
  return alignment(pairs, options.metrics);
}

}  // namespace

void AlignUniformConfig::validate() const {
  if (!(alpha > 0.0) || !(t > 0.0)) throw ConfigError("alignment alpha and uniformity t must be > 0");
}

double alignment(std::span<const std::pair<Embedding, Embedding>> positive_pairs, const AlignUniformConfig& cfg) {
  cfg.validate();
  if (positive_pairs.empty()) throw ArgumentError("alignment: no positive pairs");
  double total = 0.0;
  for (const auto& [a, b] : positive_pairs) {
    require_unit(a, "alignment");
    require_unit(b, "alignment");
    if (a.dim() != b.dim()) throw ArgumentError("alignment: dimension mismatch");
    const double sq = squared_distance(a.values, b.values);
    total += cfg.alpha == 2.0 ? sq : std::pow(std::sqrt(sq), cfg.alpha);
  }
  return total / static_cast<double>(positive_pairs.size());
}

double uniformity(std::span<const Embedding> embeddings, const AlignUniformConfig& cfg) {
  cfg.validate();
  const std::size_t n = embeddings.size();
  if (n < 2) throw ArgumentError("uniformity: need at least two embeddings");
  for (const auto& e : embeddings) {
    require_unit(e, "uniformity");
    if (e.dim() != embeddings.front().dim()) throw ArgumentError("uniformity: dimension mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) total += std::exp(-cfg.t * squared_distance(embeddings[i].values, embeddings[j].values));
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return std::log(total / pairs);
}

void PoolBuilder::add(const std::string& sentence) {
  if (seen_.insert(sentence).second) pool_.push_back(sentence);
}

PairDataset pair_dataset_from_scored(std::span<const ScoredPair> pairs, double positive_threshold) {
  PairDataset out;
  PoolBuilder pool;
  for (const auto& p : pairs) {
    if (p.score > positive_threshold) out.positive_pairs.emplace_back(p.sentence1, p.sentence2);
    pool.add(p.sentence1);
    pool.add(p.sentence2);
    out.scored.push_back(p);
  }
  out.pool = pool.take();
  return out;
}

void Trajectory::append(const TrajectorySnapshot& s) {
  for (double v : {s.align_heldout, s.unif_heldout, s.align_eval, s.unif_eval, s.spearman_eval})
    if (!std::isfinite(v)) throw NumericError("snapshot at step " + std::to_string(s.step) + " has a non-finite field");
  if (s.step < 0) throw ArgumentError("snapshot step must be non-negative");
  if (!snapshots.empty() && s.step <= snapshots.back().step)
    throw ArgumentError("snapshot steps must be strictly increasing (" + std::to_string(s.step) + " after " +
                        std::to_string(snapshots.back().step) + ")");
  snapshots.push_back(s);
}

RFDResult rfd(const Trajectory& trajectory) {
  if (trajectory.empty()) throw ArgumentError("rfd: empty trajectory");
  double sa = 0.0, su = 0.0;
  for (const auto& s : trajectory.snapshots) {
    sa += s.align_heldout - s.align_eval;
    su += s.unif_heldout - s.unif_eval;
  }
  const double m = static_cast<double>(trajectory.size());
  return {sa / m, su / m};
}

TrajectorySnapshot record_snapshot(const SentenceEncoder& encoder, const PairDataset& heldout,
                                   const PairDataset& evaldata, std::int64_t step, const SnapshotOptions& options) {
  if (!heldout.has_positive_pairs()) throw DataError("held-out data has no positive pairs");
  if (!evaldata.has_positive_pairs()) throw DataError("evaluation data has no positive pairs (no pair scored above threshold)");
  if (evaldata.scored.size() < 2) throw DataError("evaluation data needs at least two scored pairs");

  TrajectorySnapshot snap;
  snap.step = step;
  snap.align_heldout = pair_alignment(encoder, heldout, options);
  snap.unif_heldout = uniformity(encode_all(encoder, heldout.pool), options.metrics);
  snap.align_eval = pair_alignment(encoder, evaldata, options);
  snap.unif_eval = uniformity(encode_all(encoder, evaldata.pool), options.metrics);

  std::vector<double> predicted, gold;
  predicted.reserve(evaldata.scored.size());
  gold.reserve(evaldata.scored.size());
  for (const auto& p : evaldata.scored) {
    predicted.push_back(cosine_similarity(encoder.encode_one(p.sentence1, true), encoder.encode_one(p.sentence2, true)));
    gold.push_back(p.score);
  }
  snap.spearman_eval = spearman(predicted, gold);
  return snap;
}

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out) {
  out << kTrajectoryHeader << '\n';
  for (const auto& s : trajectory.snapshots) {
    out << s.step << ',' << format_double(s.align_heldout) << ',' << format_double(s.unif_heldout) << ','
        << format_double(s.align_eval) << ',' << format_double(s.unif_eval) << ',' << format_double(s.spearman_eval) << '\n';
  }
}

void write_trajectory_csv(const Trajectory& trajectory, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw EnvironmentError("cannot write " + path.string());
  write_trajectory_csv(trajectory, out);
}

Trajectory read_trajectory_csv(std::istream& in, const std::string& source_name) {
  Trajectory traj;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw ParseError(source_name + ":" + std::to_string(lineno) + ": " + why);
  };
  if (!std::getline(in, line)) {
    lineno = 1;
    fail("missing header");
  }
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrajectoryHeader) fail("unexpected header '" + line + "'");
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) fail("expected 6 fields, got " + std::to_string(cells.size()));
    TrajectorySnapshot s;
    try {
      std::size_t used = 0;
      s.step = std::stoll(cells[0], &used);
      if (used != cells[0].size()) fail("bad step '" + cells[0] + "'");
      double* fields[] = {&s.align_heldout, &s.unif_heldout, &s.align_eval, &s.unif_eval, &s.spearman_eval};
      for (int k = 0; k < 5; ++k) {
        *fields[k] = std::stod(cells[static_cast<std::size_t>(k + 1)], &used);
        if (used != cells[static_cast<std::size_t>(k + 1)].size()) fail("bad number '" + cells[static_cast<std::size_t>(k + 1)] + "'");
      }
    } catch (const std::logic_error&) {
      fail("unparseable number in '" + line + "'");
    }
    try {
      traj.append(s);
    } catch (const Error& e) {
      fail(e.what());
    }
  }
  return traj;
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open trajectory file " + path.string());
  return read_trajectory_csv(in, path.string());
}

}  // namespace csekit
