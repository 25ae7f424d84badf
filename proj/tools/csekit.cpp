// csekit: batch verbs over the sentence-embedding pipeline.
//
//   csekit synth    --out DIR                      synthetic desk-scale inputs
//   csekit generate --config C [--mock-llm]        hybrid dataset + report
//   csekit train    --config C                     run directory
//   csekit rfd      TRAJ.csv...                    RFD scatter TSV
//   csekit hist     [DATASET] --metric MER|CS      density histogram TSV
//   csekit grid     --config C                     grid_report.tsv
//   csekit ablate   --config C                     ablation_report.tsv
//
// Failures print one line `error<TAB>kind<TAB>message` on stderr and exit
// nonzero (2 for usage/config problems, 1 otherwise).

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "csekit/config.hpp"
#include "csekit/dataset_io.hpp"
#include "csekit/error.hpp"
#include "csekit/synthetic.hpp"

namespace fs = std::filesystem;
using namespace csekit;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool mock_llm = false;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "key = value config file");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seed", o.seed, "run seed");
  cmd->add_flag("--mock-llm", o.mock_llm, "use the offline mock generator instead of the LLM endpoint");
  cmd->add_option("--set", o.overrides, "override one config key (key=value); repeatable");
}

/// File first, then --set, then the dedicated flags: flags win.
RunConfig resolve(const CommonOptions& o) {
  RunConfig cfg = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    cfg.set(trim(std::string_view(kv).substr(0, eq)), trim(std::string_view(kv).substr(eq + 1)));
  }
  if (!o.out.empty()) cfg.out = o.out;
  if (o.seed) cfg.seed = *o.seed;
  if (o.mock_llm) cfg.llm.mock = true;
  cfg.finalize();
  return cfg;
}

fs::path require_input(const std::string& path, const char* key) {
  if (path.empty()) throw UsageError(std::string("missing input: config key '") + key + "' is not set");
  if (!fs::exists(path)) throw UsageError(std::string("missing input for '") + key + "': " + path + " does not exist");
  return path;
}

fs::path prepare_out(const RunConfig& cfg) {
  fs::path out(cfg.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw EnvironmentError("cannot create output directory " + out.string() + ": " + ec.message());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  f.close();
  if (!f) throw EnvironmentError("failed writing " + path.string());
}

std::unique_ptr<ChatClient> make_client(const RunConfig& cfg) {
  if (cfg.llm.mock) return std::make_unique<MockChatClient>();
  return std::make_unique<HttpChatClient>(to_http_config(cfg.llm));
}

STSEvalSet load_eval(const RunConfig& cfg) { return STSEvalSet{read_sts_jsonl(require_input(cfg.eval, "eval"))}; }

EncoderFactory encoder_factory(const RunConfig& cfg) {
  return [cfg] { return load_encoder(cfg.encoder, cfg.toy); };
}

std::string labeled(const std::string& label, double value) { return label + "\t" + format_double(value) + "\n"; }

std::string top_label(int k) { return "top" + std::to_string(k) + "_spearman"; }

// ---------------------------------------------------------------------------

void run_synth(const RunConfig& cfg) {
  const fs::path out = prepare_out(cfg);
  const SyntheticWorld w = make_synthetic_world(cfg.synth);
  write_corpus_jsonl(w.corpus, out / "corpus.jsonl");
  write_sts_jsonl(w.sts_source, out / "sts_source.jsonl");
  write_nli_jsonl(w.nli_source, out / "nli_source.jsonl");
  write_sts_jsonl(w.eval, out / "eval.jsonl");
  write_config_snapshot(cfg, out / "config.snapshot");
}

void run_generate(const RunConfig& cfg) {
  if (cfg.hierarchical && cfg.pattern == PatternKind::kNLI)
    throw UsageError("hierarchical generation is only defined for the STS pattern (no NLI intermediate prompt)");
  const auto corpus = read_corpus_jsonl(require_input(cfg.corpus, "corpus"));
  const PatternSource src = read_pattern_source(require_input(cfg.pattern_source, "pattern_source"), cfg.pattern);
  auto client = make_client(cfg);

  GenerationOptions opts;
  opts.pattern = cfg.pattern;
  opts.hierarchical = cfg.hierarchical;
  opts.seed = cfg.seed;
  opts.model_id = client->model_id();
  // The mock path stays single-threaded so its output is trivially ordered.
  const int concurrency = cfg.llm.mock ? 1 : cfg.llm.concurrency;
  SimulationResult sim = simulate_patterns(corpus, src, cfg.n_generated, cfg.domain, *client, opts, concurrency);

  const fs::path out = prepare_out(cfg);
  write_hybrid_jsonl(sim.dataset, out / "dataset.jsonl");

  nlohmann::ordered_json report;
  report["dataset"] = sim.dataset.name();
  report["model"] = opts.model_id;
  report["seed"] = cfg.seed;
  report["corpus_size"] = corpus.size();
  report["n_requested"] = cfg.n_generated;
  report["n_generated"] = sim.dataset.n_generated;
  report["n_corpus_only"] = sim.dataset.examples.size() - sim.dataset.n_generated;
  report["n_flagged"] = sim.flagged.size();
  auto flagged = nlohmann::ordered_json::array();
  for (const auto& [idx, reason] : sim.flagged) flagged.push_back({{"anchor_index", idx}, {"reason", reason}});
  report["flagged"] = flagged;
  auto hashes = nlohmann::ordered_json::object();
  for (const auto& [kind, bundle] : sim.prompts.bundles) hashes[std::string(to_string(kind))] = bundle.hash;
  report["prompt_hashes"] = hashes;
  write_text(out / "generation_report.json", report.dump(2) + "\n");
  write_config_snapshot(cfg, out / "config.snapshot");
}

void run_train(const RunConfig& cfg) {
  const HybridDataset dataset = read_hybrid_jsonl(require_input(cfg.dataset, "dataset"), cfg.domain, cfg.pattern);
  const STSEvalSet evalset = load_eval(cfg);
  const fs::path out = prepare_out(cfg);
  write_config_snapshot(cfg, out / "config.snapshot");

  TrainedModel model = train(cfg.train, dataset, cfg.encoder, cfg.toy, evalset);
  const Trajectory& traj = model.result.trajectory;
  write_trajectory_csv(traj, out / "trajectory.csv");
  write_losses_csv(model.result.losses, out / "losses.csv");
  const RFDResult r = rfd(traj);
  write_text(out / "rfd.txt", labeled("rfd_a", r.rfd_a) + labeled("rfd_u", r.rfd_u));
  write_text(out / "best.txt", labeled(top_label(cfg.top_k), top_k_average(traj, cfg.top_k)));
  model.encoder->save(out / "encoder.bin");
}

std::string run_label(const fs::path& p) {
  if (p.filename() == "trajectory.csv" && p.has_parent_path()) {
    const auto parent = fs::absolute(p).parent_path().filename().string();
    if (!parent.empty()) return parent;
  }
  return p.stem().string();
}

void run_rfd(const RunConfig& cfg, const std::vector<std::string>& paths, bool write_file) {
  if (paths.empty()) throw UsageError("rfd needs at least one trajectory CSV");
  std::ostringstream tsv;
  tsv << "run_label\trfd_u\trfd_a\t" << top_label(cfg.top_k) << '\n';
  for (const auto& p : paths) {
    const Trajectory traj = read_trajectory_csv(fs::path(p));
    const RFDResult r = rfd(traj);
    tsv << run_label(p) << '\t' << format_double(r.rfd_u) << '\t' << format_double(r.rfd_a) << '\t'
        << format_double(top_k_average(traj, cfg.top_k)) << '\n';
  }
  if (write_file) write_text(prepare_out(cfg) / "rfd_scatter.tsv", tsv.str());
  std::cout << tsv.str();
}

void run_hist(const RunConfig& cfg, const std::string& encoder_path, bool write_file) {
  const HybridDataset ds = read_hybrid_jsonl(require_input(cfg.dataset, "dataset"), cfg.domain, cfg.pattern);
  const bool negative = cfg.hist_polarity == "negative";
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& r : ds.examples) {
    const auto& other = negative ? r.negative : r.positive;
    if (other) pairs.emplace_back(r.anchor, *other);
  }
  if (pairs.empty()) throw DataError("dataset has no " + cfg.hist_polarity + " pairs (anchor-" + cfg.hist_polarity + ")");

  std::unique_ptr<ToyEncoder> encoder;
  if (cfg.hist_metric == PairMetric::kCS) {
    encoder = encoder_path.empty() ? load_encoder(cfg.encoder, cfg.toy)
                                   : std::make_unique<ToyEncoder>(ToyEncoder::load(require_input(encoder_path, "--encoder")));
  }
  const Histogram h = pairwise_histogram(pairs, cfg.hist_metric, encoder.get(), cfg.hist_bins);
  std::ostringstream tsv;
  write_histogram_tsv(h, tsv);
  if (write_file) {
    const std::string name = "hist_" + std::string(to_string(cfg.hist_metric)) + "_" + cfg.hist_polarity + ".tsv";
    write_text(prepare_out(cfg) / name, tsv.str());
  }
  std::cout << tsv.str();
}

void run_grid(RunConfig cfg) {
  const HybridDataset dataset = read_hybrid_jsonl(require_input(cfg.dataset, "dataset"), cfg.domain, cfg.pattern);
  const STSEvalSet evalset = load_eval(cfg);
  GridSpec grid = cfg.grid;
  if (grid.learning_rates.empty()) grid.learning_rates = {cfg.train.learning_rate};
  if (grid.m1s.empty()) grid.m1s = {cfg.train.ht.m1};
  if (grid.m2s.empty()) grid.m2s = {cfg.train.ht.m2};
  if (grid.betas.empty()) grid.betas = {cfg.train.ht.beta};
  cfg.grid = grid;

  const fs::path out = prepare_out(cfg);
  write_config_snapshot(cfg, out / "config.snapshot");
  const GridResult result = grid_search(grid, cfg.train, dataset, encoder_factory(cfg), evalset, cfg.top_k);
  write_grid_report(result, out / "grid_report.tsv");
  if (!result.best) throw DataError("all " + std::to_string(result.cells.size()) + " grid cells failed; see grid_report.tsv");

  RunConfig best = cfg;
  best.train = result.best_config(cfg.train);
  write_config_snapshot(best, out / "best.snapshot");
  write_text(out / "best.txt", labeled(top_label(cfg.top_k), *result.cells[*result.best].score));
}

void run_ablate(const RunConfig& cfg) {
  AblationSetup setup;
  setup.corpus = read_corpus_jsonl(require_input(cfg.corpus, "corpus"));
  setup.source = read_pattern_source(require_input(cfg.pattern_source, "pattern_source"), cfg.pattern);
  setup.domain = cfg.domain;
  setup.generation.pattern = cfg.pattern;
  setup.generation.hierarchical = cfg.hierarchical;
  setup.generation.seed = cfg.seed;
  const STSEvalSet evalset = load_eval(cfg);
  auto client = make_client(cfg);
  setup.generation.model_id = client->model_id();
  setup.concurrency = cfg.llm.mock ? 1 : cfg.llm.concurrency;

  std::vector<std::size_t> counts;
  for (double n : cfg.ablation_counts) counts.push_back(static_cast<std::size_t>(n));
  const fs::path out = prepare_out(cfg);
  write_config_snapshot(cfg, out / "config.snapshot");
  const auto rows = ablation_over_generated(setup, counts, *client, cfg.train, encoder_factory(cfg), evalset, cfg.top_k);
  std::ostringstream tsv;
  write_ablation_report(rows, tsv);
  write_text(out / "ablation_report.tsv", tsv.str());
  std::size_t failed = 0;
  for (const auto& r : rows) failed += !r.score;
  if (failed == rows.size()) throw DataError("every ablation run failed; see ablation_report.tsv");
}

std::string single_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  return s;
}

int fail(std::string_view kind, const std::string& message, int code) {
  std::cerr << "error\t" << kind << '\t' << single_line(message) << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"csekit: contrastive sentence-embedding experiments"};
  app.require_subcommand(1);

  CommonOptions common;
  auto* synth = app.add_subcommand("synth", "write a synthetic corpus, pattern sources and eval set");
  auto* generate = app.add_subcommand("generate", "simulate similarity patterns and assemble a hybrid dataset");
  auto* train_cmd = app.add_subcommand("train", "train the encoder and record the trajectory");
  auto* rfd_cmd = app.add_subcommand("rfd", "RFD scatter rows for trajectory CSVs");
  auto* hist = app.add_subcommand("hist", "MER / cosine density histogram of dataset pairs");
  auto* grid = app.add_subcommand("grid", "grid search over lr, m1, m2, beta");
  auto* ablate = app.add_subcommand("ablate", "vary the number of generated quadruples");
  for (auto* cmd : {synth, generate, train_cmd, rfd_cmd, hist, grid, ablate}) add_common(cmd, common);

  std::vector<std::string> trajectories;
  rfd_cmd->add_option("trajectories", trajectories, "trajectory.csv files")->required();

  std::string hist_dataset, hist_metric, hist_polarity, hist_encoder;
  std::optional<int> hist_bins;
  hist->add_option("dataset", hist_dataset, "hybrid dataset JSONL (defaults to config key 'dataset')");
  hist->add_option("--metric", hist_metric, "MER or CS");
  hist->add_option("--polarity", hist_polarity, "positive or negative");
  hist->add_option("--bins", hist_bins, "number of bins");
  hist->add_option("--encoder", hist_encoder, "trained encoder.bin for CS");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (hist->parsed()) {
      if (!hist_dataset.empty()) common.overrides.push_back("dataset=" + hist_dataset);
      if (!hist_metric.empty()) common.overrides.push_back("hist.metric=" + hist_metric);
      if (!hist_polarity.empty()) common.overrides.push_back("hist.polarity=" + hist_polarity);
      if (hist_bins) common.overrides.push_back("hist.bins=" + std::to_string(*hist_bins));
    }
    const RunConfig cfg = resolve(common);
    if (synth->parsed()) run_synth(cfg);
    if (generate->parsed()) run_generate(cfg);
    if (train_cmd->parsed()) run_train(cfg);
    if (rfd_cmd->parsed()) run_rfd(cfg, trajectories, !common.out.empty());
    if (hist->parsed()) run_hist(cfg, hist_encoder, !common.out.empty());
    if (grid->parsed()) run_grid(cfg);
    if (ablate->parsed()) run_ablate(cfg);
  } catch (const Error& e) {
    const std::string_view kind = e.kind();
    const bool user_side = kind == "usage" || kind == "config" || kind == "argument" || kind == "unsupported_combination";
    return fail(kind, e.what(), user_side ? 2 : 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
