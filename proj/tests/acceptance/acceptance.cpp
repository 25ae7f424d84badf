// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: csekit_acceptance <path-to-csekit-cli> <source-dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "csekit/dataset_io.hpp"
#include "csekit/lexical_metrics.hpp"
#include "csekit/losses.hpp"
#include "csekit/pattern_sim.hpp"
#include "csekit/repr_metrics.hpp"
#include "csekit/stats.hpp"
#include "csekit/train_eval.hpp"
#include "csekit/util.hpp"
#include "desk.hpp"
#include "oracles.hpp"

using namespace csekit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. analytic gradients vs central differences, h = 1e-5, 50 batches
Outcome gradients() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  const InfoNCEConfig nce{0.05};
  const HTConfig ht{5e-3, 1e-2, 1.0};
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto b = oracle::random_batch(rng, ht.m1, ht.m2);
    auto g1 = BatchGradient::zeros_like(b), g2 = g1, g3 = g1;
    info_nce_with_grad(b, nce, &g1);
    hierarchical_triplet_with_grad(b, ht, &g2);
    combined_loss_with_grad(b, nce, ht, &g3);
    worst = std::max(worst, oracle::max_fd_relative_error(b, g1, [&](const ContrastiveBatch& x) {
                       return info_nce_with_grad(x, nce, nullptr);
                     }));
    worst = std::max(worst, oracle::max_fd_relative_error(b, g2, [&](const ContrastiveBatch& x) {
                       return hierarchical_triplet_with_grad(x, ht, nullptr).value;
                     }));
    worst = std::max(worst, oracle::max_fd_relative_error(b, g3, [&](const ContrastiveBatch& x) {
                       return combined_loss_with_grad(x, nce, ht, nullptr).total;
                     }));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 30.0, "max relative error " + fmt("%.3g", worst) + ", " + fmt("%.2f", secs) + " s"};
}

// 2. closed-form loss values
Outcome closed_forms() {
  auto row = [](std::initializer_list<double> v) {
    Eigen::MatrixXd m(1, static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (double x : v) m(0, k++) = x;
    return m;
  };
  const double r = std::sqrt(0.5);
  ContrastiveBatch sym;
  sym.anchors = row({1, 0});
  sym.positives = row({r, r});
  sym.hard_negatives = row({r, -r});
  const double ln2 = info_nce(sym, {1.0});

  ContrastiveBatch orth;
  orth.anchors = row({1, 0});
  orth.positives = row({1, 0});
  orth.hard_negatives = row({0, 1});
  const double v = info_nce(orth, {1.0});

  const HTConfig ht{5e-3, 1e-2, 1.0};
  ContrastiveBatch eq;
  eq.anchors = row({1, 0});
  eq.positives = eq.intermediates.emplace(row({0, 1}));
  eq.hard_negatives = row({0, 1});
  eq.has_ht_supervision = {true};
  const double equal = hierarchical_triplet(eq, ht).value;

  auto at = [&](double c) { return row({c, std::sqrt(1 - c * c)}); };
  ContrastiveBatch idle;
  idle.anchors = row({1, 0});
  idle.positives = at(0.9);
  idle.intermediates = at(0.8);
  idle.hard_negatives = at(0.1);
  idle.has_ht_supervision = {true};
  const double inactive = hierarchical_triplet(idle, ht).value;

  const bool ok = std::abs(ln2 - std::log(2.0)) <= 1e-9 && std::abs(v - 0.313262) <= 1e-6 &&
                  equal == (ht.m1 + ht.m2) / 2 && inactive == 0.0;
  return {ok, "ln2 case " + fmt("%.12f", ln2) + ", orthogonal case " + fmt("%.9f", v) + ", equal-sims HT " +
                  fmt("%.6g", equal) + ", inactive HT " + fmt("%g", inactive)};
}

// 3. uniformity/alignment oracles and rotation invariance
Outcome metric_oracles() {
  std::mt19937_64 rng(7);
  auto embeddings = [&](int n, int d) {
    const auto m = oracle::random_unit_rows(rng, n, d);
    std::vector<Embedding> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)].values = m.row(i).transpose();
    return out;
  };
  bool exact = true;
  for (int n = 2; n <= 200; n += (n < 20 ? 1 : 30)) {
    const auto e = embeddings(n, 8);
    exact &= uniformity(e, {}) == oracle::brute_uniformity(e, 2.0);
  }
  {
    const auto e = embeddings(200, 8);
    exact &= uniformity(e, {}) == oracle::brute_uniformity(e, 2.0);
  }

  auto axis = [](int k, double s) {
    Embedding e{Eigen::VectorXd::Zero(2)};
    e.values[k] = s;
    return e;
  };
  const double three = uniformity(std::vector<Embedding>{axis(0, 1), axis(1, 1), axis(0, -1)}, {});
  using Pairs = std::vector<std::pair<Embedding, Embedding>>;
  const bool align_ok = alignment(Pairs{{axis(0, 1), axis(0, 1)}}, {}) == 0.0 &&
                        alignment(Pairs{{axis(0, 1), axis(1, 1)}}, {}) == 2.0 &&
                        alignment(Pairs{{axis(0, 1), axis(0, -1)}}, {}) == 4.0;

  double rot_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto e = embeddings(40, 6);
    const Eigen::MatrixXd q = oracle::random_rotation(rng, 6);
    std::vector<Embedding> re;
    Pairs pairs, rpairs;
    for (std::size_t i = 0; i < e.size(); ++i) re.push_back(Embedding{q * e[i].values});
    for (std::size_t i = 0; i + 1 < e.size(); i += 2) {
      pairs.emplace_back(e[i], e[i + 1]);
      rpairs.emplace_back(re[i], re[i + 1]);
    }
    rot_err = std::max(rot_err, std::abs(uniformity(e, {}) - uniformity(re, {})));
    rot_err = std::max(rot_err, std::abs(alignment(pairs, {}) - alignment(rpairs, {})));
  }
  const bool ok = exact && std::abs(three + 4.39634) <= 1e-4 && align_ok && rot_err <= 1e-6;
  return {ok, std::string("brute-force uniformity ") + (exact ? "exact" : "MISMATCH") + ", 3-point " + fmt("%.6f", three) +
                  ", alignment cases " + (align_ok ? "exact" : "WRONG") + ", rotation drift " + fmt("%.2g", rot_err)};
}

// 4. MER vs exhaustive edit-script search, all pairs up to length 6
Outcome mer_oracle() {
  const auto t0 = Clock::now();
  const int max_len = 6;
  oracle::ExhaustiveMer ex(max_len);
  std::vector<std::vector<int>> seqs = {{}};
  for (std::size_t start = 0; start < seqs.size(); ++start) {
    if (static_cast<int>(seqs[start].size()) == max_len) continue;
    for (int t = 0; t < 3; ++t) {
      auto s = seqs[start];
      s.push_back(t);
      seqs.push_back(std::move(s));
    }
  }
  static const std::string kTok[] = {"x", "y", "z"};
  std::vector<std::vector<std::string>> words;
  for (const auto& s : seqs) {
    std::vector<std::string> w;
    for (int t : s) w.push_back(kTok[t]);
    words.push_back(std::move(w));
  }
  std::size_t checked = 0, mismatches = 0;
  for (std::size_t i = 0; i < seqs.size(); ++i)
    for (std::size_t j = 0; j < seqs.size(); ++j) {
      const auto got = mer_tokens(words[i], words[j]);
      ++checked;
      if (seqs[i].empty() && seqs[j].empty()) {
        mismatches += !got.empty;
        continue;
      }
      const auto want = ex.solve(seqs[i], seqs[j]);
      const int errors = want.insertions + want.deletions + want.substitutions;
      const double value = static_cast<double>(errors) / (errors + want.retains);
      const bool same = got.counts == EditCounts{want.insertions, want.deletions, want.substitutions, want.retains} &&
                        got.value == value;
      mismatches += !same;
    }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 120.0, std::to_string(checked) + " pairs, " + std::to_string(mismatches) +
                                               " mismatches, " + fmt("%.1f", secs) + " s"};
}

// 5. Spearman vs naive rank-then-Pearson
Outcome spearman_oracle() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> len(2, 50), small(0, 6);
  std::normal_distribution<double> g;
  double worst = 0.0;
  int done = 0, with_ties = 0;
  while (done < 1000) {
    const int n = len(rng);
    std::vector<double> x(static_cast<std::size_t>(n)), y(x.size());
    const bool tied = done % 2 == 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = tied ? small(rng) : g(rng);
      y[i] = tied ? small(rng) : std::round(g(rng) * 4) / 4;
    }
    auto constant = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [&](double e) { return e == v[0]; });
    };
    if (constant(x) || constant(y)) continue;
    with_ties += tied;
    worst = std::max(worst, std::abs(spearman(x, y) - oracle::naive_spearman(x, y)));
    ++done;
  }
  const double case08 = spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4});
  return {worst <= 1e-12 && case08 == 0.8, "1000 vectors (" + std::to_string(with_ties) + " integer-valued), max diff " +
                                               fmt("%.2g", worst) + ", [1,3,2,4] case " + fmt("%.17g", case08)};
}

// 6. RFD arithmetic
Outcome rfd_arithmetic() {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-4, 4);
  bool exact = true;
  for (int trial = 0; trial < 200; ++trial) {
    Trajectory t;
    for (int s = 0; s < 1 + trial % 9; ++s) t.append({s, u(rng), u(rng), u(rng), u(rng), u(rng)});
    const auto got = rfd(t);
    const auto want = oracle::resum_rfd(t);
    exact &= got.rfd_a == want.rfd_a && got.rfd_u == want.rfd_u;
  }
  Trajectory same;
  for (int s = 0; s < 5; ++s) {
    const double a = u(rng), b = u(rng);
    same.append({s, a, b, a, b, 0.0});
  }
  const auto z = rfd(same);
  const bool ok = exact && z.rfd_a == 0.0 && z.rfd_u == 0.0;
  return {ok, std::string("re-summation ") + (exact ? "exact" : "MISMATCH") + ", identical columns give (" +
                  fmt("%g", z.rfd_a) + ", " + fmt("%g", z.rfd_u) + ")"};
}

// 7. simple (corpus-only) vs complex (hierarchical quadruples) pattern
Outcome trend() {
  const auto t0 = Clock::now();
  int wins = 0;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto s = desk::make(seed);
    const auto simple = desk::run(s, 0);
    const auto complex = desk::run(s, s.world.corpus.size());
    const double rs = simple.rfd.rfd_a + simple.rfd.rfd_u;
    const double rc = complex.rfd.rfd_a + complex.rfd.rfd_u;
    const bool win = rc > rs && complex.score > simple.score;
    wins += win;
    detail += " seed " + std::to_string(seed) + ": rfd " + fmt("%+.3f", rs) + " -> " + fmt("%+.3f", rc) + ", top5 " +
              fmt("%.4f", simple.score) + " -> " + fmt("%.4f", complex.score) + (win ? " ok;" : " no;");
  }
  const double secs = seconds_since(t0);
  return {wins >= 2 && secs < 300.0, std::to_string(wins) + "/3 seeds," + detail + " " + fmt("%.1f", secs) + " s"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

// 8. CLI generate -> train -> rfd determinism
Outcome pipeline(const std::string& cli, const fs::path& source_dir) {
  const fs::path work = fs::temp_directory_path() / "csekit_acceptance_pipeline";
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string conf = (source_dir / "configs" / "desk_wiki_sts.conf").string();
  auto run = [&](const std::string& args, const std::string& stdout_file = "/dev/null") {
    const std::string cmd = "cd '" + work.string() + "' && '" + cli + "' " + args + " > " + stdout_file + " 2>> log.txt";
    return std::system(cmd.c_str()) == 0;
  };
  bool ok = run("synth --seed 1 --out data");
  for (int r : {1, 2}) {
    const std::string n = std::to_string(r);
    ok = ok && run("generate --config '" + conf + "' --mock-llm --seed 1 --out gen" + n);
    ok = ok && run("train --config '" + conf + "' --seed 1 --set dataset=gen" + n + "/dataset.jsonl --out run" + n);
    ok = ok && run("rfd run" + n + "/trajectory.csv", "rfd" + n + ".tsv");
  }
  if (!ok) return {false, "a CLI step failed; see " + (work / "log.txt").string()};

  const bool dataset_same = slurp(work / "gen1/dataset.jsonl") == slurp(work / "gen2/dataset.jsonl");
  const bool traj_same = slurp(work / "run1/trajectory.csv") == slurp(work / "run2/trajectory.csv");
  const bool rfd_same = slurp(work / "run1/rfd.txt") == slurp(work / "run2/rfd.txt");

  const std::size_t n_records = count_lines(work / "gen1/dataset.jsonl");
  const std::size_t n_train = n_records - heldout_count(n_records, 0.1);
  const auto steps = planned_steps(n_train, 32, 8);
  const auto traj = read_trajectory_csv(work / "run1/trajectory.csv");
  const std::size_t want_rows = oracle::expected_rows(steps, 5);

  // rfd.txt written by train agrees with the rfd verb's recomputation
  std::ifstream rt(work / "run1/rfd.txt");
  std::string la, lu;
  double fa = 0, fu = 0;
  rt >> la >> fa >> lu >> fu;
  const auto recomputed = rfd(traj);
  // the rfd verb's row, minus its run label, must be the same for both runs
  auto verb_values = [&](const char* file) {
    std::ifstream in(work / file);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    return row.substr(row.find('\t'));
  };
  const std::string values = verb_values("rfd1.tsv");
  const bool rfd_consistent = la == "rfd_a" && lu == "rfd_u" && fa == recomputed.rfd_a && fu == recomputed.rfd_u &&
                              values == verb_values("rfd2.tsv") &&
                              values.starts_with("\t" + format_double(fu) + "\t" + format_double(fa) + "\t");

  const bool pass = dataset_same && traj_same && rfd_same && traj.size() == want_rows && rfd_consistent && n_records == 200;
  std::string detail = std::string("dataset ") + (dataset_same ? "identical" : "DIFFERS") + ", trajectory.csv " +
                       (traj_same ? "identical" : "DIFFERS") + ", rfd.txt " + (rfd_same ? "identical" : "DIFFERS") + ", rows " +
                       std::to_string(traj.size()) + " (formula " + std::to_string(want_rows) + " for " +
                       std::to_string(steps) + " steps), rfd verb " + (rfd_consistent ? "consistent" : "INCONSISTENT");
  if (pass) fs::remove_all(work);
  return {pass, detail};
}

// 9. ablation over the number of generated quadruples
Outcome ablation() {
  int monotone = 0;
  std::string detail;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto s = desk::make(seed);
    AblationSetup setup;
    setup.corpus = s.world.corpus;
    setup.source = s.source;
    setup.generation = s.generation;
    MockChatClient mock;
    const EncoderFactory factory = [&] { return std::make_unique<ToyEncoder>(s.encoder); };
    const auto rows = ablation_over_generated(setup, {0, 50, 200}, mock, s.train, factory, s.evalset);
    std::stringstream table;
    write_ablation_report(rows, table);
    bool ok = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ok &= rows[i].score.has_value();
      if (ok && i > 0) ok &= *rows[i].score >= *rows[i - 1].score;
    }
    monotone += ok;
    detail += " seed " + std::to_string(seed) + ":";
    for (const auto& r : rows) detail += " " + (r.score ? fmt("%.4f", *r.score) : std::string("failed"));
    detail += ok ? " ok;" : " no;";
  }
  return {monotone >= 2, std::to_string(monotone) + "/3 seeds non-decreasing over n = 0, 50, 200;" + detail};
}

// 10. prompt templates: anchor phrases and example layout
Outcome prompts() {
  const PatternExamples ex = {{{"first input", "first output"}, {"second input", "second output"}, {"third input", "third output"}}};
  struct Case {
    GenerationKind kind;
    PatternKind pattern;
    const char* phrase;
    const char* in_label;
    const char* out_label;
  };
  const Case cases[] = {
      {GenerationKind::kPositive, PatternKind::kNLI, "entailment relationship", "Premise", "Hypothesis"},
      {GenerationKind::kNegative, PatternKind::kNLI, "contradiction to the information", "Premise", "Hypothesis"},
      {GenerationKind::kPositive, PatternKind::kSTS, "semantically similar", "Sentence 1", "Sentence 2"},
      {GenerationKind::kIntermediate, PatternKind::kSTS, "omitting certain details", "Sentence 1", "Sentence 2"},
      {GenerationKind::kNegative, PatternKind::kSTS, "distinct or even contradictory meaning", "Sentence 1", "Sentence 2"},
  };
  int good = 0;
  std::string missing;
  for (const auto& c : cases) {
    const std::string p = build_prompt(c.kind, c.pattern, ex);
    // instruction (with the phrase), then the relation line, then the three
    // examples in order, then the closing instruction
    std::size_t at = p.find(c.phrase);
    bool ok = at != std::string::npos;
    const std::size_t relation = p.find("In the following illustrative examples");
    ok = ok && relation != std::string::npos && at < relation;
    at = relation;
    for (int i = 0; ok && i < 3; ++i) {
      const std::string block = "- Example " + std::to_string(i + 1) + ":\n  - " + c.in_label + ": " + ex[i].input + "\n  - " +
                                c.out_label + ": " + ex[i].output + "\n";
      const std::size_t pos = p.find(block, at);
      ok = pos != std::string::npos;
      at = pos;
    }
    ok = ok && p.find("Generate the", at) != std::string::npos;
    good += ok;
    if (!ok) missing += std::string(" '") + c.phrase + "'";
  }
  return {good == 5, std::to_string(good) + "/5 templates with phrase and example layout" + missing};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: csekit_acceptance <csekit-cli> <source-dir>\n";
    return 2;
  }
  const std::string cli = fs::absolute(argv[1]).string();
  const fs::path source_dir = fs::absolute(argv[2]);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradients},
      {"closed-form loss values", closed_forms},
      {"metric oracles", metric_oracles},
      {"MER exhaustive oracle", mer_oracle},
      {"Spearman oracle", spearman_oracle},
      {"RFD arithmetic", rfd_arithmetic},
      {"desk-scale trend", trend},
      {"pipeline determinism", [&] { return pipeline(cli, source_dir); }},
      {"generated-count ablation", ablation},
      {"prompt fidelity", prompts},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (failures ? "acceptance FAILED (" + std::to_string(failures) + " criteria)" : std::string("acceptance PASSED"))
            << std::endl;
  return failures ? 1 : 0;
}
