#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "csekit/error.hpp"
#include "csekit/lexical_metrics.hpp"
#include "csekit/toy_encoder.hpp"
#include "oracles.hpp"

using namespace csekit;

namespace {

double integral(const Histogram& h) {
  double s = 0.0;
  for (std::size_t k = 0; k < h.bins(); ++k) s += h.densities[k] * (h.bin_edges[k + 1] - h.bin_edges[k]);
  return s;
}

std::vector<std::string> spell(const std::vector<int>& ids) {
  static const char* kAlphabet[] = {"x", "y", "z"};
  std::vector<std::string> out;
  for (int id : ids) out.emplace_back(kAlphabet[id]);
  return out;
}

}  // namespace

TEST(Mer, WorkedExamples) {
  auto same = mer("a b c", "a b c");
  EXPECT_EQ(same.value, 0.0);
  EXPECT_EQ(same.counts.retains, 3);

  auto one = mer("a b c", "a b d");
  EXPECT_DOUBLE_EQ(one.value, 1.0 / 3.0);
  EXPECT_EQ(one.counts, (EditCounts{0, 0, 1, 2}));

  auto disjoint = mer("x y", "p q r");
  EXPECT_EQ(disjoint.value, 1.0);
  EXPECT_EQ(disjoint.counts, (EditCounts{1, 0, 2, 0}));
}

TEST(Mer, LowercasesAndKeepsPunctuation) {
  EXPECT_EQ(mer("The Cat", "the cat").value, 0.0);
  EXPECT_EQ(mer("cat.", "cat").value, 1.0);
}

TEST(Mer, EmptyInputs) {
  EXPECT_TRUE(mer("", "  ").empty);
  auto half = mer("", "a b");
  EXPECT_FALSE(half.empty);
  EXPECT_EQ(half.value, 1.0);
  EXPECT_EQ(half.counts.insertions, 2);
}

TEST(Mer, PropertiesOnRandomSentences) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> len(1, 9), tok(0, 4);
  const char* words[] = {"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 500; ++trial) {
    std::string s1, s2;
    for (int i = len(rng); i > 0; --i) s1 += std::string(words[tok(rng)]) + " ";
    for (int i = len(rng); i > 0; --i) s2 += std::string(words[tok(rng)]) + " ";
    const auto ab = mer(s1, s2);
    const auto ba = mer(s2, s1);
    EXPECT_EQ(ab.value, ba.value);
    EXPECT_EQ(ab.counts.insertions, ba.counts.deletions);
    EXPECT_EQ(ab.counts.deletions, ba.counts.insertions);
    EXPECT_GE(ab.value, 0.0);
    EXPECT_LE(ab.value, 1.0);
    EXPECT_EQ(ab.value == 1.0, ab.counts.retains == 0);
    EXPECT_EQ(mer(s1, s1).value, 0.0);
  }
}

TEST(Mer, AgreesWithExhaustiveSearchUpToLength4) {
  // The full length-6 sweep runs in the acceptance binary.
  const int max_len = 4;
  oracle::ExhaustiveMer ex(max_len);
  EXPECT_EQ(ex.path_count(2, 2), 13u);  // central Delannoy number D(2,2)
  std::vector<std::vector<int>> seqs = {{}};
  for (std::size_t start = 0; start < seqs.size(); ++start) {
    if (static_cast<int>(seqs[start].size()) == max_len) continue;
    for (int t = 0; t < 3; ++t) {
      auto s = seqs[start];
      s.push_back(t);
      seqs.push_back(s);
    }
  }
  for (const auto& a : seqs)
    for (const auto& b : seqs) {
      const auto got = mer_tokens(spell(a), spell(b));
      if (a.empty() && b.empty()) {
        EXPECT_TRUE(got.empty);
        continue;
      }
      const auto want = ex.solve(a, b);
      ASSERT_EQ(got.counts, (EditCounts{want.insertions, want.deletions, want.substitutions, want.retains}));
    }
}

TEST(Histogram, NormalizationAndPointMass) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> values(100);
  for (auto& v : values) v = u(rng);
  const auto h = density_histogram(values, 0.0, 1.0, 50);
  EXPECT_EQ(h.bin_edges.size(), 51u);
  EXPECT_NEAR(integral(h), 1.0, 1e-9);
  EXPECT_EQ(h.bin_edges[30], 0.6);
  EXPECT_GT(density_histogram(std::vector<double>{0.6}, 0.0, 1.0, 50).densities[30], 0.0);

  const auto point = density_histogram(std::vector<double>(7, 0.0), 0.0, 1.0, 10);
  EXPECT_GT(point.densities[0], 0.0);
  for (std::size_t k = 1; k < 10; ++k) EXPECT_EQ(point.densities[k], 0.0);
  const auto top = density_histogram(std::vector<double>{1.0}, 0.0, 1.0, 4);
  EXPECT_GT(top.densities[3], 0.0);
}

TEST(PairwiseHistogram, MerAndCosine) {
  std::vector<std::pair<std::string, std::string>> same = {{"a b", "a b"}, {"c d e", "c d e"}};
  const auto mh = pairwise_histogram(same, PairMetric::kMER, nullptr, 10);
  EXPECT_GT(mh.densities[0], 0.0);
  EXPECT_EQ(std::count_if(mh.densities.begin(), mh.densities.end(), [](double d) { return d > 0; }), 1);

  EXPECT_THROW(pairwise_histogram(same, PairMetric::kCS, nullptr, 10), ArgumentError);
  ToyEncoderConfig c;
  c.hash_buckets = 256;
  c.hidden = 8;
  c.dim = 8;
  ToyEncoder enc(c);
  const auto ch = pairwise_histogram(same, PairMetric::kCS, &enc, 20);
  EXPECT_GT(ch.densities.back(), 0.0);
  EXPECT_NEAR(integral(ch), 1.0, 1e-9);

  std::mt19937_64 rng(33);
  std::uniform_int_distribution<int> tok(0, 6);
  std::vector<std::pair<std::string, std::string>> random_pairs;
  for (int i = 0; i < 100; ++i) {
    std::string a, b;
    for (int k = 0; k < 5; ++k) {
      a += "w" + std::to_string(tok(rng)) + " ";
      b += "w" + std::to_string(tok(rng)) + " ";
    }
    random_pairs.emplace_back(a, b);
  }
  EXPECT_NEAR(integral(pairwise_histogram(random_pairs, PairMetric::kMER, nullptr, 50)), 1.0, 1e-9);
  EXPECT_NEAR(integral(pairwise_histogram(random_pairs, PairMetric::kCS, &enc, 50)), 1.0, 1e-9);
  EXPECT_THROW(pairwise_histogram(std::vector<std::pair<std::string, std::string>>{}, PairMetric::kMER, nullptr, 5),
               ArgumentError);
}

TEST(PairwiseHistogram, TsvRows) {
  const auto h = density_histogram(std::vector<double>{0.1, 0.9}, 0.0, 1.0, 2);
  std::stringstream ss;
  write_histogram_tsv(h, ss);
  EXPECT_EQ(ss.str(), "bin_left\tbin_right\tdensity\n0\t0.5\t1\n0.5\t1\t1\n");
}
