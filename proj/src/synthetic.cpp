#include "csekit/synthetic.hpp"

#include <algorithm>
#include <set>

#include "csekit/error.hpp"
#include "csekit/lexicon.hpp"

namespace csekit {

namespace {

class WorldBuilder {
 public:
  explicit WorldBuilder(const SyntheticWorldConfig& cfg) : cfg_(cfg), rng_(derive_seed(cfg.seed, 0x5717)) {}

  std::vector<std::string> draw_content(std::size_t k, const std::vector<std::string>& exclude = {}) {
    const auto lex = content_lexicon();
    std::vector<std::string> out;
    while (out.size() < k) {
      std::string w(lex[uniform_index(rng_, lex.size())]);
      if (std::find(out.begin(), out.end(), w) != out.end()) continue;
      if (std::find(exclude.begin(), exclude.end(), w) != exclude.end()) continue;
      out.push_back(std::move(w));
    }
    return out;
  }

  std::size_t draw_size() {
    const auto span = static_cast<std::size_t>(cfg_.max_content - cfg_.min_content + 1);
    return static_cast<std::size_t>(cfg_.min_content) + uniform_index(rng_, span);
  }

  std::string render(std::vector<std::string> content) {
    shuffle_in_place(content, rng_);
    const auto fw = function_words();
    std::vector<std::string> tokens;
    for (auto& w : content) {
      if (uniform01(rng_) < cfg_.function_rate) tokens.emplace_back(fw[uniform_index(rng_, fw.size())]);
      tokens.push_back(std::move(w));
    }
    return join(tokens);
  }

  /// A pair sharing `shared` of the first sentence's k content words.
  ScoredPair pair_with_overlap(std::size_t k, std::size_t shared) {
    auto a = draw_content(k);
    std::vector<std::string> b(a.begin(), a.end());
    shuffle_in_place(b, rng_);
    b.resize(shared);
    auto fresh = draw_content(k - shared, a);
    b.insert(b.end(), fresh.begin(), fresh.end());
    ScoredPair p{render(a), render(b), 0.0};
    p.score = content_similarity_score(p.sentence1, p.sentence2);
    return p;
  }

  Rng& rng() { return rng_; }

 private:
  const SyntheticWorldConfig& cfg_;
  Rng rng_;
};

}  // namespace

void SyntheticWorldConfig::validate() const {
  if (corpus_size < 2) throw ConfigError("synthetic corpus needs at least 2 sentences");
  if (sts_source_pairs < 9) throw ConfigError("synthetic STS source needs at least 9 pairs (3 per band)");
  if (nli_source_records < 3) throw ConfigError("synthetic NLI source needs at least 3 records");
  if (eval_pairs < 4) throw ConfigError("synthetic eval set needs at least 4 pairs");
  if (min_content < 2 || max_content < min_content || max_content > 20)
    throw ConfigError("synthetic content length must satisfy 2 <= min <= max <= 20");
  if (!(function_rate >= 0.0 && function_rate <= 1.0)) throw ConfigError("function_rate must lie in [0, 1]");
}

std::vector<std::string> content_tokens(std::string_view sentence) {
  std::vector<std::string> out;
  for (auto& t : tokenize(sentence))
    if (!is_function_word(t) && std::find(out.begin(), out.end(), t) == out.end()) out.push_back(std::move(t));
  return out;
}

double content_similarity_score(std::string_view a, std::string_view b) {
  const auto ca = content_tokens(a);
  const auto cb = content_tokens(b);
  const std::set<std::string> sa(ca.begin(), ca.end()), sb(cb.begin(), cb.end());
  std::size_t inter = 0;
  for (const auto& w : sa) inter += sb.count(w);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return uni == 0 ? 0.0 : 5.0 * static_cast<double>(inter) / static_cast<double>(uni);
}

SyntheticWorld make_synthetic_world(const SyntheticWorldConfig& cfg) {
  cfg.validate();
  WorldBuilder b(cfg);
  SyntheticWorld w;

  for (std::size_t i = 0; i < cfg.corpus_size; ++i) w.corpus.push_back(b.render(b.draw_content(b.draw_size())));

  // Pattern source: equal thirds of high (> 4), low (< 1) and middle bands.
  for (std::size_t i = 0; i < cfg.sts_source_pairs; ++i) {
    const std::size_t k = b.draw_size();
    switch (i % 3) {
      case 0: w.sts_source.push_back(b.pair_with_overlap(k, k)); break;
      case 1: w.sts_source.push_back(b.pair_with_overlap(k, 0)); break;
      default: w.sts_source.push_back(b.pair_with_overlap(k, std::max<std::size_t>(1, k / 2))); break;
    }
  }

  for (std::size_t i = 0; i < cfg.nli_source_records; ++i) {
    const auto content = b.draw_content(b.draw_size());
    std::vector<std::string> kept(content.begin(), content.begin() + static_cast<std::ptrdiff_t>(content.size() / 2 + 1));
    w.nli_source.push_back({b.render(content), b.render(kept), b.render(b.draw_content(content.size(), content))});
  }

  // Evaluation: overlap drawn uniformly from 0..k; full overlap guarantees
  // pairs above the positive threshold.
  for (std::size_t i = 0; i < cfg.eval_pairs; ++i) {
    const std::size_t k = b.draw_size();
    const std::size_t shared = i % 4 == 0 ? k : uniform_index(b.rng(), k + 1);
    w.eval.push_back(b.pair_with_overlap(k, shared));
  }
  return w;
}

}  // namespace csekit
