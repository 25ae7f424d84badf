#include "csekit/augment.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "csekit/error.hpp"

namespace csekit {

std::string_view to_string(Augmentation aug) {
  switch (aug) {
    case Augmentation::kDropout: return "dropout";
    case Augmentation::kTokenShuffle: return "token_shuffle";
    case Augmentation::kTokenCutoff: return "token_cutoff";
  }
  return "dropout";
}

Augmentation parse_augmentation(std::string_view name) {
  if (name == "dropout") return Augmentation::kDropout;
  if (name == "token_shuffle") return Augmentation::kTokenShuffle;
  if (name == "token_cutoff") return Augmentation::kTokenCutoff;
  throw ConfigError("unknown augmentation '" + std::string(name) + "'");
}

std::string augment_text(std::string_view sentence, Augmentation aug, Rng& rng) {
  if (aug == Augmentation::kDropout) return std::string(sentence);
  auto tokens = tokenize(sentence);
  if (aug == Augmentation::kTokenShuffle) {
    shuffle_in_place(tokens, rng);
    return join(tokens);
  }
  // Cutoff: drop a seeded 15% of positions, at least one when there is more
  // than one token.
  const std::size_t n = tokens.size();
  if (n < 2) return join(tokens);
  std::size_t drop = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(kTokenCutoffRate * static_cast<double>(n))));
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  shuffle_in_place(idx, rng);
  std::vector<bool> dropped(n, false);
  for (std::size_t i = 0; i < drop; ++i) dropped[idx[i]] = true;
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < n; ++i)
    if (!dropped[i]) kept.push_back(tokens[i]);
  return join(kept);
}

}  // namespace csekit
