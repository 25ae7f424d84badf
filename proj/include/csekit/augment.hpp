#pragma once

#include <string>
#include <string_view>

#include "csekit/util.hpp"

namespace csekit {

/// How a corpus-only sentence gets its positive view.
enum class Augmentation { kDropout, kTokenShuffle, kTokenCutoff };

std::string_view to_string(Augmentation aug);
Augmentation parse_augmentation(std::string_view name);

inline constexpr double kTokenCutoffRate = 0.15;

/// Text-level view for token_shuffle / token_cutoff; identity for dropout,
/// whose noise lives inside the encoder.
std::string augment_text(std::string_view sentence, Augmentation aug, Rng& rng);

}  // namespace csekit
