#pragma once

#include <span>
#include <string_view>

namespace csekit {

/// Closed-class English words; everything else counts as a content token.
std::span<const std::string_view> function_words();
bool is_function_word(std::string_view lowercase_token);

/// Fixed content vocabulary shared by the offline mock generator (negative
/// replacements) and the synthetic desk-scale data generator.
std::span<const std::string_view> content_lexicon();

}  // namespace csekit
