#include "csekit/lexicon.hpp"

#include <algorithm>
#include <array>

namespace csekit {

namespace {

constexpr std::array<std::string_view, 30> kFunctionWords = {
    "the", "a", "an", "of", "in", "on", "at", "to", "for", "with", "and", "or", "is", "are", "was",
    "were", "by", "from", "that", "this", "it", "as", "be", "has", "have", "had", "its", "their",
    "his", "her",
};

constexpr std::array<std::string_view, 267> kContentLexicon = {
    "river", "mountain", "forest", "village", "city", "market", "harbor", "bridge", "tower",
    "garden", "castle", "island", "desert", "valley", "ocean", "lake", "meadow", "canyon",
    "station", "library", "museum", "school", "hospital", "factory", "kitchen", "office", "theater",
    "stadium", "airport", "temple", "doctor", "teacher", "farmer", "soldier", "artist", "writer",
    "pilot", "sailor", "baker", "driver", "singer", "dancer", "lawyer", "nurse", "student",
    "captain", "engineer", "merchant", "hunter", "painter", "dog", "cat", "horse", "bird", "fish",
    "wolf", "eagle", "tiger", "rabbit", "snake", "whale", "bear", "lion", "deer", "goat", "sheep",
    "fox", "owl", "apple", "bread", "cheese", "coffee", "tea", "soup", "rice", "wine", "honey",
    "sugar", "salt", "pepper", "butter", "cake", "orange", "lemon", "car", "train", "ship", "truck",
    "bicycle", "plane", "boat", "wagon", "rocket", "engine", "book", "letter", "map", "clock",
    "lamp", "mirror", "window", "door", "table", "chair", "bottle", "basket", "hammer", "rope",
    "knife", "coin", "key", "storm", "rain", "snow", "wind", "thunder", "fire", "smoke", "cloud",
    "sunrise", "sunset", "shadow", "light", "music", "song", "dance", "game", "government",
    "company", "army", "council", "committee", "court", "police", "crowd", "family", "team", "club",
    "union", "runs", "walks", "jumps", "swims", "flies", "climbs", "builds", "paints", "writes",
    "reads", "sings", "cooks", "drives", "sails", "carries", "opens", "closes", "breaks", "fixes",
    "finds", "loses", "sells", "buys", "watches", "hears", "sees", "throws", "catches", "pulls",
    "pushes", "grows", "cuts", "cleans", "plays", "wins", "fights", "visits", "leaves", "enters",
    "crosses", "follows", "chases", "feeds", "holds", "red", "blue", "green", "yellow", "black",
    "white", "golden", "silver", "ancient", "modern", "quiet", "loud", "bright", "dark", "heavy",
    "small", "large", "tall", "short", "old", "young", "rich", "poor", "happy", "angry", "tired",
    "brave", "calm", "wild", "gentle", "strange", "famous", "hidden", "broken", "empty", "crowded",
    "distant", "frozen", "sunny", "rainy", "narrow", "wide", "deep", "shallow", "morning",
    "evening", "winter", "summer", "spring", "autumn", "night", "weekend", "holiday", "festival",
    "election", "contract", "budget", "profit", "price", "report", "meeting", "decision",
    "agreement", "attack", "victory", "defeat", "journey", "rapidly", "slowly", "quietly", "loudly",
    "carefully", "suddenly", "often", "rarely", "north", "south", "east", "west", "central",
    "northern", "southern", "eastern", "western",
};

}  // namespace

std::span<const std::string_view> function_words() { return kFunctionWords; }

bool is_function_word(std::string_view lowercase_token) {
  return std::find(kFunctionWords.begin(), kFunctionWords.end(), lowercase_token) != kFunctionWords.end();
}

std::span<const std::string_view> content_lexicon() { return kContentLexicon; }

}  // namespace csekit
