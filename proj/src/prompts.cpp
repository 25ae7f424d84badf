#include <string>

#include "csekit/error.hpp"
#include "csekit/pattern_sim.hpp"

namespace csekit {

namespace {

struct PromptTemplate {
  std::string_view instruction;
  std::string_view relation;  // "In the following illustrative examples, ..."
  std::string_view input_label;
  std::string_view output_label;
  std::string_view closing;
};

constexpr PromptTemplate kNliPositive{
    "When the user enters a premise text, please generate a hypothesis text that stands in an entailment "
    "relationship to the given premise.",
    "In the following illustrative examples, the Hypothesis is a logical entailment of the Premise:",
    "Premise",
    "Hypothesis",
    "Generate the hypothesis directly without any other interpretation. The generated hypothesis should be a "
    "logical inference from the information available in the premise. In other words, if the premise is true, the "
    "hypothesis must also be true.",
};

constexpr PromptTemplate kNliNegative{
    "When the user enters a premise text, please generate a hypothesis text that presents a contradiction to the "
    "information provided in the given premise.",
    "In the following illustrative examples, The hypothesis logically contradicts the Premise:",
    "Premise",
    "Hypothesis",
    "Generate the hypothesis directly without any other interpretation. The hypothesis should contradict the "
    "information given in the premise. This means the premise and hypothesis cannot both be true at the same time.",
};

constexpr PromptTemplate kStsPositive{
    "Your task is to generate a new sentence that is semantically similar to the user's input sentence.",
    "In the following illustrative examples, Sentence 1 and Sentence 2 are semantically similar:",
    "Sentence 1",
    "Sentence 2",
    "Generate the new sentence directly without any other interpretation, and make sure it maintains the same "
    "information as the original input sentence.",
};

constexpr PromptTemplate kStsIntermediate{
    "Your task is to generate a revised sentence by omitting certain details in the user's input sentence.",
    "In the following illustrative examples, Sentence 2 is created by omitting details from Sentence 1:",
    "Sentence 1",
    "Sentence 2",
    "Generate the revised sentence directly without any other interpretation, and make sure that it contains "
    "significantly fewer details than the original input sentence.",
};

constexpr PromptTemplate kStsNegative{
    "Your task is to generate a new sentence that conveys a distinct or even contradictory meaning compared to the "
    "user's input sentence.",
    "In the following illustrative examples, Sentence 2 is generated to convey distinct or contradictory meaning "
    "compared to Sentence 1:",
    "Sentence 1",
    "Sentence 2",
    "Generate the new sentence directly without any other interpretation.",
};

const PromptTemplate& select_template(GenerationKind kind, PatternKind pattern) {
  if (pattern == PatternKind::kNLI) {
    switch (kind) {
      case GenerationKind::kPositive: return kNliPositive;
      case GenerationKind::kNegative: return kNliNegative;
      case GenerationKind::kIntermediate:
        throw UnsupportedCombinationError("no intermediate-sentence prompt exists for the NLI pattern");
    }
  }
  switch (kind) {
    case GenerationKind::kPositive: return kStsPositive;
    case GenerationKind::kIntermediate: return kStsIntermediate;
    case GenerationKind::kNegative: return kStsNegative;
  }
  return kStsPositive;
}

}  // namespace

std::string build_prompt(GenerationKind kind, PatternKind pattern, const PatternExamples& examples) {
  const PromptTemplate& t = select_template(kind, pattern);
  std::string out;
  out.append(t.instruction).append("\n\n").append(t.relation).append("\n");
  for (std::size_t i = 0; i < examples.size(); ++i) {
    out.append("- Example ").append(std::to_string(i + 1)).append(":\n");
    out.append("  - ").append(t.input_label).append(": ").append(examples[i].input).append("\n");
    out.append("  - ").append(t.output_label).append(": ").append(examples[i].output).append("\n");
  }
  out.append("\n").append(t.closing);
  return out;
}

}  // namespace csekit
