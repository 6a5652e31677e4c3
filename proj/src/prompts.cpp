#include "ssa/prompts.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace ssa {
namespace {

// Aggregator instructions, verbatim (including the original typography).
constexpr std::string_view kSsaInstruction =
    "A conversation between User and Assistant. The user provide a question and some proposed "
    "answers. The Assistant first evaluate each answers individually,check whether each answer "
    "directly addresses the original question, assess the correctness of each answer based on "
    "logical reasoning, calculations, and accuracy relative to the question. After thorough "
    "evaluation, identify one correct answer. If the correct answer is not in the provided "
    "proposed answers, the Assistant will combine the correct answer with the proposed answers "
    "and provide the correct answer. The reasoning process and answer are enclosed within "
    "<think></think> and <answer></answer> tags, respectively, i.e., <think>reasoning process "
    "here</think> <answer>answer here</answer>.";

constexpr std::string_view kNoThinkInstruction =
    "A conversation between User and Assistant. The user provide a question and some proposed "
    "answers. The Assistant answer the question based on the proposed answers. The answer is "
    "enclosed within <answer></answer> tag, i.e., <answer>answer here</answer>.";

constexpr std::string_view kUscInstruction =
    "You are a helpful assistant. The user provide a question and some proposed answers. The "
    "Assistant first evaluate each answers individually,check whether each answer directly "
    "addresses the original question, assess the correctness of each answer based on logical "
    "reasoning, calculations, and accuracy relative to the question. After thorough evaluation, "
    "identify one correct answer based on majority consensus. The reasoning process and answer "
    "are enclosed within <think></think> and <answer></answer> tags, respectively, i.e., "
    "<think>reasoning process here</think> <answer>answer here</answer>.";

constexpr std::string_view kSftInstruction =
    "Here is a question and some proposed answers. You need to evaluate each answers "
    "individually, check whether each answer directly addresses the original question, assess "
    "the correctness of each answer based on logical reasoning, calculations, and accuracy "
    "relative to the question. After thorough evaluation, identify one correct answer. If the "
    "correct answer is not in the provided proposed answers, the Assistant will combine the "
    "correct partial responses to proposed answers and provide the correct answer. Make the "
    "reasoning process concise and to the point. The reasoning process and answer are enclosed "
    "within <think></think> and <answer></answer> tags, respectively,i.e., <think>reasoning "
    "process here</think> <answer>answer here</answer>.";

void replace_all(std::string& text, std::string_view token, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
        text.replace(pos, token.size(), value);
        pos += value.size();
    }
}

}  // namespace

PromptTemplate default_template(PromptKind kind) {
    PromptTemplate tmpl;
    tmpl.kind = kind;
    switch (kind) {
        case PromptKind::ssa:
            tmpl.body = std::string(kSsaInstruction) + "\n\nQuestion: {question}\n\n{answers}";
            break;
        case PromptKind::ssa_nothink:
            tmpl.body = std::string(kNoThinkInstruction) + "\n\nQuestion: {question}\n\n{answers}";
            break;
        case PromptKind::usc:
            tmpl.body = std::string(kUscInstruction) + "\n\nQuestion: {question}\n\n{answers}";
            break;
        case PromptKind::sft_oracle:
            tmpl.body = std::string(kSftInstruction) +
                        " Here is the Question and proposed answers: Question: "
                        "{question}\n\n{answers}\n\nHere is the labeled answer with answer tags "
                        "'<answer>{gold}</answer>', and most likely the correct answer. If none "
                        "of the proposed answers is correct, come up with the reasoning process "
                        "to arrive at the actual correct final answer. **Attention: Do not ever "
                        "mention the answer is given in the response, but you need to justify it "
                        "from the problem and proposed answers!**";
            break;
    }
    return tmpl;
}

ExtractionFormat format_for(PromptKind kind) {
    return kind == PromptKind::ssa_nothink ? ExtractionFormat::answer_tags
                                           : ExtractionFormat::think_answer_tags;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (seed != 0) {
        std::mt19937_64 rng(seed);
        std::shuffle(order.begin(), order.end(), rng);
    }
    return order;
}

BuiltPrompt build_prompt(const PromptTemplate& tmpl, const Question& question,
                         const SampleSet& set, std::uint64_t shuffle_seed,
                         std::string_view gold) {
    if (tmpl.body.find("{question}") == std::string::npos ||
        tmpl.body.find("{answers}") == std::string::npos)
        throw std::invalid_argument("prompt template is missing a required placeholder");
    if (tmpl.kind == PromptKind::sft_oracle && tmpl.body.find("{gold}") == std::string::npos)
        throw std::invalid_argument("sft_oracle template is missing the {gold} placeholder");

    BuiltPrompt built;
    built.shuffle_seed = shuffle_seed;
    built.order = shuffled_indices(set.candidates.size(), shuffle_seed);

    std::string answers;
    for (std::size_t label = 0; label < built.order.size(); ++label) {
        if (label) answers += "\n\n";
        answers += "Answer " + std::to_string(label + 1) + ": " +
                   set.candidates[built.order[label]].text;
    }

    built.text = tmpl.body;
    replace_all(built.text, "{question}", question.text);
    replace_all(built.text, "{answers}", answers);
    replace_all(built.text, "{gold}", gold);
    return built;
}

}  // namespace ssa
