#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ebi/clients/backend.hpp"
#include "ebi/protocol/templates.hpp"

namespace ebi::sequential {

struct FeedbackContext {
  std::string model;
  SamplingParams sampling;
  std::string kind = "generic";
  std::string language = "en";
  const protocol::TemplateStore* templates = nullptr;  // null = builtin
  // Messages sent ahead of the solving prompt (session history).
  std::vector<clients::Message> history;
};

struct FeedbackRound {
  std::string answer;
  std::string reason;            // first sentence of the answer
  std::string solving_prompt;
  std::string feedback_prompt;   // empty when no feedback call was made
  std::string feedback_reply;
  std::string refined_task;      // task used for the solving call
  int calls = 0;
};

// One Feedback-Reflect-Refine round. With no error info a single solving call
// is made. Otherwise a feedback call first turns the error into a revised
// instruction that is prepended to the task. next_call_index advances per call.
FeedbackRound solve_feedback_round(const std::string& task, const std::string& error_info,
                                   clients::ModelBackend& backend, const FeedbackContext& ctx,
                                   std::int64_t& next_call_index);

// "The answer."; text up to the first sentence end or newline.
std::string first_sentence(const std::string& text);

}  // namespace ebi::sequential
