#include "ebi/sequential/feedback.hpp"

namespace ebi::sequential {

std::string first_sentence(const std::string& text) {
  const auto b = text.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = text.find_first_of(".\n", b);
  if (e == std::string::npos) return text.substr(b);
  if (text[e] == '.') ++e;
  return text.substr(b, e - b);
}

FeedbackRound solve_feedback_round(const std::string& task, const std::string& error_info,
                                   clients::ModelBackend& backend, const FeedbackContext& ctx,
                                   std::int64_t& next_call_index) {
  const auto& store = ctx.templates ? *ctx.templates : protocol::TemplateStore::builtin();
  FeedbackRound round;
  round.refined_task = task;
  if (!error_info.empty()) {
    round.feedback_prompt = protocol::render(store.named("frr_feedback", ctx.kind, ctx.language),
                                             {{"error_info", error_info}, {"task", task}});
    clients::CompletionRequest req{ctx.model, {{"user", round.feedback_prompt}}, ctx.sampling, next_call_index++};
    round.feedback_reply = backend.complete(req);
    ++round.calls;
    round.refined_task = round.feedback_reply + "\n" + task;
  }
  round.solving_prompt =
      protocol::render(store.named("frr_solve", ctx.kind, ctx.language), {{"task", round.refined_task}});
  auto messages = ctx.history;
  messages.push_back({"user", round.solving_prompt});
  round.answer = backend.complete({ctx.model, std::move(messages), ctx.sampling, next_call_index++});
  ++round.calls;
  round.reason = first_sentence(round.answer);
  return round;
}

}  // namespace ebi::sequential
