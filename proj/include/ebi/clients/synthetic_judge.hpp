#pragma once

#include <cstdint>
#include <map>

#include "ebi/clients/backend.hpp"
#include "ebi/clients/prompt_context.hpp"
#include "ebi/core/dataset.hpp"

namespace ebi::clients {

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;
};

struct SyntheticJudgeConfig {
  Truth truth;
  double accuracy = 0.5;  // probability of naming the true partner
  // Optional per-id_B weights over wrong id_A; missing or all-zero means uniform.
  std::map<IdB, std::map<IdA, double>> confusion;
  BetaParams certainty_correct{8.0, 2.0};
  BetaParams certainty_wrong{2.0, 6.0};
  std::uint64_t seed = 0;
};

void validate(const SyntheticJudgeConfig& cfg);

// Per-id_B error preferences: a symmetric Dirichlet(concentration) draw over
// the wrong id_A. Small concentrations make a judge favour a few decoys, so
// its mistakes repeat across calls instead of averaging out.
std::map<IdB, std::map<IdA, double>> random_confusion(const Truth& truth, double concentration, std::uint64_t seed);

// Answers a prompt in the text format the real models are asked for. The
// output is a pure function of (cfg, call_index, ctx).
std::string synthetic_judge_respond(const SyntheticJudgeConfig& cfg, const PromptContext& ctx,
                                    std::int64_t call_index);

class SyntheticJudgeBackend : public ModelBackend {
 public:
  explicit SyntheticJudgeBackend(SyntheticJudgeConfig cfg);
  std::string complete(const CompletionRequest& req) override;
  const SyntheticJudgeConfig& config() const { return cfg_; }

 private:
  SyntheticJudgeConfig cfg_;
};

}  // namespace ebi::clients
