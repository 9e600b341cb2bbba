#pragma once

#include <map>
#include <vector>

#include "json.hpp"
#include "ebi/core/matrix.hpp"
#include "ebi/core/specs.hpp"
#include "ebi/eval/metrics.hpp"

namespace ebi::ensemble {

// Judgment matrices of single systems, keyed by system_id.
using JudgmentStore = std::map<int, JudgmentMatrix>;

struct EnsembleResult {
  EnsembleSpec spec;
  JudgmentMatrix combined;
  Assignment assignment;
  eval::EvalReport report;
};

// sum_k w_k J_k / sum_k w_k. All matrices must share axes; weights > 0.
JudgmentMatrix combine(const std::vector<const JudgmentMatrix*>& judgments, const std::vector<double>& weights);
JudgmentMatrix combine(const std::vector<JudgmentMatrix>& judgments, const std::vector<double>& weights);

// combine -> greedy assignment -> metrics.
EnsembleResult evaluate_ensemble(const EnsembleSpec& spec, const JudgmentStore& store, const Truth& truth,
                                 const eval::Baselines& baselines);

inline constexpr std::size_t kHardGridCap = 1'000'000;

struct GridOptions {
  std::vector<double> values{1, 2, 3, 5, 10, 30};
  std::size_t cap = 50'000;
  // Also enumerate every non-empty proper subset of the components.
  bool include_subsets = false;
};

// Every weight vector over `values` for the given components (and their
// subsets when asked), in lexicographic order. Throws when the count exceeds
// the cap or the hard cap.
std::vector<EnsembleSpec> weight_grid(const std::vector<int>& components, const GridOptions& options = {});

// Evaluates every candidate and ranks by n_c (highest first), then fewer
// components, then candidate order.
std::vector<EnsembleResult> search_weights(const std::vector<EnsembleSpec>& candidates, const JudgmentStore& store,
                                           const Truth& truth, const eval::Baselines& baselines);

// Spec, assignment and report; the combined matrix is stored separately.
nlohmann::json to_json(const EnsembleResult& result);

}  // namespace ebi::ensemble
