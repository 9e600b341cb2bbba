#include "ebi/ensemble/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ebi/core/error.hpp"
#include "ebi/core/run_store.hpp"
#include "ebi/eval/report.hpp"
#include "ebi/inference/assignment.hpp"

namespace ebi::ensemble {

JudgmentMatrix combine(const std::vector<const JudgmentMatrix*>& judgments, const std::vector<double>& weights) {
  if (judgments.empty()) throw ValidationError("ensemble needs at least one component");
  if (judgments.size() != weights.size()) throw ValidationError("ensemble components and weights differ in length");
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("ensemble weights must be positive");
  }
  const auto& axes = judgments.front()->axes;
  for (const auto* j : judgments) {
    if (!(j->axes == axes)) throw ValidationError("ensemble components have different id axes");
    check_shape(j->axes, j->entries, "judgment matrix");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const std::size_t n = axes.size();
  Matrix out(n, n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < judgments.size(); ++k) acc += weights[k] * judgments[k]->entries(r, c);
      out(r, c) = acc / total;
    }
  }
  return JudgmentMatrix{axes, std::move(out)};
}

JudgmentMatrix combine(const std::vector<JudgmentMatrix>& judgments, const std::vector<double>& weights) {
  std::vector<const JudgmentMatrix*> ptrs;
  for (const auto& j : judgments) ptrs.push_back(&j);
  return combine(ptrs, weights);
}

EnsembleResult evaluate_ensemble(const EnsembleSpec& spec, const JudgmentStore& store, const Truth& truth,
                                 const eval::Baselines& baselines) {
  validate(spec);
  std::vector<const JudgmentMatrix*> parts;
  for (int id : spec.components) {
    auto it = store.find(id);
    if (it == store.end()) throw ValidationError("ensemble component " + std::to_string(id) + " has no judgment matrix");
    parts.push_back(&it->second);
  }
  EnsembleResult r{spec, combine(parts, spec.weights), {}, {}};
  r.assignment = inference::greedy_assign(r.combined);
  r.report = eval::evaluate(eval::score(r.assignment, truth), baselines);
  return r;
}

std::vector<EnsembleSpec> weight_grid(const std::vector<int>& components, const GridOptions& options) {
  if (components.empty()) throw ValidationError("weight grid needs components");
  if (options.values.empty()) throw ValidationError("weight grid needs candidate values");
  for (double v : options.values) {
    if (!(v > 0.0)) throw ValidationError("weight grid values must be positive");
  }
  const std::size_t k = components.size();
  if (k > 20) throw ValidationError("weight grid over more than 20 components");
  const std::size_t cap = std::min(options.cap, kHardGridCap);

  std::vector<std::vector<int>> subsets;
  if (options.include_subsets) {
    for (std::size_t mask = 1; mask < (std::size_t{1} << k); ++mask) {
      std::vector<int> s;
      for (std::size_t b = 0; b < k; ++b) {
        if (mask & (std::size_t{1} << b)) s.push_back(components[b]);
      }
      subsets.push_back(std::move(s));
    }
    // Full set first, then larger subsets before smaller ones.
    std::stable_sort(subsets.begin(), subsets.end(), [](const auto& x, const auto& y) { return x.size() > y.size(); });
  } else {
    subsets.push_back(components);
  }

  double count = 0.0;
  for (const auto& s : subsets) count += std::pow(static_cast<double>(options.values.size()), static_cast<double>(s.size()));
  if (count > static_cast<double>(cap)) {
    throw ValidationError("weight grid has " + std::to_string(static_cast<long long>(count)) +
                          " candidates, above the cap of " + std::to_string(cap));
  }

  std::vector<EnsembleSpec> out;
  out.reserve(static_cast<std::size_t>(count));
  for (const auto& s : subsets) {
    std::vector<std::size_t> digit(s.size(), 0);
    for (;;) {
      EnsembleSpec spec;
      spec.components = s;
      for (auto d : digit) spec.weights.push_back(options.values[d]);
      out.push_back(std::move(spec));
      std::size_t pos = s.size();
      while (pos > 0 && ++digit[pos - 1] == options.values.size()) digit[--pos] = 0;
      if (pos == 0) break;
    }
  }
  return out;
}

std::vector<EnsembleResult> search_weights(const std::vector<EnsembleSpec>& candidates, const JudgmentStore& store,
                                           const Truth& truth, const eval::Baselines& baselines) {
  if (candidates.empty()) throw ValidationError("weight search needs at least one candidate");
  if (candidates.size() > kHardGridCap) throw ValidationError("weight search above the hard cap");
  std::vector<EnsembleResult> results;
  results.reserve(candidates.size());
  for (const auto& c : candidates) results.push_back(evaluate_ensemble(c, store, truth, baselines));
  std::stable_sort(results.begin(), results.end(), [](const EnsembleResult& x, const EnsembleResult& y) {
    if (x.report.n_c != y.report.n_c) return x.report.n_c > y.report.n_c;
    return x.spec.components.size() < y.spec.components.size();
  });
  return results;
}

nlohmann::json to_json(const EnsembleResult& result) {
  nlohmann::json j{{"components", result.spec.components},
                   {"weights", result.spec.weights},
                   {"assignment", ebi::to_json(result.assignment)},
                   {"report", eval::to_json(result.report)}};
  j["ensemble_id"] = result.spec.ensemble_id ? nlohmann::json(*result.spec.ensemble_id) : nlohmann::json(nullptr);
  return j;
}

}  // namespace ebi::ensemble
