#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ebi/core/dataset.hpp"
#include "ebi/core/specs.hpp"

namespace ebi::eval {

// Reference counts for one dataset. They are measured outside this tool and
// supplied through configuration.
struct Baselines {
  std::optional<double> human;  // H, best human correct count
  std::optional<double> llm;    // G, best reference-LLM correct count
  std::optional<double> gamma;  // mean H/G ratio used when H is unknown
  int n = 0;                    // N, dataset size
};

void validate(const Baselines& b);

enum class BaseKind { human, llm };

struct EvalReport {
  int n_c = 0;
  int n = 0;
  double acc = 0.0;    // percent
  double lift = 0.0;   // percent, against H or H_eff
  double reach = 0.0;  // percent, against G when known, else H
  double lift_base = 0.0;
  double reach_base = 0.0;
  BaseKind base_used = BaseKind::llm;
  std::vector<std::string> flags;  // e.g. "effective_H"

  bool operator==(const EvalReport&) const = default;
};

// Number of pairs that agree with the ground truth.
int score(const Assignment& assignment, const Truth& truth);

inline double lift(double n_c, double human) { return 100.0 * (n_c / human - 1.0); }
inline double reach(double n_c, double base) { return 100.0 * n_c / base; }

// Mean of the elementwise H/G ratios.
double gamma(std::span<const double> human, std::span<const double> llm);

inline double effective_baseline(double llm, double gamma_value) { return llm * gamma_value; }

EvalReport evaluate(int n_c, const Baselines& baselines);

// Presentation rounding to 0.1: "21.1%".
std::string percent(double value);

}  // namespace ebi::eval
