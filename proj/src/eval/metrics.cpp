#include "ebi/eval/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "ebi/core/error.hpp"

namespace ebi::eval {

void validate(const Baselines& b) {
  auto positive = [](const std::optional<double>& v, const char* name) {
    if (v && !(*v > 0.0)) throw ValidationError(std::string(name) + " must be positive");
  };
  positive(b.human, "H");
  positive(b.llm, "G");
  positive(b.gamma, "gamma");
  if (b.n < 1) throw ValidationError("baseline N must be >= 1");
  if (!b.human && !(b.llm && b.gamma)) {
    throw ValidationError("baselines need H, or G together with gamma");
  }
}

int score(const Assignment& assignment, const Truth& truth) {
  int correct = 0;
  for (const auto& [b, a] : assignment.pairs) {
    auto it = truth.find(b);
    if (it == truth.end()) throw ValidationError("truth has no entry for id_B " + to_string(b));
    if (it->second == a) ++correct;
  }
  if (assignment.pairs.size() != truth.size()) {
    throw ValidationError("assignment and truth cover different id sets");
  }
  return correct;
}

double gamma(std::span<const double> human, std::span<const double> llm) {
  if (human.size() != llm.size()) throw ValidationError("gamma: H and G lists differ in length");
  if (human.empty()) throw ValidationError("gamma: empty lists");
  double sum = 0.0;
  for (std::size_t k = 0; k < human.size(); ++k) {
    if (!(human[k] > 0.0) || !(llm[k] > 0.0)) throw ValidationError("gamma: values must be positive");
    sum += human[k] / llm[k];
  }
  return sum / static_cast<double>(human.size());
}

EvalReport evaluate(int n_c, const Baselines& baselines) {
  validate(baselines);
  if (n_c < 0 || n_c > baselines.n) throw ValidationError("n_c outside [0, N]");
  EvalReport r;
  r.n_c = n_c;
  r.n = baselines.n;
  r.acc = 100.0 * n_c / baselines.n;
  if (baselines.human) {
    r.lift_base = *baselines.human;
  } else {
    r.lift_base = effective_baseline(*baselines.llm, *baselines.gamma);
    r.flags.push_back("effective_H");
  }
  r.lift = lift(n_c, r.lift_base);
  if (baselines.llm) {
    r.reach_base = *baselines.llm;
    r.base_used = BaseKind::llm;
  } else {
    r.reach_base = *baselines.human;
    r.base_used = BaseKind::human;
  }
  r.reach = reach(n_c, r.reach_base);
  return r;
}

std::string percent(double value) {
  char buf[32];
  // Guard against printing "-0.0%".
  const double v = std::abs(value) < 0.05 ? 0.0 : value;
  std::snprintf(buf, sizeof buf, "%.1f%%", v);
  return buf;
}

}  // namespace ebi::eval
