#include "ebi/clients/synthetic_judge.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include <boost/random/beta_distribution.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_01.hpp>

#include "ebi/core/error.hpp"

namespace ebi::clients {

namespace {

using Rng = boost::random::mt19937_64;

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  // splitmix64 finaliser over the running state.
  std::uint64_t z = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng make_rng(const SyntheticJudgeConfig& cfg, const PromptContext& ctx, std::int64_t call_index) {
  std::uint64_t h = mix(cfg.seed, static_cast<std::uint64_t>(call_index));
  h = mix(h, static_cast<std::uint64_t>(ctx.kind));
  for (auto a : ctx.candidates) h = mix(h, static_cast<std::uint64_t>(value(a)));
  h = mix(h, 0xabcdefULL);
  for (auto b : ctx.targets) h = mix(h, static_cast<std::uint64_t>(value(b)));
  for (auto b : ctx.earlier_targets) h = mix(h, static_cast<std::uint64_t>(value(b)));
  return Rng(h);
}

double uniform(Rng& rng) { return boost::random::uniform_01<double>()(rng); }

double beta(Rng& rng, const BetaParams& p) {
  return boost::random::beta_distribution<double>(p.alpha, p.beta)(rng);
}

IdA truth_of(const SyntheticJudgeConfig& cfg, IdB b) {
  auto it = cfg.truth.find(b);
  if (it == cfg.truth.end()) {
    throw ValidationError("synthetic judge: id_B " + to_string(b) + " is outside the truth domain");
  }
  return it->second;
}

// Wrong candidate for b, weighted by the configured confusion (uniform when
// no usable weights). Returns the truth only if there is nothing else.
IdA decoy(const SyntheticJudgeConfig& cfg, IdB b, IdA truth, const std::vector<IdA>& candidates, Rng& rng) {
  std::vector<IdA> wrong;
  for (auto a : candidates) {
    if (a != truth) wrong.push_back(a);
  }
  if (wrong.empty()) return truth;
  std::vector<double> w(wrong.size(), 0.0);
  double total = 0.0;
  if (auto it = cfg.confusion.find(b); it != cfg.confusion.end()) {
    for (std::size_t k = 0; k < wrong.size(); ++k) {
      auto jt = it->second.find(wrong[k]);
      if (jt != it->second.end()) w[k] = jt->second;
      total += w[k];
    }
  }
  if (total <= 0.0) {
    std::fill(w.begin(), w.end(), 1.0);
    total = static_cast<double>(w.size());
  }
  double u = uniform(rng) * total;
  for (std::size_t k = 0; k < wrong.size(); ++k) {
    u -= w[k];
    if (u < 0.0) return wrong[k];
  }
  return wrong.back();
}

IdA pick(const SyntheticJudgeConfig& cfg, IdB b, const std::vector<IdA>& candidates, Rng& rng, bool& correct) {
  const IdA truth = truth_of(cfg, b);
  const bool in_block = std::find(candidates.begin(), candidates.end(), truth) != candidates.end();
  const double u = uniform(rng);
  if (candidates.empty() || (in_block && u < cfg.accuracy)) {
    correct = true;
    return truth;
  }
  const IdA a = decoy(cfg, b, truth, candidates, rng);
  correct = a == truth;
  return a;
}

std::string fmt_certainty(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string pair_line(IdB b, IdA a) { return "id_B:" + to_string(b) + ", id_A:" + to_string(a) + "\n"; }

std::string respond_type1(const SyntheticJudgeConfig& cfg, const PromptContext& ctx, Rng& rng) {
  std::string out = "I compared the inferred profile with each candidate.\n";
  for (auto b : ctx.targets) {
    bool correct = false;
    out += pair_line(b, pick(cfg, b, ctx.candidates, rng, correct));
  }
  return out;
}

std::string respond_type2(const SyntheticJudgeConfig& cfg, const PromptContext& ctx, Rng& rng) {
  std::string out;
  for (auto b : ctx.targets) {
    bool correct = false;
    const IdA top = pick(cfg, b, ctx.candidates, rng, correct);
    std::vector<std::pair<double, IdA>> ranked;
    for (auto a : ctx.candidates) {
      const double c = a == top ? beta(rng, cfg.certainty_correct) : beta(rng, cfg.certainty_wrong);
      ranked.emplace_back(c, a);
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    out += "**id_B:" + to_string(b) + "** Inferred persona.\n";
    int rank = 1;
    for (const auto& [c, a] : ranked) {
      out += std::to_string(rank++) + ". id_B:" + to_string(b) + ", id_A:" + to_string(a) + " " + fmt_certainty(c) + "\n";
    }
  }
  return out;
}

std::string respond_step(const SyntheticJudgeConfig& cfg, const PromptContext& ctx, Rng& rng) {
  if (ctx.targets.empty()) return "{\"thought\": \"no target\", \"id_A\": 0}";
  bool correct = false;
  const IdA a = pick(cfg, ctx.targets.front(), ctx.candidates, rng, correct);
  return "{\"thought\": \"closest profile\", \"id_A\": " + to_string(a) + "}";
}

std::string respond_recursion(const SyntheticJudgeConfig& cfg, const PromptContext& ctx, Rng& rng) {
  std::string out = "Reviewed the candidates and earlier results.\n";
  std::vector<IdB> all = ctx.earlier_targets;
  all.insert(all.end(), ctx.targets.begin(), ctx.targets.end());
  for (auto b : all) {
    bool correct = false;
    out += pair_line(b, pick(cfg, b, ctx.candidates, rng, correct));
  }
  return out;
}

std::string respond_review(const SyntheticJudgeConfig& cfg, const PromptContext& ctx, Rng& rng) {
  // Only pairs caught in a duplicate are reconsidered.
  std::map<IdA, int> uses;
  for (auto [b, a] : ctx.pairs) ++uses[a];
  std::vector<std::pair<IdB, IdA>> revised;
  for (auto [b, a] : ctx.pairs) {
    const bool dup = uses[a] > 1;
    revised.emplace_back(b, dup && uniform(rng) < cfg.accuracy ? truth_of(cfg, b) : a);
  }
  std::set<IdA> seen;
  int dups = 0;
  for (auto [b, a] : revised) dups += !seen.insert(a).second;
  std::string out = "<thinking>Checked the pairs for duplicates.</thinking>\n<result>\n";
  for (auto [b, a] : revised) out += pair_line(b, a);
  out += "</result>\n<reflection>" + std::string(dups ? "Duplicates remain." : "No duplicates.") +
         "</reflection>\n<count>" + std::to_string(dups) + "</count>\n";
  return out;
}

}  // namespace

void validate(const SyntheticJudgeConfig& cfg) {
  if (!(cfg.accuracy >= 0.0 && cfg.accuracy <= 1.0)) throw ValidationError("judge accuracy must lie in [0,1]");
  for (const auto* p : {&cfg.certainty_correct, &cfg.certainty_wrong}) {
    if (!(p->alpha > 0.0 && p->beta > 0.0)) throw ValidationError("beta parameters must be positive");
  }
  for (const auto& [b, row] : cfg.confusion) {
    for (const auto& [a, w] : row) {
      if (!(w >= 0.0)) throw ValidationError("confusion weights must be non-negative");
    }
  }
}

std::map<IdB, std::map<IdA, double>> random_confusion(const Truth& truth, double concentration, std::uint64_t seed) {
  if (!(concentration > 0.0)) throw ValidationError("confusion concentration must be positive");
  Rng rng(mix(seed, 0x636f6e66ULL));
  boost::random::gamma_distribution<double> draw(concentration);
  std::map<IdB, std::map<IdA, double>> out;
  for (const auto& [b, truth_a] : truth) {
    auto& row = out[b];
    double total = 0.0;
    for (const auto& [other_b, a] : truth) {
      if (a == truth_a) continue;
      const double g = draw(rng);
      row[a] = g;
      total += g;
    }
    if (total > 0.0) {
      for (auto& [a, w] : row) w /= total;
    }
  }
  return out;
}

std::string synthetic_judge_respond(const SyntheticJudgeConfig& cfg, const PromptContext& ctx,
                                    std::int64_t call_index) {
  Rng rng = make_rng(cfg, ctx, call_index);
  switch (ctx.kind) {
    case PromptKind::type2: return respond_type2(cfg, ctx, rng);
    case PromptKind::seq_step: return respond_step(cfg, ctx, rng);
    case PromptKind::seq_recursion: return respond_recursion(cfg, ctx, rng);
    case PromptKind::seq_review: return respond_review(cfg, ctx, rng);
    case PromptKind::feedback:
      return "The earlier answer repeated an id_A. Check every candidate once and give each id_B a distinct id_A.";
    default: return respond_type1(cfg, ctx, rng);
  }
}

SyntheticJudgeBackend::SyntheticJudgeBackend(SyntheticJudgeConfig cfg) : cfg_(std::move(cfg)) { validate(cfg_); }

std::string SyntheticJudgeBackend::complete(const CompletionRequest& req) {
  validate(req);
  return synthetic_judge_respond(cfg_, extract_context(req), req.call_index);
}

}  // namespace ebi::clients
