#include "ebi/sequential/sequential.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include "ebi/core/error.hpp"
#include "ebi/protocol/parsers.hpp"
#include "ebi/sequential/feedback.hpp"
#include "ebi/sequential/tagged.hpp"

namespace ebi::sequential {

namespace {

std::string flatten(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) out += (ch == '\n' || ch == '\r') ? ' ' : ch;
  return out;
}

// Attributes first, then every text field.
std::string full_rows(const std::vector<const ProfileRecord*>& records, const char* label) {
  std::string out;
  for (const auto* r : records) {
    out += std::string(label) + ":" + std::to_string(r->id);
    for (const auto& [k, v] : r->attributes) out += ", " + k + ": " + flatten(v);
    for (const auto& [name, text] : r->texts) {
      if (!text.empty()) out += ", " + name + ": " + flatten(text);
    }
    out += '\n';
  }
  return out;
}

bool contains(const std::vector<IdA>& v, IdA a) { return std::find(v.begin(), v.end(), a) != v.end(); }

std::string signature(const ProfileRecord& r, const std::vector<std::string>& keys) {
  std::string sig;
  for (const auto& k : keys) {
    const auto* v = r.attribute(k);
    sig += v ? *v : std::string("\x01");
    sig += '\x1f';
  }
  return sig;
}

// Records every context sent so session isolation can be audited.
class RecordingBackend : public clients::ModelBackend {
 public:
  RecordingBackend(clients::ModelBackend& inner, std::vector<std::vector<clients::Message>>& sink)
      : inner_(inner), sink_(sink) {}
  std::string complete(const clients::CompletionRequest& req) override {
    sink_.push_back(req.messages);
    return inner_.complete(req);
  }

 private:
  clients::ModelBackend& inner_;
  std::vector<std::vector<clients::Message>>& sink_;
};

// Duplicated id_A plus id_B left without a pair while a partner is still free.
int count_conflicts(const std::map<IdB, IdA>& cur, const std::vector<IdB>& bs, const std::vector<IdA>& s0) {
  std::map<IdA, int> uses;
  int unresolved = 0;
  for (auto b : bs) {
    auto it = cur.find(b);
    if (it == cur.end()) {
      ++unresolved;
    } else {
      ++uses[it->second];
    }
  }
  int dups = 0;
  for (const auto& [a, k] : uses) dups += k - 1;
  const int free_a = static_cast<int>(s0.size()) - static_cast<int>(uses.size());
  return dups + std::min(unresolved, std::max(free_a, 0));
}

}  // namespace

void validate(const SequentialConfig& cfg) {
  if (cfg.recursion_threshold < 1) throw ValidationError("recursion_threshold must be at least 1");
  if (cfg.max_conflict_iterations < 1) throw ValidationError("max_conflict_iterations must be at least 1");
  if (cfg.feedback_retries < 0) throw ValidationError("feedback_retries must be non-negative");
  if (cfg.model.empty()) throw ValidationError("sequential model name is empty");
}

nlohmann::json to_json(const TranscriptEntry& e) {
  return {{"aset", e.aset}, {"step", e.step}, {"role", e.role}, {"content", e.content}, {"call_index", e.call_index}};
}

TranscriptEntry transcript_entry_from_json(const nlohmann::json& j) {
  TranscriptEntry e;
  e.aset = j.at("aset").get<int>();
  e.step = j.at("step").get<std::string>();
  e.role = j.at("role").get<std::string>();
  e.content = j.at("content").get<std::string>();
  e.call_index = j.value("call_index", std::int64_t{-1});
  return e;
}

std::vector<IdA> filter_candidates(const ProfileRecord& record_b, const std::vector<const ProfileRecord*>& pool,
                                   const std::vector<std::string>& keys) {
  std::vector<IdA> all;
  std::vector<IdA> match;
  const auto sig = signature(record_b, keys);
  for (const auto* a : pool) {
    all.push_back(IdA{a->id});
    if (signature(*a, keys) == sig) match.push_back(IdA{a->id});
  }
  return match.empty() ? all : match;
}

std::optional<IdA> parse_step_answer(std::string_view response) {
  const auto text = protocol::clean_response(response);
  // Prefer the JSON key; fall back to the last bare id_A:<n>.
  std::optional<IdA> found;
  for (std::size_t pos = 0; (pos = text.find("id_A", pos)) != std::string::npos; pos += 4) {
    std::size_t p = pos + 4;
    const bool quoted = p < text.size() && text[p] == '"';
    if (quoted) ++p;
    while (p < text.size() && text[p] == ' ') ++p;
    if (p >= text.size() || (text[p] != ':' && text[p] != '=')) continue;
    ++p;
    while (p < text.size() && text[p] == ' ') ++p;
    std::size_t e = p;
    while (e < text.size() && e - p < 18 && text[e] >= '0' && text[e] <= '9') ++e;
    if (e == p) continue;
    std::int64_t v = 0;
    std::from_chars(text.data() + p, text.data() + e, v);
    found = IdA{v};
    if (quoted) break;
  }
  return found;
}

SequentialResult run_sequential(const ProfileDataset& dataset, clients::ModelBackend& raw_backend,
                                const SequentialConfig& cfg, const protocol::TemplateStore& templates,
                                const TranscriptSink& sink) {
  validate(cfg);
  validate(dataset);
  SequentialResult res;
  auto emit = [&](TranscriptEntry e) {
    if (sink) sink(e);
    res.transcript.push_back(std::move(e));
  };
  RecordingBackend backend(raw_backend, res.contexts);
  std::int64_t next_call = 0;

  std::vector<const ProfileRecord*> free_a;
  for (const auto& a : dataset.side_a) free_a.push_back(&a);
  std::map<IdB, IdA> final_pairs;
  std::vector<TraceStep> trace;
  auto take = [&](IdB b, IdA a) {
    final_pairs[b] = a;
    trace.push_back({static_cast<int>(trace.size()) + 1, b, a, 0.0});
    free_a.erase(std::remove_if(free_a.begin(), free_a.end(), [&](const ProfileRecord* r) { return IdA{r->id} == a; }),
                 free_a.end());
  };

  // id_B grouped by attribute signature, groups in order of first appearance.
  std::vector<std::vector<const ProfileRecord*>> groups;
  {
    std::map<std::string, std::size_t> at;
    for (const auto& b : dataset.side_b) {
      const auto sig = signature(b, cfg.attribute_keys);
      auto [it, fresh] = at.emplace(sig, groups.size());
      if (fresh) groups.emplace_back();
      groups[it->second].push_back(&b);
    }
  }

  const std::string s1 = templates.named("s1", cfg.kind, cfg.language);
  const std::size_t threshold = static_cast<std::size_t>(cfg.recursion_threshold);

  for (const auto& group : groups) {
    const int aset = res.sessions++;
    const auto s0 = filter_candidates(*group.front(), free_a, cfg.attribute_keys);
    std::vector<IdB> bs;
    for (const auto* r : group) bs.push_back(IdB{r->id});
    auto note = [&](const std::string& step, const std::string& text) {
      emit({aset, step, "note", text, -1});
    };

    if (s0.size() == 1 && bs.size() == 1) {
      note("confirm", "id_B:" + to_string(bs[0]) + ", id_A:" + to_string(s0[0]) + " (single candidate)");
      take(bs[0], s0[0]);
      continue;
    }

    // Fresh history per Aset.
    std::vector<clients::Message> history{{"system", s1}};
    emit({aset, "S1", "system", s1, -1});
    auto call = [&](const std::string& step, const std::string& prompt) {
      auto messages = history;
      messages.push_back({"user", prompt});
      const auto idx = next_call++;
      const auto reply = backend.complete({cfg.model, messages, cfg.sampling, idx});
      history.push_back({"user", prompt});
      history.push_back({"assistant", reply});
      emit({aset, step, "user", prompt, idx});
      emit({aset, step, "assistant", reply, idx});
      return reply;
    };

    std::vector<const ProfileRecord*> s0_rows;
    for (auto a : s0) s0_rows.push_back(&dataset.record_a(a));

    std::vector<IdA> pool = s0;
    std::vector<IdB> waiting = bs;
    std::vector<IdB> deferred;
    std::vector<IdB> confirmed_order;
    std::map<IdB, IdA> cur;
    std::map<IdB, std::vector<IdA>> proposals;
    bool shown_a = false;

    std::size_t next_b = 0;
    while (next_b < waiting.size() && pool.size() > threshold) {
      const IdB b = waiting[next_b++];
      std::string candidates;
      if (!shown_a) {
        std::vector<const ProfileRecord*> rows;
        for (auto a : pool) rows.push_back(&dataset.record_a(a));
        candidates = protocol::render(templates.named("s2_candidates_first", cfg.kind, cfg.language),
                                      {{"ids_a", protocol::id_list(pool)}, {"rows_a", full_rows(rows, "id_A")}});
        shown_a = true;
      } else {
        candidates = protocol::render(templates.named("s2_candidates_next", cfg.kind, cfg.language),
                                      {{"ids_a", protocol::id_list(pool)}});
      }
      const auto prompt = protocol::render(
          templates.named("s2", cfg.kind, cfg.language),
          {{"id_b", to_string(b)}, {"row_b", full_rows({&dataset.record_b(b)}, "id_B")}, {"candidates", candidates}});
      ++res.s2_calls;
      auto answer = parse_step_answer(call("S2", prompt));

      for (int r = 0; r < cfg.feedback_retries && !(answer && contains(pool, *answer)); ++r) {
        std::string error;
        if (!answer) {
          error = "No id_A could be read from the answer for id_B=" + to_string(b) + ".";
        } else {
          error = "id_A=" + to_string(*answer) + " is not among the remaining candidates id_A=" +
                  protocol::id_list(pool) + " for id_B=" + to_string(b) + ".";
          for (const auto& [ob, oa] : cur) {
            if (oa == *answer) error += " It is already assigned to id_B=" + to_string(ob) + ".";
          }
        }
        FeedbackContext fctx{cfg.model, cfg.sampling, cfg.kind, cfg.language, &templates, history};
        const auto first_call = next_call;
        const auto round = solve_feedback_round(prompt, error, backend, fctx, next_call);
        res.feedback_calls += round.calls - 1;
        emit({aset, "feedback", "user", round.feedback_prompt, first_call});
        emit({aset, "feedback", "assistant", round.feedback_reply, first_call});
        emit({aset, "S2", "user", round.solving_prompt, first_call + 1});
        emit({aset, "S2", "assistant", round.answer, first_call + 1});
        history.push_back({"user", round.solving_prompt});
        history.push_back({"assistant", round.answer});
        answer = parse_step_answer(round.answer);
      }

      if (answer) proposals[b].push_back(*answer);
      if (answer && contains(pool, *answer)) {
        cur[b] = *answer;
        confirmed_order.push_back(b);
        pool.erase(std::find(pool.begin(), pool.end(), *answer));
      } else {
        ++res.conflicts;
        deferred.push_back(b);
        note("S2", "id_B:" + to_string(b) + " answer " + (answer ? "id_A:" + to_string(*answer) : "unreadable") +
                       " outside the pool; deferred");
      }
    }

    std::vector<IdB> rest(waiting.begin() + static_cast<std::ptrdiff_t>(next_b), waiting.end());
    rest.insert(rest.end(), deferred.begin(), deferred.end());
    if (!rest.empty()) {
      std::vector<const ProfileRecord*> rows_b;
      for (auto b : rest) rows_b.push_back(&dataset.record_b(b));
      const std::string rows_a_section = shown_a ? "" : "## A File\n" + full_rows(s0_rows, "id_A");
      const auto prompt = protocol::render(templates.named("s3", cfg.kind, cfg.language),
                                           {{"ids_b", protocol::id_list(rest)},
                                            {"ids_a", protocol::id_list(pool)},
                                            {"orig_ids_a", protocol::id_list(s0)},
                                            {"old_ids_b", protocol::id_list(confirmed_order)},
                                            {"rows_b", full_rows(rows_b, "id_B")},
                                            {"rows_a_section", rows_a_section}});
      ++res.s3_calls;
      for (auto [b, a] : parse_pairs(call("S3", prompt))) {
        if (std::find(bs.begin(), bs.end(), b) == bs.end() || !contains(s0, a)) continue;
        cur[b] = a;
        proposals[b].push_back(a);
      }
    }

    int found = count_conflicts(cur, bs, s0);
    if (found > 0) {
      res.conflicts += found;
      note("check", std::to_string(found) + " conflict(s) after recursion");
      int iterations = 0;
      bool settled = false;
      while (iterations < cfg.max_conflict_iterations) {
        std::string pairs;
        for (auto b : bs) {
          auto it = cur.find(b);
          pairs += "id_B:" + to_string(b) + ", id_A:" + (it == cur.end() ? std::string("unresolved") : to_string(it->second)) + "\n";
        }
        const auto review =
            parse_tagged(call("S4", protocol::render(templates.named("s4", cfg.kind, cfg.language), {{"pairs", pairs}})));
        ++iterations;
        for (auto [b, a] : review.result_pairs) {
          if (std::find(bs.begin(), bs.end(), b) == bs.end() || !contains(s0, a)) continue;
          cur[b] = a;
          proposals[b].push_back(a);
        }
        std::string status = "count=" + std::to_string(review.count);
        for (const auto& m : review.missing) status += " missing:" + m;
        note("S4", status);
        if (review.count == 0) {
          settled = true;
          break;
        }
      }
      res.s4_iterations += iterations;
      res.max_s4_in_session = std::max(res.max_s4_in_session, iterations);
      if (!settled) res.flags.push_back("aset " + std::to_string(aset) + ": max_conflict_iterations reached");
    }

    // Settle this Aset: current pairs in id_B order, then the latest still-free proposal.
    std::set<IdA> taken;
    std::vector<IdB> open;
    for (auto b : bs) {
      auto it = cur.find(b);
      if (it != cur.end() && taken.insert(it->second).second) {
        take(b, it->second);
      } else {
        open.push_back(b);
      }
    }
    for (auto b : open) {
      const auto& hist = proposals[b];
      for (auto it = hist.rbegin(); it != hist.rend(); ++it) {
        if (contains(s0, *it) && !taken.count(*it)) {
          taken.insert(*it);
          take(b, *it);
          ++res.completed_pairs;
          note("complete", "id_B:" + to_string(b) + ", id_A:" + to_string(*it) + " (earlier proposal)");
          break;
        }
      }
    }
    for (auto b : open) {
      if (final_pairs.count(b)) continue;
      for (auto a : s0) {
        if (!taken.count(a)) {
          taken.insert(a);
          take(b, a);
          ++res.completed_pairs;
          note("complete", "id_B:" + to_string(b) + ", id_A:" + to_string(a) + " (remaining candidate)");
          break;
        }
      }
    }
  }

  // id_B whose Aset ran out: pair with whatever is left, by id order.
  std::vector<IdB> left_b;
  for (const auto& b : dataset.side_b) {
    if (!final_pairs.count(IdB{b.id})) left_b.push_back(IdB{b.id});
  }
  std::vector<IdA> left_a;
  for (const auto* a : free_a) left_a.push_back(IdA{a->id});
  std::sort(left_b.begin(), left_b.end());
  std::sort(left_a.begin(), left_a.end());
  for (std::size_t k = 0; k < left_b.size(); ++k) {
    emit({res.sessions, "complete", "note",
                              "id_B:" + to_string(left_b[k]) + ", id_A:" + to_string(left_a[k]) + " (id order)", -1});
    ++res.completed_pairs;
    take(left_b[k], left_a[k]);
  }

  res.assignment.pairs = std::move(final_pairs);
  res.assignment.trace = std::move(trace);
  validate(res.assignment, dataset.axes());
  return res;
}

}  // namespace ebi::sequential
