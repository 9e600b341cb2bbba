#include "ebi/protocol/collect.hpp"

#include <atomic>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "ebi/core/error.hpp"
#include "ebi/core/hashing.hpp"
#include "ebi/protocol/aggregate.hpp"
#include "ebi/protocol/blocking.hpp"

namespace ebi::protocol {

namespace fs = std::filesystem;
using nlohmann::json;

nlohmann::json to_json(const RawRecord& r) {
  json j{{"system_id", r.system_id}, {"role", r.role},         {"model", r.model},
         {"ptype", r.ptype},         {"block_id", r.block_id}, {"call_index", r.call_index},
         {"prompt_hash", r.prompt_hash}, {"response_text", r.response_text}, {"timestamp", r.timestamp}};
  j["target_b"] = r.target_b ? json(value(*r.target_b)) : json(nullptr);
  return j;
}

RawRecord raw_record_from_json(const nlohmann::json& j) {
  RawRecord r;
  r.system_id = j.at("system_id").get<int>();
  r.role = j.at("role").get<std::string>();
  r.model = j.at("model").get<std::string>();
  r.ptype = j.at("ptype").get<int>();
  r.block_id = j.at("block_id").get<int>();
  if (!j.at("target_b").is_null()) r.target_b = IdB{j["target_b"].get<std::int64_t>()};
  r.call_index = j.at("call_index").get<std::int64_t>();
  r.prompt_hash = j.at("prompt_hash").get<std::string>();
  r.response_text = j.at("response_text").get<std::string>();
  r.timestamp = j.value("timestamp", std::string{});
  return r;
}

std::string raw_path(int system_id) { return "raw/system_" + std::to_string(system_id) + ".jsonl"; }

namespace {

using Key = std::tuple<std::string, int, std::int64_t, std::int64_t>;  // role, block, target, call

Key key_of(const RawRecord& r) {
  return {r.role, r.block_id, r.target_b ? value(*r.target_b) : -1, r.call_index};
}

std::string utc_now() {
  const auto t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Task {
  const std::string* prompt;
  const std::string* prompt_hash;
  const BlockIds* ids;  // ids the response may mention
  RawRecord meta;       // response_text and timestamp still empty
};

struct RolePlan {
  std::string role;
  const PromptProtocol* proto;
  std::string model;
  clients::BackendPtr backend;
  std::vector<Block> blocks;
  std::vector<BlockIds> target_ids;  // Type 1: one entry per (block, target)
  std::vector<std::string> prompts;
  std::vector<std::string> hashes;
};

std::vector<const ProfileRecord*> records_a(const ProfileDataset& d, const std::vector<IdA>& ids) {
  std::vector<const ProfileRecord*> out;
  for (auto id : ids) out.push_back(&d.record_a(id));
  return out;
}

std::vector<const ProfileRecord*> records_b(const ProfileDataset& d, const std::vector<IdB>& ids) {
  std::vector<const ProfileRecord*> out;
  for (auto id : ids) out.push_back(&d.record_b(id));
  return out;
}

void plan_role(RolePlan& plan, const SystemSpec& system, const ProfileDataset& dataset, const TemplateStore& ts,
               const CollectOptions& options, std::vector<Task>& tasks) {
  const auto& proto = *plan.proto;
  plan.blocks = make_blocks(dataset, proto.block_size);
  const std::int64_t offset = plan.role == "s" ? kWeightCallOffset : 0;
  // Prompts are rendered once up front; tasks point into these vectors.
  std::size_t n_prompts = 0;
  for (const auto& blk : plan.blocks) n_prompts += proto.ptype == 1 ? blk.ids.b.size() : 1;
  plan.prompts.reserve(n_prompts);
  plan.hashes.reserve(n_prompts);
  plan.target_ids.reserve(n_prompts);

  for (const auto& blk : plan.blocks) {
    std::vector<std::optional<IdB>> targets;
    if (proto.ptype == 1) {
      for (auto b : blk.ids.b) targets.emplace_back(b);
    } else {
      targets.emplace_back(std::nullopt);
    }
    for (const auto& target : targets) {
      PromptSide side{records_a(dataset, blk.ids.a),
                      records_b(dataset, target ? std::vector<IdB>{*target} : blk.ids.b)};
      plan.prompts.push_back(render_prompt(ts, proto, side, options.kind, options.language));
      plan.hashes.push_back(sha256_hex(plan.prompts.back()));
      plan.target_ids.push_back(BlockIds{blk.ids.a, target ? std::vector<IdB>{*target} : blk.ids.b});
      for (int k = 0; k < proto.calls; ++k) {
        RawRecord meta;
        meta.system_id = system.system_id;
        meta.role = plan.role;
        meta.model = plan.model;
        meta.ptype = proto.ptype;
        meta.block_id = blk.block_id;
        meta.target_b = target;
        meta.call_index = offset + k;
        meta.prompt_hash = plan.hashes.back();
        tasks.push_back(Task{&plan.prompts.back(), &plan.hashes.back(), &plan.target_ids.back(), std::move(meta)});
      }
    }
  }
}

std::map<Key, RawRecord> load_existing(const RunStore& store, const std::string& rel) {
  std::map<Key, RawRecord> out;
  const auto path = store.root() / rel;
  if (!fs::exists(path)) return out;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      auto r = raw_record_from_json(json::parse(line));
      out[key_of(r)] = std::move(r);
    } catch (const json::exception&) {
      // A torn last line from an interrupted run; the call is simply redone.
    }
  }
  return out;
}

}  // namespace

long planned_calls(const PromptProtocol& proto, const ProfileDataset& dataset) {
  long n = 0;
  for (const auto& blk : make_blocks(dataset, proto.block_size)) {
    n += static_cast<long>(proto.calls) * (proto.ptype == 1 ? static_cast<long>(blk.ids.b.size()) : 1L);
  }
  return n;
}

CollectResult collect_system(const SystemSpec& system, const ProfileDataset& dataset,
                             const clients::BackendPtr& c_backend, const clients::BackendPtr& s_backend,
                             const CollectOptions& options) {
  validate(system);
  validate(dataset);
  if (!c_backend || !s_backend) throw ValidationError("collect_system needs both backends");
  const TemplateStore& ts = options.templates ? *options.templates : TemplateStore::builtin();

  RolePlan plans[2];
  plans[0].role = "c";
  plans[0].proto = &system.c_protocol;
  plans[0].model = system.model;
  plans[0].backend = c_backend;
  plans[1].role = "s";
  plans[1].proto = &system.s_protocol;
  plans[1].model = system.s_protocol.delegate_model.value_or(system.model);
  plans[1].backend = s_backend;

  std::vector<Task> tasks;
  std::vector<std::size_t> role_start(3, 0);
  for (int r = 0; r < 2; ++r) {
    role_start[r] = tasks.size();
    plan_role(plans[r], system, dataset, ts, options, tasks);
  }
  role_start[2] = tasks.size();

  const std::string rel = raw_path(system.system_id);
  std::map<Key, RawRecord> existing;
  if (options.store) existing = load_existing(*options.store, rel);

  std::vector<std::string> responses(tasks.size());
  std::vector<char> done(tasks.size(), 0);
  CollectResult result;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    auto it = existing.find(key_of(tasks[t].meta));
    if (it != existing.end() && it->second.prompt_hash == tasks[t].meta.prompt_hash) {
      responses[t] = it->second.response_text;
      done[t] = 1;
      ++result.resumed;
    }
  }

  std::ofstream raw_out;
  if (options.store) {
    fs::create_directories((options.store->root() / rel).parent_path());
    raw_out.open(options.store->root() / rel, std::ios::binary | std::ios::app);
    if (!raw_out) throw IoError("cannot append to " + (options.store->root() / rel).string());
  }
  std::mutex out_mu;
  std::atomic<std::size_t> next{0};
  std::atomic<long> issued{0};
  std::atomic<bool> abort{false};
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      if (abort) return;
      const std::size_t t = next++;
      if (t >= tasks.size()) return;
      if (done[t]) continue;
      const auto& task = tasks[t];
      const int role = t < role_start[1] ? 0 : 1;
      clients::CompletionRequest req;
      req.model = plans[role].model;
      req.messages = {{"user", *task.prompt}};
      req.params = system.sampling;
      req.call_index = task.meta.call_index;
      try {
        responses[t] = plans[role].backend->complete(req);
        ++issued;
        if (options.store) {
          RawRecord rec = task.meta;
          rec.response_text = responses[t];
          rec.timestamp = utc_now();
          const auto line = to_json(rec).dump() + "\n";
          std::lock_guard lock(out_mu);
          raw_out << line;
          raw_out.flush();
        }
      } catch (...) {
        std::lock_guard lock(out_mu);
        if (!failure) failure = std::current_exception();
        abort = true;
        return;
      }
    }
  };

  const int threads = std::max(1, options.concurrency);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (options.store) {
    raw_out.close();
    options.store->refresh(rel, "raw");
  }
  if (failure) std::rethrow_exception(failure);
  result.issued = issued;

  const IdAxes axes = dataset.axes();
  for (int r = 0; r < 2; ++r) {
    const auto& proto = *plans[r].proto;
    // Reduce in (block, call, target) order so completion order never matters.
    std::vector<std::size_t> order;
    for (std::size_t t = role_start[r]; t < role_start[r + 1]; ++t) order.push_back(t);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      const auto& a = tasks[x].meta;
      const auto& b = tasks[y].meta;
      const auto ta = a.target_b ? value(*a.target_b) : -1;
      const auto tb = b.target_b ? value(*b.target_b) : -1;
      return std::tie(a.block_id, a.call_index, ta) < std::tie(b.block_id, b.call_index, tb);
    });
    Matrix m;
    int failures = 0;
    if (proto.ptype == 1) {
      std::vector<ParsedType1> parsed;
      parsed.reserve(order.size());
      for (auto t : order) {
        parsed.push_back(parse_type1(responses[t], *tasks[t].ids));
        failures += parsed.back().failed;
      }
      m = aggregate_type1(parsed, axes, proto.calls);
    } else {
      std::vector<ParsedType2> parsed;
      parsed.reserve(order.size());
      for (auto t : order) {
        parsed.push_back(parse_type2(responses[t], *tasks[t].ids, tasks[t].ids->a.size()));
        failures += parsed.back().failed;
      }
      m = aggregate_type2(parsed, axes, proto.calls);
    }
    if (r == 0) {
      result.c = SubjectiveDegreeMatrix{axes, m.transposed(), proto.calls};
      result.c_parse_failures = failures;
    } else {
      result.s = WeightMatrix{axes, std::move(m)};
      result.s_parse_failures = failures;
    }
  }
  return result;
}

}  // namespace ebi::protocol
