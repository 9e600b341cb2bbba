#include "ebi/core/run_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include "ebi/core/error.hpp"
#include "ebi/core/hashing.hpp"

namespace ebi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
constexpr const char* kManifest = "manifest.json";
}

RunStore::RunStore(fs::path run_dir, bool verify_hashes) : root_(std::move(run_dir)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw IoError("cannot create run directory " + root_.string() + ": " + ec.message());
  const auto lock_path = root_ / ".lock";
  lock_fd_ = ::open(lock_path.c_str(), O_RDWR | O_CREAT, 0644);
  if (lock_fd_ < 0) throw IoError("cannot open lock file " + lock_path.string());
  if (::flock(lock_fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(lock_fd_);
    lock_fd_ = -1;
    throw IoError("run directory " + root_.string() + " is locked by another process");
  }
  load_manifest();
  if (verify_hashes) verify();
}

RunStore::~RunStore() {
  if (lock_fd_ >= 0) {
    ::flock(lock_fd_, LOCK_UN);
    ::close(lock_fd_);
  }
}

void RunStore::load_manifest() {
  const auto path = root_ / kManifest;
  if (!fs::exists(path)) return;
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw IoError("corrupt manifest " + path.string() + ": " + e.what());
  }
  for (const auto& f : j.at("files")) {
    ManifestEntry e{f.at("path").get<std::string>(), f.at("sha256").get<std::string>(),
                    f.at("kind").get<std::string>()};
    entries_[e.path] = e;
  }
  if (j.contains("meta")) meta_ = j["meta"];
}

void RunStore::save_manifest_locked() {
  json files = json::array();
  for (const auto& [path, e] : entries_) {
    files.push_back({{"path", e.path}, {"sha256", e.sha256}, {"kind", e.kind}});
  }
  json j{{"files", files}, {"meta", meta_}};
  write_file_atomic(root_ / kManifest, j.dump(2) + "\n");
}

void RunStore::write_text(const std::string& rel, std::string_view content, const std::string& kind) {
  write_file_atomic(root_ / rel, content);
  std::lock_guard lock(mu_);
  entries_[rel] = ManifestEntry{rel, sha256_hex(content), kind};
  save_manifest_locked();
}

void RunStore::write_json(const std::string& rel, const json& j, const std::string& kind) {
  write_text(rel, j.dump(2) + "\n", kind);
}

void RunStore::refresh(const std::string& rel, const std::string& kind) {
  const auto hash = sha256_file(root_ / rel);
  std::lock_guard lock(mu_);
  entries_[rel] = ManifestEntry{rel, hash, kind};
  save_manifest_locked();
}

bool RunStore::exists(const std::string& rel) const { return fs::exists(root_ / rel); }

std::string RunStore::read_text(const std::string& rel) const {
  const auto path = root_ / rel;
  if (!fs::exists(path)) throw IoError("missing run file " + path.string());
  auto content = read_file(path);
  std::lock_guard lock(mu_);
  if (auto it = entries_.find(rel); it != entries_.end() && it->second.sha256 != sha256_hex(content)) {
    throw HashMismatchError("hash mismatch for " + rel + ": file changed since it was recorded");
  }
  return content;
}

json RunStore::read_json(const std::string& rel) const {
  try {
    return json::parse(read_text(rel));
  } catch (const json::exception& e) {
    throw IoError("invalid JSON in " + rel + ": " + e.what());
  }
}

void RunStore::verify() const {
  std::lock_guard lock(mu_);
  for (const auto& [path, e] : entries_) {
    const auto full = root_ / path;
    if (!fs::exists(full)) throw HashMismatchError("manifest lists missing file " + path);
    if (sha256_file(full) != e.sha256) {
      throw HashMismatchError("hash mismatch for " + path + ": file changed since it was recorded");
    }
  }
}

std::vector<ManifestEntry> RunStore::manifest() const {
  std::lock_guard lock(mu_);
  std::vector<ManifestEntry> out;
  for (const auto& [path, e] : entries_) out.push_back(e);
  return out;
}

void RunStore::set_meta(const std::string& key, json value) {
  std::lock_guard lock(mu_);
  meta_[key] = std::move(value);
  save_manifest_locked();
}

json RunStore::meta(const std::string& key) const {
  std::lock_guard lock(mu_);
  return meta_.contains(key) ? meta_[key] : json();
}

json to_json(const Assignment& a) {
  json pairs = json::array();
  for (const auto& [b, id_a] : a.pairs) pairs.push_back({{"id_B", value(b)}, {"id_A", value(id_a)}});
  json trace = json::array();
  for (const auto& t : a.trace) {
    trace.push_back({{"step", t.step}, {"id_B", value(t.b)}, {"id_A", value(t.a)}, {"value", t.value}});
  }
  return {{"pairs", pairs}, {"trace", trace}};
}

Assignment assignment_from_json(const json& j) {
  Assignment a;
  try {
    for (const auto& p : j.at("pairs")) {
      const IdB b{p.at("id_B").get<std::int64_t>()};
      if (!a.pairs.emplace(b, IdA{p.at("id_A").get<std::int64_t>()}).second) {
        throw ValidationError("assignment lists id_B " + to_string(b) + " twice");
      }
    }
    for (const auto& t : j.at("trace")) {
      a.trace.push_back(TraceStep{t.at("step").get<int>(), IdB{t.at("id_B").get<std::int64_t>()},
                                  IdA{t.at("id_A").get<std::int64_t>()}, t.at("value").get<double>()});
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed assignment JSON: ") + e.what());
  }
  return a;
}

}  // namespace ebi
