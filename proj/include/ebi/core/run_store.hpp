#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"

#include "ebi/core/matrix.hpp"
#include "ebi/core/matrix_io.hpp"
#include "ebi/core/specs.hpp"

namespace ebi {

struct ManifestEntry {
  std::string path;  // relative to the run directory
  std::string sha256;
  std::string kind;  // raw | subjective | weight | confidence | judgment | assignment | report | ...
};

// A run directory: every file written through the store is recorded in
// manifest.json with its SHA-256. Opening an existing directory re-verifies
// all hashes. One process owns a run directory at a time (flock on .lock).
class RunStore {
 public:
  explicit RunStore(std::filesystem::path run_dir, bool verify = true);
  ~RunStore();
  RunStore(const RunStore&) = delete;
  RunStore& operator=(const RunStore&) = delete;

  const std::filesystem::path& root() const { return root_; }

  void write_text(const std::string& rel, std::string_view content, const std::string& kind);
  void write_json(const std::string& rel, const nlohmann::json& j, const std::string& kind);
  // Re-hashes a file that was modified outside write_text (e.g. appended JSONL).
  void refresh(const std::string& rel, const std::string& kind);

  bool exists(const std::string& rel) const;
  std::string read_text(const std::string& rel) const;
  nlohmann::json read_json(const std::string& rel) const;

  template <class M>
  void save_matrix(const std::string& rel, const M& m, const std::string& kind) {
    write_text(rel, to_csv(m), kind);
  }
  template <class M>
  M load_matrix(const std::string& rel) const {
    return matrix_from_csv_as<M>(read_text(rel));
  }

  // Throws HashMismatchError naming the first file whose content changed.
  void verify() const;
  std::vector<ManifestEntry> manifest() const;
  void set_meta(const std::string& key, nlohmann::json value);
  nlohmann::json meta(const std::string& key) const;

 private:
  void load_manifest();
  void save_manifest_locked();

  std::filesystem::path root_;
  int lock_fd_ = -1;
  mutable std::mutex mu_;
  std::map<std::string, ManifestEntry> entries_;
  nlohmann::json meta_ = nlohmann::json::object();
};

nlohmann::json to_json(const Assignment& a);
Assignment assignment_from_json(const nlohmann::json& j);

}  // namespace ebi
