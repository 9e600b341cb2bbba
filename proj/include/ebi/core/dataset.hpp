#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ebi/core/ids.hpp"

namespace ebi {

// One persona description on either side of the matching task.
struct ProfileRecord {
  std::int64_t id = 0;
  std::map<std::string, std::string> attributes;
  // Column order from the source file is preserved.
  std::vector<std::pair<std::string, std::string>> texts;

  const std::string* text(std::string_view field) const;
  const std::string* attribute(std::string_view key) const;

  bool operator==(const ProfileRecord&) const = default;
};

// Ground truth: id_B -> id_A.
using Truth = std::map<IdB, IdA>;

struct ProfileDataset {
  std::string name;
  std::vector<ProfileRecord> side_a;
  std::vector<ProfileRecord> side_b;
  std::optional<Truth> truth;
  std::vector<std::string> attribute_keys;

  std::size_t size() const { return side_a.size(); }
  IdAxes axes() const;
  const ProfileRecord& record_a(IdA id) const;
  const ProfileRecord& record_b(IdB id) const;

  bool operator==(const ProfileDataset&) const = default;
};

// Reads the two persona CSV files (first column id_A / id_B) and an optional
// truth CSV with columns id_B,id_A. Columns named in attribute_keys become
// attributes; all others are free-text fields.
ProfileDataset load_dataset(const std::filesystem::path& path_a,
                            const std::filesystem::path& path_b,
                            const std::optional<std::filesystem::path>& truth_path,
                            const std::vector<std::string>& attribute_keys,
                            std::string name = "dataset");

// Checks every dataset invariant; throws ValidationError with the first failure.
void validate(const ProfileDataset& dataset);
void validate_truth(const Truth& truth, const ProfileDataset& dataset);

// Serialises one side back to CSV using the same schema load_dataset reads.
std::string side_to_csv(const std::vector<ProfileRecord>& side, const char* id_column,
                        const std::vector<std::string>& attribute_keys);
std::string truth_to_csv(const Truth& truth);

}  // namespace ebi
