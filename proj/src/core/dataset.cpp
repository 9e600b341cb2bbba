#include "ebi/core/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "ebi/core/csv.hpp"
#include "ebi/core/error.hpp"
#include "ebi/core/hashing.hpp"

namespace ebi {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

std::int64_t parse_id(std::string_view raw, const std::string& where) {
  const std::string s = trim(raw);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ValidationError(where + ": id '" + s + "' is not an integer");
  }
  if (v <= 0) throw ValidationError(where + ": id " + s + " is not positive");
  return v;
}

std::vector<ProfileRecord> load_side(const std::filesystem::path& path, const char* id_column,
                                     const std::vector<std::string>& attribute_keys) {
  const auto rows = csv::parse(read_file(path));
  const std::string file = path.string();
  if (rows.empty()) throw ValidationError(file + ": missing header row");
  const auto& header = rows.front();
  if (header.empty() || trim(header[0]) != id_column) {
    throw ValidationError(file + ": first column must be " + std::string(id_column));
  }
  const std::set<std::string> attrs(attribute_keys.begin(), attribute_keys.end());

  std::vector<ProfileRecord> records;
  std::set<std::int64_t> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = file + " row " + std::to_string(r + 1);
    if (row.size() != header.size()) {
      throw ValidationError("malformed CSV row: " + where + " has " + std::to_string(row.size()) +
                            " fields, header has " + std::to_string(header.size()));
    }
    ProfileRecord rec;
    rec.id = parse_id(row[0], where);
    if (!seen.insert(rec.id).second) {
      throw ValidationError("duplicate id " + std::to_string(rec.id) + " in " + file);
    }
    for (std::size_t c = 1; c < row.size(); ++c) {
      const std::string key = trim(header[c]);
      if (attrs.contains(key)) {
        rec.attributes[key] = trim(row[c]);
      } else {
        rec.texts.emplace_back(key, row[c]);
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

const std::string* ProfileRecord::text(std::string_view field) const {
  for (const auto& [k, v] : texts)
    if (k == field) return &v;
  return nullptr;
}

const std::string* ProfileRecord::attribute(std::string_view key) const {
  auto it = attributes.find(std::string(key));
  return it == attributes.end() ? nullptr : &it->second;
}

IdAxes ProfileDataset::axes() const {
  std::vector<IdB> b;
  std::vector<IdA> a;
  for (const auto& r : side_b) b.push_back(IdB{r.id});
  for (const auto& r : side_a) a.push_back(IdA{r.id});
  return IdAxes(std::move(b), std::move(a));
}

const ProfileRecord& ProfileDataset::record_a(IdA id) const {
  for (const auto& r : side_a)
    if (r.id == value(id)) return r;
  throw ValidationError("unknown id_A " + to_string(id));
}

const ProfileRecord& ProfileDataset::record_b(IdB id) const {
  for (const auto& r : side_b)
    if (r.id == value(id)) return r;
  throw ValidationError("unknown id_B " + to_string(id));
}

void validate_truth(const Truth& truth, const ProfileDataset& dataset) {
  std::set<std::int64_t> ids_a, ids_b, targets;
  for (const auto& r : dataset.side_a) ids_a.insert(r.id);
  for (const auto& r : dataset.side_b) ids_b.insert(r.id);
  for (const auto& [b, a] : truth) {
    if (!ids_b.contains(value(b))) throw ValidationError("truth names unknown id_B " + to_string(b));
    if (!ids_a.contains(value(a))) throw ValidationError("truth names unknown id_A " + to_string(a));
    if (!targets.insert(value(a)).second) {
      throw ValidationError("truth not bijection: id_A " + to_string(a) +
                            " is paired with more than one id_B");
    }
  }
  if (truth.size() != ids_b.size()) {
    throw ValidationError("truth not bijection: covers " + std::to_string(truth.size()) + " of " +
                          std::to_string(ids_b.size()) + " id_B");
  }
}

void validate(const ProfileDataset& dataset) {
  if (dataset.side_a.size() != dataset.side_b.size()) {
    throw ValidationError("size mismatch: side A has " + std::to_string(dataset.side_a.size()) +
                          " records, side B has " + std::to_string(dataset.side_b.size()));
  }
  if (dataset.side_a.empty()) throw ValidationError("dataset is empty");
  auto check_side = [](const std::vector<ProfileRecord>& side, const char* name) {
    std::set<std::int64_t> seen;
    for (const auto& r : side) {
      if (r.id <= 0) throw ValidationError(std::string(name) + ": non-positive id");
      if (!seen.insert(r.id).second) {
        throw ValidationError(std::string("duplicate id ") + std::to_string(r.id) + " on side " +
                              name);
      }
      const bool has_text = std::any_of(r.texts.begin(), r.texts.end(),
                                        [](const auto& kv) { return !trim(kv.second).empty(); });
      if (!has_text) {
        throw ValidationError(std::string(name) + " record " + std::to_string(r.id) +
                              " has no non-empty text field");
      }
    }
  };
  check_side(dataset.side_a, "A");
  check_side(dataset.side_b, "B");
  if (dataset.truth) validate_truth(*dataset.truth, dataset);
}

ProfileDataset load_dataset(const std::filesystem::path& path_a, const std::filesystem::path& path_b,
                            const std::optional<std::filesystem::path>& truth_path,
                            const std::vector<std::string>& attribute_keys, std::string name) {
  ProfileDataset ds;
  ds.name = std::move(name);
  ds.attribute_keys = attribute_keys;
  ds.side_a = load_side(path_a, "id_A", attribute_keys);
  ds.side_b = load_side(path_b, "id_B", attribute_keys);
  if (truth_path) {
    const auto rows = csv::parse(read_file(*truth_path));
    const std::string file = truth_path->string();
    if (rows.empty() || rows[0].size() < 2 || trim(rows[0][0]) != "id_B" ||
        trim(rows[0][1]) != "id_A") {
      throw ValidationError(file + ": truth header must be id_B,id_A");
    }
    Truth truth;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const std::string where = file + " row " + std::to_string(r + 1);
      if (rows[r].size() != 2) throw ValidationError("malformed CSV row: " + where);
      const IdB b{parse_id(rows[r][0], where)};
      const IdA a{parse_id(rows[r][1], where)};
      if (!truth.emplace(b, a).second) {
        throw ValidationError("truth not bijection: id_B " + to_string(b) + " listed twice");
      }
    }
    ds.truth = std::move(truth);
  }
  validate(ds);
  return ds;
}

std::string side_to_csv(const std::vector<ProfileRecord>& side, const char* id_column,
                        const std::vector<std::string>& attribute_keys) {
  csv::Row header{id_column};
  for (const auto& k : attribute_keys) header.push_back(k);
  if (!side.empty())
    for (const auto& [k, v] : side.front().texts) header.push_back(k);
  std::string out = csv::format_row(header);
  for (const auto& r : side) {
    csv::Row row{std::to_string(r.id)};
    for (const auto& k : attribute_keys) {
      const auto* v = r.attribute(k);
      row.push_back(v ? *v : std::string{});
    }
    for (const auto& [k, v] : r.texts) row.push_back(v);
    out += csv::format_row(row);
  }
  return out;
}

std::string truth_to_csv(const Truth& truth) {
  std::string out = "id_B,id_A\n";
  for (const auto& [b, a] : truth) out += to_string(b) + "," + to_string(a) + "\n";
  return out;
}

}  // namespace ebi
