#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ebi {

// Identifiers are opaque labels. They never double as array positions.
enum class IdA : std::int64_t {};
enum class IdB : std::int64_t {};

constexpr std::int64_t value(IdA id) { return static_cast<std::int64_t>(id); }
constexpr std::int64_t value(IdB id) { return static_cast<std::int64_t>(id); }

std::string to_string(IdA id);
std::string to_string(IdB id);

// Row (id_B) and column (id_A) labels of a square matrix, with O(1) lookup.
class IdAxes {
 public:
  IdAxes() = default;
  IdAxes(std::vector<IdB> b_ids, std::vector<IdA> a_ids);

  const std::vector<IdB>& b_ids() const { return b_ids_; }
  const std::vector<IdA>& a_ids() const { return a_ids_; }
  std::size_t size() const { return b_ids_.size(); }

  std::optional<std::size_t> find(IdB id) const;
  std::optional<std::size_t> find(IdA id) const;
  // Throws ValidationError when the id is not on the axis.
  std::size_t index(IdB id) const;
  std::size_t index(IdA id) const;

  bool operator==(const IdAxes& other) const {
    return b_ids_ == other.b_ids_ && a_ids_ == other.a_ids_;
  }

 private:
  std::vector<IdB> b_ids_;
  std::vector<IdA> a_ids_;
  std::unordered_map<IdB, std::size_t> b_index_;
  std::unordered_map<IdA, std::size_t> a_index_;
};

}  // namespace ebi
