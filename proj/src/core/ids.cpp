#include "ebi/core/ids.hpp"

#include <cmath>

#include "ebi/core/error.hpp"
#include "ebi/core/matrix.hpp"

namespace ebi {

std::string to_string(IdA id) { return std::to_string(value(id)); }
std::string to_string(IdB id) { return std::to_string(value(id)); }

IdAxes::IdAxes(std::vector<IdB> b_ids, std::vector<IdA> a_ids)
    : b_ids_(std::move(b_ids)), a_ids_(std::move(a_ids)) {
  if (b_ids_.size() != a_ids_.size()) {
    throw ValidationError("axes not square: " + std::to_string(b_ids_.size()) + " id_B vs " +
                          std::to_string(a_ids_.size()) + " id_A");
  }
  for (std::size_t i = 0; i < b_ids_.size(); ++i) {
    if (!b_index_.emplace(b_ids_[i], i).second) {
      throw ValidationError("duplicate id_B " + to_string(b_ids_[i]) + " on axis");
    }
    if (!a_index_.emplace(a_ids_[i], i).second) {
      throw ValidationError("duplicate id_A " + to_string(a_ids_[i]) + " on axis");
    }
  }
}

std::optional<std::size_t> IdAxes::find(IdB id) const {
  auto it = b_index_.find(id);
  if (it == b_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> IdAxes::find(IdA id) const {
  auto it = a_index_.find(id);
  if (it == a_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t IdAxes::index(IdB id) const {
  if (auto i = find(id)) return *i;
  throw ValidationError("unknown id_B " + to_string(id));
}

std::size_t IdAxes::index(IdA id) const {
  if (auto j = find(id)) return *j;
  throw ValidationError("unknown id_A " + to_string(id));
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

void check_shape(const IdAxes& axes, const Matrix& m, const char* what, bool require_nonnegative) {
  if (!m.square()) throw ValidationError(std::string(what) + ": matrix is not square");
  if (m.rows() != axes.size()) {
    throw ValidationError(std::string(what) + ": matrix size " + std::to_string(m.rows()) +
                          " does not match " + std::to_string(axes.size()) + " ids");
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      if (std::isnan(v)) {
        throw ValidationError(std::string(what) + ": NaN at (" + std::to_string(r) + ", " +
                              std::to_string(c) + ")");
      }
      if (!std::isfinite(v)) {
        throw ValidationError(std::string(what) + ": non-finite entry at (" + std::to_string(r) +
                              ", " + std::to_string(c) + ")");
      }
      if (require_nonnegative && v < 0.0) {
        throw ValidationError(std::string(what) + ": negative entry at (" + std::to_string(r) +
                              ", " + std::to_string(c) + ")");
      }
    }
  }
}

}  // namespace ebi
