#pragma once

#include <string>
#include <string_view>
#include <utility>

#include "ebi/core/matrix.hpp"

namespace ebi {

// Shortest decimal that parses back to the identical double.
std::string format_double(double v);
double parse_double(std::string_view text);

// CSV layout: header row of id_A labels, first column of id_B labels, cell
// (i, j) in BA orientation. Subjective degree matrices are transposed on the
// way in and out so every matrix file shares this layout.
std::string matrix_to_csv(const IdAxes& axes, const Matrix& ba_entries);
std::pair<IdAxes, Matrix> matrix_from_csv(std::string_view text);

template <class Tag>
std::string to_csv(const BAMatrix<Tag>& m) {
  return matrix_to_csv(m.axes, m.entries);
}
std::string to_csv(const SubjectiveDegreeMatrix& c);

template <class M>
M matrix_from_csv_as(std::string_view text) {
  auto [axes, entries] = matrix_from_csv(text);
  M m;
  m.axes = std::move(axes);
  if constexpr (requires { m.call_count; }) {
    m.entries = entries.transposed();
  } else {
    m.entries = std::move(entries);
  }
  return m;
}

}  // namespace ebi
