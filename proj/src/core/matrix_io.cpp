#include "ebi/core/matrix_io.hpp"

#include <charconv>
#include <cmath>

#include "ebi/core/csv.hpp"
#include "ebi/core/error.hpp"

namespace ebi {

std::string format_double(double v) {
  if (std::isnan(v)) throw ValidationError("refusing to serialise NaN");
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error("double formatting failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ValidationError("not a number: '" + std::string(text) + "'");
  }
  if (std::isnan(v)) throw ValidationError("NaN in matrix file");
  return v;
}

namespace {

std::int64_t parse_label(const std::string& s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError("matrix CSV: bad id label '" + s + "'");
  }
  return v;
}

}  // namespace

std::string matrix_to_csv(const IdAxes& axes, const Matrix& ba) {
  check_shape(axes, ba, "matrix_to_csv", false);
  csv::Row header{"id_B\\id_A"};
  for (IdA a : axes.a_ids()) header.push_back(to_string(a));
  std::string out = csv::format_row(header);
  for (std::size_t i = 0; i < axes.size(); ++i) {
    csv::Row row{to_string(axes.b_ids()[i])};
    for (std::size_t j = 0; j < axes.size(); ++j) row.push_back(format_double(ba(i, j)));
    out += csv::format_row(row);
  }
  return out;
}

std::pair<IdAxes, Matrix> matrix_from_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw ValidationError("matrix CSV: empty file");
  const std::size_t n = rows.front().size() - 1;
  if (rows.size() != n + 1) {
    throw ValidationError("matrix CSV: expected " + std::to_string(n) + " data rows, found " +
                          std::to_string(rows.size() - 1));
  }
  std::vector<IdA> a_ids;
  for (std::size_t j = 1; j <= n; ++j) a_ids.push_back(IdA{parse_label(rows[0][j])});
  std::vector<IdB> b_ids;
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = rows[i + 1];
    if (row.size() != n + 1) {
      throw ValidationError("matrix CSV: row " + std::to_string(i + 2) + " has wrong width");
    }
    b_ids.push_back(IdB{parse_label(row[0])});
    for (std::size_t j = 0; j < n; ++j) m(i, j) = parse_double(row[j + 1]);
  }
  return {IdAxes(std::move(b_ids), std::move(a_ids)), std::move(m)};
}

std::string to_csv(const SubjectiveDegreeMatrix& c) {
  return matrix_to_csv(c.axes, c.entries.transposed());
}

}  // namespace ebi
