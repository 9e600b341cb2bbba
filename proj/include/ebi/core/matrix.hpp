#pragma once

#include <cstddef>
#include <vector>

#include "ebi/core/ids.hpp"

namespace ebi {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const std::vector<double>& data() const { return data_; }

  Matrix transposed() const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// A square matrix indexed by (id_B row i, id_A column j). The tag keeps
// weights, posteriors and judgments from being mixed up at call sites.
template <class Tag>
struct BAMatrix {
  IdAxes axes;
  Matrix entries;

  double at(IdB b, IdA a) const { return entries(axes.index(b), axes.index(a)); }
  std::size_t size() const { return axes.size(); }

  bool operator==(const BAMatrix& other) const {
    return axes == other.axes && entries == other.entries;
  }
};

struct WeightTag {};
struct ConfidenceTag {};
struct JudgmentTag {};

// s_ij: reliability weight of pairing b_i with a_j.
using WeightMatrix = BAMatrix<WeightTag>;
// P(a_j | b_i); rows sum to one.
using ConfidenceMatrix = BAMatrix<ConfidenceTag>;
// J_ij = s_ij * P(a_j | b_i).
using JudgmentMatrix = BAMatrix<JudgmentTag>;

// Observed subjective degrees c_ji. Stored with id_A rows (j) and id_B
// columns (i), i.e. transposed relative to the BA matrices.
struct SubjectiveDegreeMatrix {
  IdAxes axes;
  Matrix entries;  // entries(j, i) = c_ji
  int call_count = 1;

  double at(IdA a, IdB b) const { return entries(axes.index(a), axes.index(b)); }
  std::size_t size() const { return axes.size(); }

  bool operator==(const SubjectiveDegreeMatrix& other) const {
    return axes == other.axes && entries == other.entries;
  }
};

// Throws ValidationError unless the matrix is square, matches the axes and
// contains only finite values. Negative entries are rejected when
// require_nonnegative is set.
void check_shape(const IdAxes& axes, const Matrix& m, const char* what,
                 bool require_nonnegative = true);

}  // namespace ebi
