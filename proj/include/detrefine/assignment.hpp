#pragma once

#include <limits>
#include <utility>
#include <vector>

namespace detrefine {

// Cost of pairing one row with one column. FORBIDDEN marks pairs that must
// never be matched; the solver treats them as absent edges.
inline constexpr double FORBIDDEN = std::numeric_limits<double>::infinity();

// Dense rectangular cost matrix, row-major.
class CostMatrix {
 public:
  CostMatrix(int rows, int cols)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, 0.0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double at(int r, int c) const { return data_[index(r, c)]; }
  void set(int r, int c, double v) { data_[index(r, c)] = v; }
  void forbid(int r, int c) { data_[index(r, c)] = FORBIDDEN; }

 private:
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * cols_ + c;
  }

  int rows_;
  int cols_;
  std::vector<double> data_;
};

// Minimum-cost assignment over the finite entries of `cost`. Returns the
// matched (row, col) pairs sorted by row. Rows or columns left over in a
// rectangular problem, and pairs whose only option is FORBIDDEN, are simply
// absent from the result.
//
// Ties between equally cheap assignments resolve to the lexicographically
// smallest matching when read as a sorted (row, col) pair list, so equal
// inputs always produce identical output.
std::vector<std::pair<int, int>> solve(const CostMatrix& cost);

}  // namespace detrefine
