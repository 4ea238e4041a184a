#include "detrefine/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace detrefine {
namespace {

// Two-component cost: `primary` carries the real assignment cost, `tiebreak`
// orders equally cheap solutions. Stored and compared lexicographically.
//
// Tiebreak values are -2^-k for distinct small k per cell, so any subset sum
// is exact in double arithmetic and distinct subsets never collide. The
// minimum-tiebreak solution among minimum-primary solutions is therefore the
// one that grabs the smallest (row, col) ranks, i.e. the lexicographically
// smallest matching.
struct PairCost {
  double primary = 0.0;
  double tiebreak = 0.0;

  PairCost operator+(const PairCost& o) const {
    return {primary + o.primary, tiebreak + o.tiebreak};
  }
  PairCost operator-(const PairCost& o) const {
    return {primary - o.primary, tiebreak - o.tiebreak};
  }
  bool operator<(const PairCost& o) const {
    if (primary != o.primary) return primary < o.primary;
    return tiebreak < o.tiebreak;
  }
};

}  // namespace

std::vector<std::pair<int, int>> solve(const CostMatrix& cost) {
  const int rows = cost.rows();
  const int cols = cost.cols();
  if (rows == 0 || cols == 0) return {};

  // Validate and find the scale for the padding cost. Forbidden and padded
  // cells share one finite sentinel larger than any achievable real total,
  // so the solver prefers leaving rows unmatched over using them.
  double max_abs = 1.0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double v = cost.at(r, c);
      if (std::isnan(v)) throw std::invalid_argument("assignment: NaN cost");
      if (v != FORBIDDEN) max_abs = std::max(max_abs, std::abs(v));
    }
  }
  const int n = std::max(rows, cols);
  const double big = max_abs * (n + 1) + 1.0;

  auto cell = [&](int r, int c) -> PairCost {
    if (r >= rows || c >= cols) return {big, 0.0};
    const double v = cost.at(r, c);
    if (v == FORBIDDEN) return {big, 0.0};
    const int rank = std::min(r * cols + c, 1074);
    return {v, -std::ldexp(1.0, -rank)};
  };

  // Jonker-Volgenant shortest augmenting path with potentials, 1-indexed
  // internal arrays. O(n^3) over the padded square matrix.
  std::vector<PairCost> u(n + 1), v(n + 1);
  std::vector<int> match_col(n + 1, 0);  // col -> row matched to it
  std::vector<int> way(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    match_col[0] = i;
    int j0 = 0;
    std::vector<PairCost> minv(n + 1, PairCost{std::numeric_limits<double>::infinity(), 0.0});
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match_col[j0];
      PairCost delta{std::numeric_limits<double>::infinity(), 0.0};
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const PairCost cur = cell(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match_col[j]] = u[match_col[j]] + delta;
          v[j] = v[j] - delta;
        } else {
          minv[j] = minv[j] - delta;
        }
      }
      j0 = j1;
    } while (match_col[j0] != 0);
    do {
      const int j1 = way[j0];
      match_col[j0] = match_col[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<std::pair<int, int>> result;
  for (int j = 1; j <= n; ++j) {
    const int i = match_col[j];
    if (i == 0) continue;
    const int r = i - 1;
    const int c = j - 1;
    if (r >= rows || c >= cols) continue;           // padding
    if (cost.at(r, c) == FORBIDDEN) continue;       // unusable pair
    result.emplace_back(r, c);
  }
  std::sort(result.begin(), result.end());
  return result;
}

}  // namespace detrefine
