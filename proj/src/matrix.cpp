#include "hmmbw/matrix.hpp"

#include <algorithm>

#include "hmmbw/error.hpp"

namespace hmmbw {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n_cols = rows.empty() ? 0 : rows.front().size();
  Matrix m(rows.size(), n_cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != n_cols) {
      throw ValidationError("ragged matrix: row " + std::to_string(r) + " has " +
                            std::to_string(rows[r].size()) + " entries, expected " +
                            std::to_string(n_cols));
    }
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    auto src = row(r);
    out[r].assign(src.begin(), src.end());
  }
  return out;
}

}  // namespace hmmbw
