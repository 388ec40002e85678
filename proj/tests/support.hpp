#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "unarysim/numerics.hpp"
#include "unarysim/sparsity.hpp"

namespace testing_support {

using namespace unarysim;

/// Frobenius-norm relative error ||approx - exact|| / ||exact||.
inline double rms_relative_error(const Matrix& approx, const Matrix& exact) {
  double num = 0, den = 0;
  for (size_t i = 0; i < exact.data().size(); ++i) {
    const double d = static_cast<double>(approx.data()[i] - exact.data()[i]);
    num += d * d;
    den += static_cast<double>(exact.data()[i]) * static_cast<double>(exact.data()[i]);
  }
  return den == 0 ? std::sqrt(num) : std::sqrt(num / den);
}

/// Random operand whose column k magnitudes stay within a per-column limit
/// drawn from [0, 2^(w-1)], so column maxima (and bit sparsity) vary.
inline Matrix column_limited_matrix(int64_t rows, int64_t cols, BitWidth w, uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<int64_t> data(static_cast<size_t>(rows * cols));
  for (int64_t c = 0; c < cols; ++c) {
    const int64_t limit = static_cast<int64_t>(rng.next() % static_cast<uint64_t>(w.max_magnitude() + 1));
    for (int64_t r = 0; r < rows; ++r) {
      const int64_t span = 2 * limit + 1;
      int64_t v = static_cast<int64_t>(rng.next() % static_cast<uint64_t>(span)) - limit;
      if (v > w.max_value()) v = w.max_value();
      data[static_cast<size_t>(r * cols + c)] = v;
    }
  }
  return Matrix(rows, cols, w, std::move(data));
}

inline Tensor as_tensor(const Matrix& m) {
  return Tensor({m.rows(), m.cols()}, std::vector<int32_t>(m.data().begin(), m.data().end()));
}

}  // namespace testing_support
