#include "unarysim/numerics.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace unarysim {

BitWidth::BitWidth(int bits) : bits_(bits) {
  if (bits < kMin || bits > kMax) {
    throw ValidationError("bit width must be in [2, 8], got " + std::to_string(bits));
  }
}

GemmShape::GemmShape(int64_t m, int64_t n_common, int64_t p) : m(m), n_common(n_common), p(p) {
  if (m < 1 || n_common < 1 || p < 1) {
    throw ValidationError("GEMM shape dimensions must be >= 1");
  }
}

Matrix::Matrix(int64_t rows, int64_t cols, std::optional<BitWidth> width)
    : Matrix(rows, cols, width,
             std::vector<int64_t>(static_cast<size_t>(rows > 0 && cols > 0 ? rows * cols : 0), 0)) {}

Matrix::Matrix(int64_t rows, int64_t cols, std::optional<BitWidth> width, std::vector<int64_t> data)
    : rows_(rows), cols_(cols), width_(width), data_(std::move(data)) {
  if (rows < 1 || cols < 1) {
    throw ValidationError("matrix dimensions must be >= 1");
  }
  if (data_.size() != static_cast<size_t>(rows * cols)) {
    throw ValidationError("matrix data size does not match " + std::to_string(rows) + "x" +
                          std::to_string(cols));
  }
  if (width_) {
    for (int64_t v : data_) {
      if (!width_->contains(v)) {
        throw ValidationError("element " + std::to_string(v) + " outside " +
                              std::to_string(width_->bits()) + "-bit range");
      }
    }
  }
}

Matrix Matrix::identity(int64_t n, BitWidth width) {
  Matrix m(n, n, width);
  for (int64_t i = 0; i < n; ++i) m.set(i, i, 1);
  return m;
}

Matrix Matrix::filled(int64_t rows, int64_t cols, BitWidth width, int64_t value) {
  return Matrix(rows, cols, width, std::vector<int64_t>(static_cast<size_t>(rows * cols), value));
}

void Matrix::set(int64_t r, int64_t c, int64_t v) {
  if (r < 0 || r >= rows_ || c < 0 || c >= cols_) {
    throw ValidationError("matrix index out of bounds");
  }
  if (width_ && !width_->contains(v)) {
    throw ValidationError("element " + std::to_string(v) + " outside " +
                          std::to_string(width_->bits()) + "-bit range");
  }
  data_[index(r, c)] = v;
}

Matrix Matrix::transposed() const {
  std::vector<int64_t> out(data_.size());
  for (int64_t r = 0; r < rows_; ++r)
    for (int64_t c = 0; c < cols_; ++c) out[static_cast<size_t>(c * rows_ + r)] = at(r, c);
  return Matrix(cols_, rows_, width_, std::move(out));
}

int64_t Matrix::column_max_magnitude(int64_t c) const {
  int64_t m = 0;
  for (int64_t r = 0; r < rows_; ++r) m = std::max(m, std::abs(at(r, c)));
  return m;
}

int64_t Matrix::row_max_magnitude(int64_t r) const {
  int64_t m = 0;
  for (int64_t c = 0; c < cols_; ++c) m = std::max(m, std::abs(at(r, c)));
  return m;
}

uint64_t SplitMix64::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void check_conformable(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ValidationError("dimension mismatch: A is " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + ", B is " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()));
  }
  if (a.width() != b.width()) {
    throw ValidationError("operand bit widths differ");
  }
}

Matrix exact_gemm(const Matrix& a, const Matrix& b) {
  check_conformable(a, b);
  std::vector<int64_t> out(static_cast<size_t>(a.rows() * b.cols()), 0);
  for (int64_t i = 0; i < a.rows(); ++i) {
    for (int64_t k = 0; k < a.cols(); ++k) {
      const int64_t aik = a.at(i, k);
      if (aik == 0) continue;
      for (int64_t j = 0; j < b.cols(); ++j) {
        out[static_cast<size_t>(i * b.cols() + j)] += aik * b.at(k, j);
      }
    }
  }
  return Matrix(a.rows(), b.cols(), std::nullopt, std::move(out));
}

Matrix random_matrix(int64_t rows, int64_t cols, BitWidth width, uint64_t seed) {
  if (rows < 1 || cols < 1) throw ValidationError("matrix dimensions must be >= 1");
  SplitMix64 rng(seed);
  std::vector<int64_t> data(static_cast<size_t>(rows * cols));
  const int shift = 64 - width.bits();
  for (auto& v : data) {
    v = static_cast<int64_t>(rng.next() >> shift) - width.max_magnitude();
  }
  return Matrix(rows, cols, width, std::move(data));
}

uint64_t checksum(const Matrix& m) {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  mix(static_cast<uint64_t>(m.rows()));
  mix(static_cast<uint64_t>(m.cols()));
  for (int64_t v : m.data()) mix(static_cast<uint64_t>(v));
  return h;
}

}  // namespace unarysim
