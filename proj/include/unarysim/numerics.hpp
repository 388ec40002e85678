#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "unarysim/error.hpp"

namespace unarysim {

/// Operand bit width, 2..8 bits, two's complement.
class BitWidth {
 public:
  static constexpr int kMin = 2;
  static constexpr int kMax = 8;

  explicit BitWidth(int bits);

  int bits() const { return bits_; }
  /// 2^(w-1): the magnitude of the most negative value, and the temporal stream capacity.
  int64_t max_magnitude() const { return int64_t{1} << (bits_ - 1); }
  int64_t min_value() const { return -max_magnitude(); }
  int64_t max_value() const { return max_magnitude() - 1; }
  bool contains(int64_t v) const { return v >= min_value() && v <= max_value(); }

  friend bool operator==(BitWidth, BitWidth) = default;

 private:
  int bits_;
};

struct GemmShape {
  int64_t m;
  int64_t n_common;
  int64_t p;

  GemmShape(int64_t m, int64_t n_common, int64_t p);
  friend bool operator==(const GemmShape&, const GemmShape&) = default;
};

/// Dense row-major integer matrix. Operand matrices carry a bit width and every
/// element is checked against it; result matrices carry no width and hold
/// exact 64-bit values.
class Matrix {
 public:
  Matrix(int64_t rows, int64_t cols, std::optional<BitWidth> width = std::nullopt);
  Matrix(int64_t rows, int64_t cols, std::optional<BitWidth> width, std::vector<int64_t> data);

  static Matrix identity(int64_t n, BitWidth width);
  static Matrix filled(int64_t rows, int64_t cols, BitWidth width, int64_t value);

  int64_t rows() const { return rows_; }
  int64_t cols() const { return cols_; }
  const std::optional<BitWidth>& width() const { return width_; }

  int64_t at(int64_t r, int64_t c) const { return data_[index(r, c)]; }
  /// Range-checked write; throws ValidationError if the value does not fit the width.
  void set(int64_t r, int64_t c, int64_t v);
  std::span<const int64_t> data() const { return data_; }

  Matrix transposed() const;
  /// Max |element| over column c.
  int64_t column_max_magnitude(int64_t c) const;
  int64_t row_max_magnitude(int64_t r) const;

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  size_t index(int64_t r, int64_t c) const {
    return static_cast<size_t>(r * cols_ + c);
  }

  int64_t rows_;
  int64_t cols_;
  std::optional<BitWidth> width_;
  std::vector<int64_t> data_;
};

/// SplitMix64. Fixed constants so fixtures are reproducible across implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}
  uint64_t next();

 private:
  uint64_t state_;
};

/// Throws ValidationError unless a.cols == b.rows and both operands share a width.
void check_conformable(const Matrix& a, const Matrix& b);

/// C = A * B with exact integer accumulation.
Matrix exact_gemm(const Matrix& a, const Matrix& b);

/// Uniform elements over the full two's-complement range of `width`.
/// Element = (top w bits of the next SplitMix64 output) - 2^(w-1).
Matrix random_matrix(int64_t rows, int64_t cols, BitWidth width, uint64_t seed);

/// FNV-1a over the element values; used as a compact result fingerprint.
uint64_t checksum(const Matrix& m);

}  // namespace unarysim
