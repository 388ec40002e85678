#include "doctest.h"

#include <numeric>

#include "oracles/oracles.hpp"
#include "unarysim/numerics.hpp"

using namespace unarysim;

namespace {

oracle::Grid to_grid(const Matrix& m) {
  oracle::Grid g(static_cast<size_t>(m.rows()), std::vector<int64_t>(static_cast<size_t>(m.cols())));
  for (int64_t r = 0; r < m.rows(); ++r)
    for (int64_t c = 0; c < m.cols(); ++c) g[r][c] = m.at(r, c);
  return g;
}

Matrix add(const Matrix& x, const Matrix& y, BitWidth w) {
  std::vector<int64_t> d(x.data().size());
  for (size_t i = 0; i < d.size(); ++i) d[i] = x.data()[i] + y.data()[i];
  return Matrix(x.rows(), x.cols(), w, d);
}

Matrix widen(const Matrix& m, BitWidth w) {
  return Matrix(m.rows(), m.cols(), w, {m.data().begin(), m.data().end()});
}

}  // namespace

TEST_CASE("bit width range") {
  BitWidth w(8);
  CHECK(w.max_magnitude() == 128);
  CHECK(w.min_value() == -128);
  CHECK(w.max_value() == 127);
  CHECK(BitWidth(2).min_value() == -2);
  CHECK(BitWidth(2).max_value() == 1);
  CHECK_THROWS_AS(BitWidth(1), ValidationError);
  CHECK_THROWS_AS(BitWidth(9), ValidationError);
}

TEST_CASE("matrix rejects out-of-range elements and bad shapes") {
  CHECK_THROWS_AS(Matrix(2, 2, BitWidth(2), {0, 1, 2, 0}), ValidationError);
  CHECK_THROWS_AS(Matrix(0, 2, BitWidth(4)), ValidationError);
  CHECK_THROWS_AS(Matrix(2, 2, BitWidth(4), {1, 2, 3}), ValidationError);
  Matrix m(2, 2, BitWidth(4));
  CHECK_THROWS_AS(m.set(0, 0, 8), ValidationError);
  m.set(0, 0, -8);
  CHECK(m.at(0, 0) == -8);
  CHECK_THROWS_AS(GemmShape(1, 0, 1), ValidationError);
}

TEST_CASE("exact_gemm identity and zero") {
  const BitWidth w(8);
  const Matrix b(2, 2, w, {5, -7, 127, -128});
  CHECK(exact_gemm(Matrix::identity(2, w), b) == Matrix(2, 2, std::nullopt, {5, -7, 127, -128}));
  const Matrix z(2, 2, w);
  const Matrix zc = exact_gemm(z, b);
  for (int64_t v : zc.data()) CHECK(v == 0);
}

TEST_CASE("exact_gemm matches an independent triple loop") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix a = random_matrix(4, 4, BitWidth(4), 100 + seed);
    const Matrix b = random_matrix(4, 4, BitWidth(4), 200 + seed);
    const oracle::Grid expect = oracle::triple_loop(to_grid(a), to_grid(b));
    CHECK(to_grid(exact_gemm(a, b)) == expect);
  }
}

TEST_CASE("exact_gemm errors") {
  const Matrix a(2, 3, BitWidth(4));
  CHECK_THROWS_AS(exact_gemm(a, Matrix(2, 2, BitWidth(4))), ValidationError);
  CHECK_THROWS_AS(exact_gemm(a, Matrix(3, 2, BitWidth(8))), ValidationError);
}

TEST_CASE("exact_gemm is bilinear and fixes the identity") {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    // 3-bit halves keep B1 + B2 inside the 4-bit range.
    const BitWidth w(4);
    const Matrix a = random_matrix(3, 5, w, seed);
    const Matrix b1 = widen(random_matrix(5, 4, BitWidth(3), seed + 1), w);
    const Matrix b2 = widen(random_matrix(5, 4, BitWidth(3), seed + 2), w);
    const Matrix lhs = exact_gemm(a, add(b1, b2, w));
    const Matrix r1 = exact_gemm(a, b1), r2 = exact_gemm(a, b2);
    for (size_t i = 0; i < lhs.data().size(); ++i) CHECK(lhs.data()[i] == r1.data()[i] + r2.data()[i]);

    const Matrix sq = random_matrix(4, 4, w, seed + 3);
    CHECK(exact_gemm(sq, Matrix::identity(4, w)) == Matrix(4, 4, std::nullopt,
                                                            {sq.data().begin(), sq.data().end()}));
    CHECK(exact_gemm(Matrix::identity(4, w), sq) == Matrix(4, 4, std::nullopt,
                                                            {sq.data().begin(), sq.data().end()}));
  }
}

TEST_CASE("result magnitude bound N * 2^(2w-2) holds at the extremes") {
  for (int bits = 2; bits <= 8; ++bits) {
    const BitWidth w(bits);
    const int64_t n = 64;
    const Matrix a = Matrix::filled(2, n, w, w.min_value());
    const Matrix c = exact_gemm(a, Matrix::filled(n, 2, w, w.min_value()));
    const int64_t bound = n << (2 * bits - 2);
    CHECK(c.at(0, 0) == bound);
    for (uint64_t seed = 0; seed < 10; ++seed) {
      const Matrix r = exact_gemm(random_matrix(4, n, w, seed), random_matrix(n, 4, w, seed + 99));
      for (int64_t v : r.data()) CHECK(std::abs(v) <= bound);
    }
  }
}

TEST_CASE("random_matrix range, determinism and frozen fixtures") {
  const Matrix small = random_matrix(2, 2, BitWidth(2), 1);
  for (int64_t v : small.data()) CHECK((v >= -2 && v <= 1));
  // Values from an independent SplitMix64 implementation.
  CHECK(small == Matrix(2, 2, std::nullopt, {0, 0, 1, -1}));
  CHECK(random_matrix(3, 3, BitWidth(8), 42) ==
        Matrix(3, 3, std::nullopt, {61, -88, -57, -40, -119, 94, -73, 76, -41}));
  CHECK(random_matrix(5, 7, BitWidth(6), 9) == random_matrix(5, 7, BitWidth(6), 9));
  CHECK_FALSE(random_matrix(5, 7, BitWidth(6), 9) == random_matrix(5, 7, BitWidth(6), 10));

  const Matrix big = random_matrix(16, 16, BitWidth(8), 7);
  const double mean = std::accumulate(big.data().begin(), big.data().end(), 0.0) / 256.0;
  CHECK(std::abs(mean - (-0.5)) <= 6.0);
}

TEST_CASE("random_matrix covers the full range") {
  const Matrix m = random_matrix(64, 64, BitWidth(3), 5);
  std::vector<int> hist(8, 0);
  for (int64_t v : m.data()) hist[static_cast<size_t>(v + 4)]++;
  for (int h : hist) CHECK(h > 0);
}
