#include "doctest.h"

#include <fstream>
#include <limits>

#include "support.hpp"
#include "temp_dir.hpp"
#include "unarysim/engines.hpp"
#include "unarysim/sparsity.hpp"

using namespace unarysim;

namespace {

Tensor filled(std::vector<int64_t> shape, int32_t v) {
  int64_t n = 1;
  for (auto d : shape) n *= d;
  return Tensor(shape, std::vector<int32_t>(static_cast<size_t>(n), v));
}

LayerRecord record(const std::string& name, std::vector<int64_t> shape, TensorDtype dtype,
                   TensorRole role = TensorRole::kWeight) {
  LayerRecord r;
  r.name = name;
  r.role = role;
  r.shape = std::move(shape);
  r.dtype = dtype;
  r.data_path = name + ".bin";
  return r;
}

}  // namespace

TEST_CASE("tensor validation") {
  CHECK_THROWS_AS(Tensor({}, {}), ValidationError);
  CHECK_THROWS_AS(Tensor({2, 0}, {}), ValidationError);
  CHECK_THROWS_AS(Tensor({2, 2}, {1, 2, 3}), ValidationError);
}

TEST_CASE("word_sparsity") {
  CHECK(word_sparsity(filled({10, 10}, 0)) == 1.0);
  CHECK(word_sparsity(filled({10, 10}, 3)) == 0.0);
  std::vector<int32_t> data(100, 5);
  for (int i = 0; i < 19; ++i) data[static_cast<size_t>(i * 5)] = 0;
  CHECK(word_sparsity(Tensor({100}, data)) == doctest::Approx(0.19));
  CHECK_THROWS_AS(word_sparsity(Tensor()), ValidationError);
}

TEST_CASE("bit_sparsity") {
  CHECK(bit_sparsity(filled({8, 8}, 0), BitWidth(8), TileSpec::block(4, 4)) == 1.0);

  // Every tile's max magnitude is 1 at 2 bits (capacity 2).
  std::vector<int32_t> d(64);
  for (size_t i = 0; i < d.size(); ++i) d[i] = (i % 3 == 0) ? -1 : (i % 3 == 1 ? 0 : 1);
  CHECK(bit_sparsity(Tensor({8, 8}, d), BitWidth(2), TileSpec::block(4, 4)) == 0.5);

  std::vector<int32_t> t(16, 3);
  t[7] = -96;
  CHECK(bit_sparsity(Tensor({4, 4}, t), BitWidth(8), TileSpec::block(4, 4)) == 0.25);

  CHECK(bit_sparsity(filled({4, 4}, -128), BitWidth(8), TileSpec::block(2, 2)) == 0.0);
  CHECK_THROWS_AS(bit_sparsity(filled({4, 4}, 200), BitWidth(8), TileSpec::block(2, 2)), ValidationError);
  CHECK_THROWS_AS(TileSpec::block(0, 4), ValidationError);
}

TEST_CASE("tiling") {
  // 2 x 3 x 2 conv weight: two feature maps.
  const Tensor conv({2, 3, 2}, {1, -5, 2, 0, 0, 3, -7, 1, 1, 1, 0, 0});
  CHECK(tile_maxima(conv, TileSpec::per_feature_map()) == std::vector<int64_t>{5, 7});
  CHECK(TileSpec::for_shape({2, 3, 3, 3}).mode == TileSpec::Mode::kPerFeatureMap);
  CHECK(TileSpec::for_shape({64, 64}).mode == TileSpec::Mode::kBlock);
  CHECK(TileSpec::for_shape({64, 64}).block_rows == 32);

  // 3 x 5 with 2 x 2 blocks: partial edge blocks, row-major tile order.
  std::vector<int32_t> d(15);
  for (int i = 0; i < 15; ++i) d[static_cast<size_t>(i)] = i;
  CHECK(tile_maxima(Tensor({3, 5}, d), TileSpec::block(2, 2)) == std::vector<int64_t>{6, 8, 9, 11, 13, 14});
  CHECK(tile_maxima(Tensor({4}, {1, -3, 2, 0}), TileSpec::block(1, 2)) == std::vector<int64_t>{3, 2});
}

TEST_CASE("bit_sparsity is antitone in tile maxima") {
  SplitMix64 rng(77);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<int32_t> d(64);
    for (auto& v : d) v = static_cast<int32_t>(rng.next() % 128) - 64;
    const Tensor before({8, 8}, d);
    const size_t idx = rng.next() % 64;
    d[idx] = (rng.next() & 1) ? 127 : -128;
    const Tensor after({8, 8}, d);
    CHECK(bit_sparsity(after, BitWidth(8), TileSpec::block(4, 4)) <=
          bit_sparsity(before, BitWidth(8), TileSpec::block(4, 4)));
  }
}

TEST_CASE("msb_truncate") {
  for (int w : {2, 4, 8}) CHECK(msb_truncate(Tensor({1}, {0}), w).data[0] == 0);
  CHECK(msb_truncate(Tensor({1}, {std::numeric_limits<int32_t>::min()}), 8).data[0] == -128);
  CHECK(msb_truncate(Tensor({1}, {0x40000000}), 4).data[0] == 4);
  CHECK(msb_truncate(Tensor({1}, {std::numeric_limits<int32_t>::max()}), 2).data[0] == 1);
  CHECK(msb_truncate(Tensor({1}, {-128}), 4, 8).data[0] == -8);
  CHECK(msb_truncate(Tensor({1}, {127}), 8, 8).data[0] == 127);
  CHECK_THROWS_AS(msb_truncate(Tensor({1}, {0}), 3), ValidationError);
  CHECK_THROWS_AS(msb_truncate(Tensor({1}, {0}), 16), ValidationError);
}

TEST_CASE("msb_truncate preserves sign and order") {
  SplitMix64 rng(5);
  for (int w : {2, 4, 8}) {
    const BitWidth bw(w);
    for (int i = 0; i < 500; ++i) {
      const auto x = static_cast<int32_t>(static_cast<uint32_t>(rng.next()));
      const auto y = static_cast<int32_t>(static_cast<uint32_t>(rng.next()));
      const Tensor t = msb_truncate(Tensor({2}, {x, y}), w);
      CHECK(bw.contains(t.data[0]));
      if (x < 0) CHECK(t.data[0] < 0);
      if (x >= 0) CHECK(t.data[0] >= 0);
      if (x <= y) CHECK(t.data[0] <= t.data[1]);
    }
  }
}

TEST_CASE("profile_tensor dtype rules") {
  ProfileOptions opts;
  CHECK_THROWS_AS(profile_tensor("x", TensorRole::kWeight, filled({4, 4}, 0), TensorDtype::kInt32, opts),
                  ValidationError);
  opts.width = BitWidth(4);
  CHECK_THROWS_AS(profile_tensor("x", TensorRole::kWeight, filled({4, 4}, 0), TensorDtype::kInt8, opts),
                  ValidationError);
  opts.truncate = true;
  const LayerSparsity s = profile_tensor("x", TensorRole::kWeight, filled({4, 4}, -128), TensorDtype::kInt8, opts);
  CHECK(s.bit_sparsity == 0.0);
  CHECK(s.width == 4);
}

TEST_CASE("summaries") {
  LayerSparsity a, b;
  a.name = "b_layer";
  a.bit_sparsity = 0.4;
  a.word_sparsity = 0.1;
  a.elements = 100;
  a.tile_count = 2;
  b.name = "a_layer";
  b.bit_sparsity = 0.5;
  b.word_sparsity = 0.3;
  b.elements = 300;
  b.tile_count = 3;
  const SparsityReport r = summarize({a, b}, 8, false);
  CHECK(r.bit_sparsity == doctest::Approx(0.45));
  CHECK(r.word_sparsity == doctest::Approx(0.2));
  CHECK(r.layers[0].name == "a_layer");
  CHECK(r.tile_count == 5);
  CHECK(summarize({a, b}, 8, true).bit_sparsity == doctest::Approx(0.475));
  CHECK_THROWS_AS(summarize({}, 8, false), ValidationError);
}

TEST_CASE("bundle write/read round trip and profiling") {
  TempDir dir;
  SplitMix64 rng(8);
  // CNN-like conv weight: every feature map has max |v| = 70.
  std::vector<int32_t> conv(16 * 3 * 3 * 3);
  for (auto& v : conv) v = static_cast<int32_t>(rng.next() % 121) - 60;
  for (int f = 0; f < 16; ++f) conv[static_cast<size_t>(f * 27 + f % 27)] = (f % 2) ? 70 : -70;
  std::vector<int32_t> fc(64 * 64);
  for (auto& v : fc) v = static_cast<int32_t>(rng.next() % 141) - 70;
  for (int bi = 0; bi < 2; ++bi)
    for (int bj = 0; bj < 2; ++bj) fc[static_cast<size_t>((bi * 32 + 5) * 64 + bj * 32 + 9)] = 70;
  std::vector<int32_t> big(256);
  for (auto& v : big) v = static_cast<int32_t>(static_cast<uint32_t>(rng.next()));

  TensorBundle::write(dir.path(), {{record("conv1", {16, 3, 3, 3}, TensorDtype::kInt8), Tensor({16, 3, 3, 3}, conv)},
                                   {record("fc", {64, 64}, TensorDtype::kInt8), Tensor({64, 64}, fc)},
                                   {record("q", {16, 16}, TensorDtype::kInt32, TensorRole::kActivation),
                                    Tensor({16, 16}, big)}});
  const TensorBundle bundle = TensorBundle::load(dir.path());
  REQUIRE(bundle.layers().size() == 3);
  CHECK(bundle.read(bundle.layers()[0]).data == conv);
  CHECK(bundle.read(bundle.layers()[2]).data == big);
  CHECK(bundle.layers()[2].role == TensorRole::kActivation);
  CHECK(bundle.layers()[0].sha256.has_value());

  ProfileOptions opts;
  opts.truncate = true;
  const SparsityReport r = profile_bundle(bundle, opts);
  REQUIRE(r.layers.size() == 3);
  CHECK(r.layers[0].name == "conv1");
  CHECK(r.layers[0].tile_count == 16);
  CHECK(r.layers[0].bit_sparsity == doctest::Approx(1.0 - 70.0 / 128.0));
  CHECK(r.layers[1].tile_count == 4);
  CHECK(r.layers[1].bit_sparsity == doctest::Approx(0.453125));

  opts.jobs = 4;
  const SparsityReport parallel = profile_bundle(bundle, opts);
  for (size_t i = 0; i < r.layers.size(); ++i) {
    CHECK(parallel.layers[i].name == r.layers[i].name);
    CHECK(parallel.layers[i].bit_sparsity == r.layers[i].bit_sparsity);
  }

  std::ostringstream csv;
  write_sparsity_csv(csv, r);
  CHECK(csv.str().rfind("layer,role,width,word_sparsity,bit_sparsity,tiles\n", 0) == 0);
  CHECK(csv.str().find("\nMODEL,all,8,") != std::string::npos);
  std::ostringstream md;
  write_sparsity_markdown(md, r);
  CHECK(md.str().find("| Layer | Word (%) 8 bits | Bit (%) 8 bits |") == 0);
}

TEST_CASE("all-zero single-layer bundle") {
  TempDir dir;
  TensorBundle::write(dir.path(), {{record("zeros", {4, 8}, TensorDtype::kInt8), filled({4, 8}, 0)}});
  const SparsityReport r = profile_bundle(TensorBundle::load(dir.path()), ProfileOptions{});
  CHECK(r.word_sparsity == 1.0);
  CHECK(r.bit_sparsity == 1.0);
}

TEST_CASE("bundle errors name the offending layer") {
  TempDir dir;
  TensorBundle::write(dir.path(), {{record("w", {4, 4}, TensorDtype::kInt8), filled({4, 4}, 1)}});
  {
    std::ofstream blob(dir.path() / "w.bin", std::ios::binary | std::ios::app);
    blob << 'x';
  }
  const TensorBundle b = TensorBundle::load(dir.path());
  try {
    b.read(b.layers()[0]);
    FAIL("expected a size mismatch");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("'w'") != std::string::npos);
  }

  // Same length, different bytes: checksum mismatch.
  {
    std::ofstream blob(dir.path() / "w.bin", std::ios::binary | std::ios::trunc);
    blob << std::string(16, '\2');
  }
  CHECK_THROWS_AS(b.read(b.layers()[0]), ValidationError);

  TempDir bad;
  {
    std::ofstream m(bad.path() / "manifest.json");
    m << "{\"layers\": [ {\"name\": 1 } ]}";
  }
  CHECK_THROWS_AS(TensorBundle::load(bad.path()), IoError);
  {
    std::ofstream m(bad.path() / "manifest.json");
    m << "not json";
  }
  CHECK_THROWS_AS(TensorBundle::load(bad.path()), IoError);
  CHECK_THROWS_AS(TensorBundle::load(bad.path() / "missing"), IoError);

  TempDir empty;
  {
    std::ofstream m(empty.path() / "manifest.json");
    m << "{\"version\": 1, \"layers\": []}";
  }
  CHECK_THROWS_AS(profile_bundle(TensorBundle::load(empty.path()), ProfileOptions{}), ValidationError);
}

TEST_CASE("column-tile bit sparsity closes the tubGEMM latency law") {
  for (uint64_t seed = 0; seed < 50; ++seed) {
    const BitWidth w(2 + static_cast<int>(seed % 7));
    const int64_t n = 16;
    const Matrix a = testing_support::column_limited_matrix(8, n, w, seed);
    const EngineResult r = run_tubgemm(a, random_matrix(n, 4, w, seed + 1));
    const double b_spa = bit_sparsity(testing_support::as_tensor(a), w, TileSpec::block(8, 1));
    const double predicted = static_cast<double>(r.wc_cycles) * (1.0 - b_spa);
    CHECK(std::abs(static_cast<double>(r.cycles) - predicted) <= n / 2.0 + 1e-9);
  }
}
