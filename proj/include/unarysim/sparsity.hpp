#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "unarysim/numerics.hpp"

namespace unarysim {

/// Integer tensor, row-major, any rank >= 1.
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<int32_t> data;

  Tensor() = default;
  Tensor(std::vector<int64_t> shape, std::vector<int32_t> data);

  size_t size() const { return data.size(); }
};

struct TileSpec {
  enum class Mode { kPerFeatureMap, kBlock };

  Mode mode = Mode::kBlock;
  int64_t block_rows = 32;
  int64_t block_cols = 32;

  /// One tile per slice along the leading (output-channel) dimension.
  static TileSpec per_feature_map() { return TileSpec{Mode::kPerFeatureMap, 0, 0}; }
  /// Tensor viewed as shape[0] x (product of the rest); partial edge blocks allowed.
  static TileSpec block(int64_t rows, int64_t cols);
  /// Feature-map tiles for rank >= 3 (conv) weights, 32x32 blocks otherwise.
  static TileSpec for_shape(const std::vector<int64_t>& shape);

  std::string to_string() const;
};

/// Fraction of elements equal to zero. Throws ValidationError on an empty tensor.
double word_sparsity(const Tensor& t);

/// Max |v| of every tile, in tile order.
std::vector<int64_t> tile_maxima(const Tensor& t, const TileSpec& tiles);

/// Mean over tiles of 1 - max|v| / 2^(w-1). Throws ValidationError when an
/// element is outside the width's range or the tiling is degenerate.
double bit_sparsity(const Tensor& t, BitWidth width, const TileSpec& tiles);

/// Keeps the top `target` bits of `source_bits`-bit integers (arithmetic shift
/// right by source_bits - target). Target must be 2, 4 or 8.
Tensor msb_truncate(const Tensor& t, int target_width, int source_bits = 32);

// --- Tensor bundles ------------------------------------------------------

enum class TensorRole { kWeight, kActivation };
enum class TensorDtype { kInt8, kInt32 };

struct LayerRecord {
  std::string name;
  TensorRole role = TensorRole::kWeight;
  std::vector<int64_t> shape;
  TensorDtype dtype = TensorDtype::kInt8;
  std::string data_path;  // relative to the bundle directory
  std::optional<std::string> sha256;
};

/// manifest.json plus one little-endian row-major .bin blob per layer.
class TensorBundle {
 public:
  /// Reads and validates `dir/manifest.json`. Throws IoError for unreadable or
  /// malformed manifests and ValidationError for inconsistent records.
  static TensorBundle load(const std::filesystem::path& dir);

  /// Writes blobs and a manifest (with sha256 per blob) into `dir`.
  static void write(const std::filesystem::path& dir,
                    const std::vector<std::pair<LayerRecord, Tensor>>& layers);

  const std::vector<LayerRecord>& layers() const { return layers_; }
  const std::filesystem::path& root() const { return root_; }

  /// Reads one blob, checking its byte length and (when recorded) its sha256.
  Tensor read(const LayerRecord& layer) const;

 private:
  std::filesystem::path root_;
  std::vector<LayerRecord> layers_;
};

std::string_view role_name(TensorRole r);
std::string_view dtype_name(TensorDtype d);
size_t dtype_size(TensorDtype d);
std::string sha256_hex(const void* data, size_t size);

// --- Profiling -----------------------------------------------------------

struct ProfileOptions {
  BitWidth width{8};
  /// Unset: TileSpec::for_shape per layer.
  std::optional<TileSpec> tiles;
  /// MSB-truncate to `width` (required for int32 layers and for int8 below 8 bits).
  bool truncate = false;
  /// Weight the model-level means by element count instead of averaging layers.
  bool weighted = false;
  unsigned jobs = 1;
};

struct LayerSparsity {
  std::string name;
  TensorRole role = TensorRole::kWeight;
  int width = 8;
  double word_sparsity = 0.0;
  double bit_sparsity = 0.0;
  TileSpec tiles;
  int64_t tile_count = 0;
  int64_t elements = 0;
};

struct SparsityReport {
  std::vector<LayerSparsity> layers;  // sorted by name
  int width = 8;
  double word_sparsity = 0.0;
  double bit_sparsity = 0.0;
  int64_t tile_count = 0;
};

LayerSparsity profile_tensor(const std::string& name, TensorRole role, const Tensor& t,
                             TensorDtype dtype, const ProfileOptions& options);
SparsityReport profile_bundle(const TensorBundle& bundle, const ProfileOptions& options);
/// Unweighted (or element-weighted) means over already-profiled layers.
SparsityReport summarize(std::vector<LayerSparsity> layers, int width, bool weighted);

void write_sparsity_csv(std::ostream& out, const SparsityReport& report);
void write_sparsity_markdown(std::ostream& out, const SparsityReport& report);

}  // namespace unarysim
