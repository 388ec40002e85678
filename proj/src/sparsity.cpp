#include "unarysim/sparsity.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <ostream>

#include "unarysim/format.hpp"
#include "unarysim/parallel.hpp"

namespace unarysim {
namespace {

struct View2d {
  int64_t rows;
  int64_t cols;
};

View2d as_2d(const std::vector<int64_t>& shape) {
  if (shape.size() == 1) return {1, shape[0]};
  int64_t rest = 1;
  for (size_t d = 1; d < shape.size(); ++d) rest *= shape[d];
  return {shape[0], rest};
}

int64_t ceil_div(int64_t a, int64_t b) { return (a + b - 1) / b; }

}  // namespace

Tensor::Tensor(std::vector<int64_t> s, std::vector<int32_t> d) : shape(std::move(s)), data(std::move(d)) {
  if (shape.empty()) throw ValidationError("tensor shape must have at least one dimension");
  int64_t n = 1;
  for (int64_t dim : shape) {
    if (dim < 1) throw ValidationError("tensor dimensions must be >= 1");
    n *= dim;
  }
  if (static_cast<size_t>(n) != data.size()) {
    throw ValidationError("tensor data has " + std::to_string(data.size()) +
                          " elements, shape implies " + std::to_string(n));
  }
}

TileSpec TileSpec::block(int64_t rows, int64_t cols) {
  if (rows < 1 || cols < 1) throw ValidationError("block tile dimensions must be >= 1");
  return TileSpec{Mode::kBlock, rows, cols};
}

TileSpec TileSpec::for_shape(const std::vector<int64_t>& shape) {
  return shape.size() >= 3 ? per_feature_map() : block(32, 32);
}

std::string TileSpec::to_string() const {
  if (mode == Mode::kPerFeatureMap) return "feature-map";
  return "block:" + std::to_string(block_rows) + "x" + std::to_string(block_cols);
}

double word_sparsity(const Tensor& t) {
  if (t.data.empty()) throw ValidationError("word sparsity of an empty tensor");
  const auto zeros = std::count(t.data.begin(), t.data.end(), 0);
  return static_cast<double>(zeros) / static_cast<double>(t.data.size());
}

std::vector<int64_t> tile_maxima(const Tensor& t, const TileSpec& tiles) {
  if (t.data.empty()) throw ValidationError("tiling an empty tensor");
  const View2d v = as_2d(t.shape);
  if (tiles.mode == TileSpec::Mode::kPerFeatureMap) {
    std::vector<int64_t> maxima(static_cast<size_t>(v.rows), 0);
    for (int64_t r = 0; r < v.rows; ++r) {
      for (int64_t c = 0; c < v.cols; ++c) {
        const int64_t mag = std::abs(static_cast<int64_t>(t.data[static_cast<size_t>(r * v.cols + c)]));
        maxima[static_cast<size_t>(r)] = std::max(maxima[static_cast<size_t>(r)], mag);
      }
    }
    return maxima;
  }
  if (tiles.block_rows < 1 || tiles.block_cols < 1) {
    throw ValidationError("block tile dimensions must be >= 1");
  }
  const int64_t tile_rows = ceil_div(v.rows, tiles.block_rows);
  const int64_t tile_cols = ceil_div(v.cols, tiles.block_cols);
  std::vector<int64_t> maxima(static_cast<size_t>(tile_rows * tile_cols), 0);
  for (int64_t r = 0; r < v.rows; ++r) {
    for (int64_t c = 0; c < v.cols; ++c) {
      const auto tile = static_cast<size_t>((r / tiles.block_rows) * tile_cols + c / tiles.block_cols);
      const int64_t mag = std::abs(static_cast<int64_t>(t.data[static_cast<size_t>(r * v.cols + c)]));
      maxima[tile] = std::max(maxima[tile], mag);
    }
  }
  return maxima;
}

double bit_sparsity(const Tensor& t, BitWidth width, const TileSpec& tiles) {
  for (int32_t v : t.data) {
    if (!width.contains(v)) {
      throw ValidationError("element " + std::to_string(v) + " outside " +
                            std::to_string(width.bits()) + "-bit range");
    }
  }
  const std::vector<int64_t> maxima = tile_maxima(t, tiles);
  const auto capacity = static_cast<double>(width.max_magnitude());
  double sum = 0.0;
  for (int64_t m : maxima) sum += 1.0 - static_cast<double>(m) / capacity;
  return sum / static_cast<double>(maxima.size());
}

Tensor msb_truncate(const Tensor& t, int target_width, int source_bits) {
  if (target_width != 2 && target_width != 4 && target_width != 8) {
    throw ValidationError("truncation width must be 2, 4 or 8, got " + std::to_string(target_width));
  }
  if (source_bits != 8 && source_bits != 32) {
    throw ValidationError("truncation source must be 8- or 32-bit");
  }
  if (target_width > source_bits) throw ValidationError("cannot truncate to a wider type");
  const int shift = source_bits - target_width;
  Tensor out = t;
  for (auto& v : out.data) {
    // >> on a negative int32 is an arithmetic shift in C++20.
    v = v >> shift;
  }
  return out;
}

LayerSparsity profile_tensor(const std::string& name, TensorRole role, const Tensor& t,
                             TensorDtype dtype, const ProfileOptions& options) {
  const int w = options.width.bits();
  Tensor values;
  if (options.truncate) {
    values = msb_truncate(t, w, dtype == TensorDtype::kInt32 ? 32 : 8);
  } else if (dtype == TensorDtype::kInt32) {
    throw ValidationError("layer '" + name + "': int32 data needs MSB truncation (--truncate)");
  } else if (w != 8) {
    throw ValidationError("layer '" + name + "': int8 data profiled at " + std::to_string(w) +
                          " bits needs MSB truncation (--truncate)");
  } else {
    values = t;
  }
  LayerSparsity s;
  s.name = name;
  s.role = role;
  s.width = w;
  s.tiles = options.tiles.value_or(TileSpec::for_shape(t.shape));
  s.word_sparsity = word_sparsity(values);
  try {
    s.bit_sparsity = bit_sparsity(values, options.width, s.tiles);
  } catch (const ValidationError& e) {
    throw ValidationError("layer '" + name + "': " + e.what());
  }
  s.tile_count = static_cast<int64_t>(tile_maxima(values, s.tiles).size());
  s.elements = static_cast<int64_t>(values.size());
  return s;
}

SparsityReport summarize(std::vector<LayerSparsity> layers, int width, bool weighted) {
  if (layers.empty()) throw ValidationError("no layers to profile");
  std::stable_sort(layers.begin(), layers.end(),
                   [](const LayerSparsity& a, const LayerSparsity& b) { return a.name < b.name; });
  SparsityReport r;
  r.width = width;
  double total_weight = 0.0;
  for (const auto& l : layers) {
    const double wgt = weighted ? static_cast<double>(l.elements) : 1.0;
    r.word_sparsity += wgt * l.word_sparsity;
    r.bit_sparsity += wgt * l.bit_sparsity;
    r.tile_count += l.tile_count;
    total_weight += wgt;
  }
  r.word_sparsity /= total_weight;
  r.bit_sparsity /= total_weight;
  r.layers = std::move(layers);
  return r;
}

SparsityReport profile_bundle(const TensorBundle& bundle, const ProfileOptions& options) {
  const auto& records = bundle.layers();
  if (records.empty()) throw ValidationError("bundle has no layers");
  auto layers = parallel_map(records.size(), options.jobs, [&](size_t i) {
    const LayerRecord& rec = records[i];
    return profile_tensor(rec.name, rec.role, bundle.read(rec), rec.dtype, options);
  });
  return summarize(std::move(layers), options.width.bits(), options.weighted);
}

void write_sparsity_csv(std::ostream& out, const SparsityReport& report) {
  out << "layer,role,width,word_sparsity,bit_sparsity,tiles\n";
  for (const auto& l : report.layers) {
    out << l.name << ',' << role_name(l.role) << ',' << l.width << ','
        << format_number(l.word_sparsity) << ',' << format_number(l.bit_sparsity) << ','
        << l.tile_count << "\n";
  }
  out << "MODEL,all," << report.width << ',' << format_number(report.word_sparsity) << ','
      << format_number(report.bit_sparsity) << ',' << report.tile_count << "\n";
}

void write_sparsity_markdown(std::ostream& out, const SparsityReport& report) {
  const std::string bits = std::to_string(report.width) + " bits";
  out << "| Layer | Word (%) " << bits << " | Bit (%) " << bits << " |\n"
      << "|---|---|---|\n";
  for (const auto& l : report.layers) {
    out << "| " << l.name << " | " << format_fixed(l.word_sparsity * 100.0, 2) << " | "
        << format_fixed(l.bit_sparsity * 100.0, 2) << " |\n";
  }
  out << "| **Model mean** | **" << format_fixed(report.word_sparsity * 100.0, 2) << "** | **"
      << format_fixed(report.bit_sparsity * 100.0, 2) << "** |\n";
}

}  // namespace unarysim
