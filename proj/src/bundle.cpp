#include <array>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "unarysim/sparsity.hpp"

namespace unarysim {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

TensorRole parse_role(const std::string& s) {
  if (s == "weight") return TensorRole::kWeight;
  if (s == "activation") return TensorRole::kActivation;
  throw ValidationError("unknown tensor role '" + s + "'");
}

TensorDtype parse_dtype(const std::string& s) {
  if (s == "int8") return TensorDtype::kInt8;
  if (s == "int32") return TensorDtype::kInt32;
  throw ValidationError("unsupported dtype '" + s + "' (int8 or int32)");
}

}  // namespace

std::string_view role_name(TensorRole r) { return r == TensorRole::kWeight ? "weight" : "activation"; }
std::string_view dtype_name(TensorDtype d) { return d == TensorDtype::kInt8 ? "int8" : "int32"; }
size_t dtype_size(TensorDtype d) { return d == TensorDtype::kInt8 ? 1 : 4; }

std::string sha256_hex(const void* data, size_t size) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data, size, digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 computation failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

TensorBundle TensorBundle::load(const fs::path& dir) {
  const fs::path manifest = dir / "manifest.json";
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open " + manifest.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError("malformed manifest " + manifest.string() + ": " + e.what());
  }

  TensorBundle b;
  b.root_ = dir;
  try {
    for (const auto& l : doc.at("layers")) {
      LayerRecord rec;
      rec.name = l.at("name").get<std::string>();
      rec.role = parse_role(l.value("role", "weight"));
      rec.shape = l.at("shape").get<std::vector<int64_t>>();
      rec.dtype = parse_dtype(l.at("dtype").get<std::string>());
      rec.data_path = l.at("data_path").get<std::string>();
      if (l.contains("sha256")) rec.sha256 = l.at("sha256").get<std::string>();
      if (rec.shape.empty()) throw ValidationError("layer '" + rec.name + "' has an empty shape");
      for (int64_t d : rec.shape) {
        if (d < 1) throw ValidationError("layer '" + rec.name + "' has a non-positive dimension");
      }
      b.layers_.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw IoError("malformed manifest " + manifest.string() + ": " + e.what());
  }
  return b;
}

Tensor TensorBundle::read(const LayerRecord& layer) const {
  const fs::path path = root_ / layer.data_path;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("layer '" + layer.name + "': cannot open " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  size_t count = 1;
  for (int64_t d : layer.shape) count *= static_cast<size_t>(d);
  const size_t elem = dtype_size(layer.dtype);
  if (bytes.size() != count * elem) {
    throw ValidationError("layer '" + layer.name + "': blob has " + std::to_string(bytes.size()) +
                          " bytes, shape and dtype imply " + std::to_string(count * elem));
  }
  if (layer.sha256 && sha256_hex(bytes.data(), bytes.size()) != *layer.sha256) {
    throw ValidationError("layer '" + layer.name + "': sha256 mismatch");
  }
  std::vector<int32_t> data(count);
  for (size_t i = 0; i < count; ++i) {
    if (layer.dtype == TensorDtype::kInt8) {
      data[i] = static_cast<int8_t>(bytes[i]);
    } else {
      const uint32_t u = uint32_t{bytes[4 * i]} | (uint32_t{bytes[4 * i + 1]} << 8) |
                         (uint32_t{bytes[4 * i + 2]} << 16) | (uint32_t{bytes[4 * i + 3]} << 24);
      data[i] = static_cast<int32_t>(u);
    }
  }
  return Tensor(layer.shape, std::move(data));
}

void TensorBundle::write(const fs::path& dir, const std::vector<std::pair<LayerRecord, Tensor>>& layers) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  json doc;
  doc["version"] = 1;
  doc["layers"] = json::array();
  for (const auto& [rec, tensor] : layers) {
    if (rec.shape != tensor.shape) {
      throw ValidationError("layer '" + rec.name + "': record shape differs from tensor shape");
    }
    std::vector<unsigned char> bytes;
    bytes.reserve(tensor.size() * dtype_size(rec.dtype));
    for (int32_t v : tensor.data) {
      if (rec.dtype == TensorDtype::kInt8) {
        if (v < -128 || v > 127) throw ValidationError("layer '" + rec.name + "': value exceeds int8");
        bytes.push_back(static_cast<unsigned char>(static_cast<int8_t>(v)));
      } else {
        const auto u = static_cast<uint32_t>(v);
        for (int s = 0; s < 32; s += 8) bytes.push_back(static_cast<unsigned char>((u >> s) & 0xff));
      }
    }
    std::ofstream out(dir / rec.data_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / rec.data_path).string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));

    doc["layers"].push_back({{"name", rec.name},
                             {"role", std::string(role_name(rec.role))},
                             {"shape", rec.shape},
                             {"dtype", std::string(dtype_name(rec.dtype))},
                             {"data_path", rec.data_path},
                             {"sha256", sha256_hex(bytes.data(), bytes.size())}});
  }
  std::ofstream m(dir / "manifest.json");
  if (!m) throw IoError("cannot write manifest in " + dir.string());
  m << doc.dump(2) << "\n";
}

}  // namespace unarysim
