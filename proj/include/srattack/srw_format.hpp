#pragma once

// SRW1 weight file, all fields little-endian:
//
//   char[4]  magic "SRW1"
//   u32      version (1)
//   u32      scale
//   u32      n_feats
//   u32      n_resblocks
//   f32      res_scale
//   f32[3]   rgb_mean (R, G, B on the 0..255 scale)
//   u32      layer_count
//   per layer:
//     u32 out, u32 in, u32 kh, u32 kw
//     f32[out*in*kh*kw] weights   (out, in, kh, kw)
//     f32[out]          biases

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "srattack/error.hpp"
#include "srattack/file_util.hpp"
#include "srattack/sr_model.hpp"

namespace srattack {

inline constexpr char kSrwMagic[4] = {'S', 'R', 'W', '1'};
inline constexpr std::uint32_t kSrwVersion = 1;

namespace detail {

class SrwReader {
 public:
  explicit SrwReader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int b = 3; b >= 0; --b) v = (v << 8) | bytes_[pos_ + b];
    pos_ += 4;
    return v;
  }

  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }

  void f32_array(std::vector<float>& out, std::size_t n, const std::string& what) {
    need(n * 4, what.c_str());
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = f32(what.c_str());
  }

  void bytes(char* out, std::size_t n, const char* what) {
    need(n, what);
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string("truncated weight file while reading ") + what);
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

inline void put_f32(std::vector<unsigned char>& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

}  // namespace detail

inline SrModel parse_weights(const std::vector<unsigned char>& bytes) {
  detail::SrwReader in(bytes);
  char magic[4];
  in.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kSrwMagic, 4) != 0) throw FormatError("bad magic: not an SRW1 weight file");
  const std::uint32_t version = in.u32("version");
  if (version != kSrwVersion) {
    throw FormatError("unsupported SRW version " + std::to_string(version));
  }
  const std::uint32_t scale = in.u32("scale");
  if (scale < 2 || scale > 4) throw FormatError("unsupported scale " + std::to_string(scale));

  SrModel m;
  m.scale = ScaleFactor(static_cast<int>(scale));
  const std::uint32_t n_feats = in.u32("n_feats");
  const std::uint32_t n_resblocks = in.u32("n_resblocks");
  if (n_feats < 1 || n_feats > 4096) throw FormatError("implausible n_feats " + std::to_string(n_feats));
  if (n_resblocks > 1024) throw FormatError("implausible n_resblocks " + std::to_string(n_resblocks));
  m.n_feats = static_cast<int>(n_feats);
  m.n_resblocks = static_cast<int>(n_resblocks);
  m.res_scale = in.f32("res_scale");
  for (float& v : m.rgb_mean) v = in.f32("rgb_mean");

  const auto shapes = expected_layer_shapes(m.scale, m.n_feats, m.n_resblocks);
  const std::uint32_t layer_count = in.u32("layer_count");
  if (layer_count != shapes.size()) {
    throw FormatError("header declares " + std::to_string(layer_count) + " layers, topology needs " +
                      std::to_string(shapes.size()));
  }
  m.layers.reserve(layer_count);
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    const std::string tag = "layer " + std::to_string(l);
    const std::uint32_t out = in.u32(tag.c_str());
    const std::uint32_t inc = in.u32(tag.c_str());
    const std::uint32_t kh = in.u32(tag.c_str());
    const std::uint32_t kw = in.u32(tag.c_str());
    if (kh != 3 || kw != 3) {
      throw FormatError(tag + " has a " + std::to_string(kh) + "x" + std::to_string(kw) +
                        " kernel, only 3x3 is supported");
    }
    if (static_cast<int>(out) != shapes[l].first || static_cast<int>(inc) != shapes[l].second) {
      throw FormatError(tag + " shape " + std::to_string(out) + "x" + std::to_string(inc) +
                        " breaks the EDSR chain (expected " + std::to_string(shapes[l].first) + "x" +
                        std::to_string(shapes[l].second) + ")");
    }
    ConvLayer layer;
    layer.out_channels = static_cast<int>(out);
    layer.in_channels = static_cast<int>(inc);
    in.f32_array(layer.weights, static_cast<std::size_t>(out) * inc * 9, tag + " weights");
    in.f32_array(layer.bias, out, tag + " biases");
    m.layers.push_back(std::move(layer));
  }
  if (!in.at_end()) throw FormatError("trailing bytes after the last layer");
  validate_model(m);
  return m;
}

inline SrModel load_weights(const std::filesystem::path& path) {
  return parse_weights(detail::read_file_bytes(path));
}

inline std::vector<unsigned char> serialize_weights(const SrModel& m) {
  validate_model(m);
  std::vector<unsigned char> out(kSrwMagic, kSrwMagic + 4);
  detail::put_u32(out, kSrwVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(m.scale.value()));
  detail::put_u32(out, static_cast<std::uint32_t>(m.n_feats));
  detail::put_u32(out, static_cast<std::uint32_t>(m.n_resblocks));
  detail::put_f32(out, m.res_scale);
  for (float v : m.rgb_mean) detail::put_f32(out, v);
  detail::put_u32(out, static_cast<std::uint32_t>(m.layers.size()));
  for (const ConvLayer& layer : m.layers) {
    detail::put_u32(out, static_cast<std::uint32_t>(layer.out_channels));
    detail::put_u32(out, static_cast<std::uint32_t>(layer.in_channels));
    detail::put_u32(out, 3);
    detail::put_u32(out, 3);
    for (float v : layer.weights) detail::put_f32(out, v);
    for (float v : layer.bias) detail::put_f32(out, v);
  }
  return out;
}

inline void write_weights(const SrModel& m, const std::filesystem::path& path) {
  detail::write_file_bytes(path, serialize_weights(m));
}

}  // namespace srattack
