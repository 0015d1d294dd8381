#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cnc/tensor.hpp"

namespace cnc {

class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
}

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
}

inline void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

/// Bounds-checked little-endian reader over a byte buffer.
class ByteReader {
public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::string_view take(std::size_t n) {
    if (remaining() < n) {
      throw FormatError("unexpected end of data");
    }
    std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::uint32_t u32() {
    const std::string_view s = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
      v = (v << 8) | static_cast<unsigned char>(s[static_cast<std::size_t>(i)]);
    }
    return v;
  }

  std::uint64_t u64() {
    const std::string_view s = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
      v = (v << 8) | static_cast<unsigned char>(s[static_cast<std::size_t>(i)]);
    }
    return v;
  }

  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

// ---------------------------------------------------------------------------
// CIFAR-10 binary batches: records of 3073 bytes, a label byte (0-9) followed
// by 1024 R, 1024 G and 1024 B bytes, each plane row-major 32x32.
// Labels are shifted to 1..10.
// ---------------------------------------------------------------------------
inline constexpr std::size_t kCifarSide = 32;
inline constexpr std::size_t kCifarRecord = 1 + 3 * kCifarSide * kCifarSide;

inline LabeledImageSet parse_cifar10_binary(std::string_view bytes) {
  if (bytes.size() % kCifarRecord != 0) {
    throw FormatError("CIFAR-10: truncated record (size " + std::to_string(bytes.size()) +
                      " is not a multiple of 3073)");
  }
  constexpr std::size_t plane = kCifarSide * kCifarSide;
  LabeledImageSet set;
  set.class_count = 10;
  const std::size_t count = bytes.size() / kCifarRecord;
  set.images.reserve(count);
  set.labels.reserve(count);
  for (std::size_t r = 0; r < count; ++r) {
    const std::string_view rec = bytes.substr(r * kCifarRecord, kCifarRecord);
    const auto label = static_cast<unsigned char>(rec[0]);
    if (label > 9) {
      throw FormatError("CIFAR-10: label byte " + std::to_string(label) + " in record " +
                        std::to_string(r));
    }
    std::vector<float> data(3 * plane);
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t i = 0; i < plane; ++i) {
        data[i * 3 + c] = static_cast<float>(static_cast<unsigned char>(rec[1 + c * plane + i])) / 255.0f;
      }
    }
    set.images.emplace_back(32, 32, 3, std::move(data));
    set.labels.push_back(label + 1);
  }
  return set;
}

inline LabeledImageSet load_cifar10_binary(const std::filesystem::path& path) {
  return parse_cifar10_binary(read_file(path));
}

// ---------------------------------------------------------------------------
// Raw tensor: "CNCT", u32 W, u32 H, u32 C, then W*H*C float32, all
// little-endian, channel-interleaved row-major.
// ---------------------------------------------------------------------------
inline std::string encode_raw_tensor(const ImageTensor& t) {
  std::string out = "CNCT";
  out.reserve(16 + 4 * t.size());
  detail::put_u32(out, static_cast<std::uint32_t>(t.width()));
  detail::put_u32(out, static_cast<std::uint32_t>(t.height()));
  detail::put_u32(out, static_cast<std::uint32_t>(t.channels()));
  for (float v : t.data()) {
    detail::put_f32(out, v);
  }
  return out;
}

inline ImageTensor decode_raw_tensor(std::string_view bytes) {
  detail::ByteReader in(bytes);
  if (in.remaining() < 4 || in.take(4) != "CNCT") {
    throw FormatError("raw tensor: bad magic");
  }
  const std::uint32_t w = in.u32();
  const std::uint32_t h = in.u32();
  const std::uint32_t c = in.u32();
  constexpr auto max_dim = static_cast<std::uint32_t>(std::numeric_limits<int>::max());
  if (w == 0 || h == 0 || c == 0 || w > max_dim || h > max_dim || c > max_dim) {
    throw FormatError("raw tensor: invalid dimensions");
  }
  const std::size_t rem = in.remaining();
  const std::size_t count = rem / 4;
  if (rem % 4 != 0 || count % w != 0 || (count / w) % h != 0 || count / w / h != c) {
    throw FormatError("raw tensor: dimension overflow or payload size mismatch");
  }
  std::vector<float> data(count);
  for (float& v : data) {
    v = in.f32();
  }
  return {static_cast<int>(w), static_cast<int>(h), static_cast<int>(c), std::move(data)};
}

inline void save_raw_tensor(const ImageTensor& t, const std::filesystem::path& path) {
  write_file(path, encode_raw_tensor(t));
}

inline ImageTensor load_raw_tensor(const std::filesystem::path& path) {
  return decode_raw_tensor(read_file(path));
}

// ---------------------------------------------------------------------------
// Binary PPM (P6, 3 channels) / PGM (P5, 1 channel), maxval 255.
// ---------------------------------------------------------------------------
inline std::string encode_ppm(const ImageTensor& t) {
  if (t.channels() != 1 && t.channels() != 3) {
    throw std::invalid_argument("export_ppm: only 1 or 3 channels are supported");
  }
  std::string out = t.channels() == 3 ? "P6\n" : "P5\n";
  out += std::to_string(t.width()) + " " + std::to_string(t.height()) + "\n255\n";
  for (float v : t.data()) {
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(static_cast<double>(v) * 255.0))));
  }
  return out;
}

inline void export_ppm(const ImageTensor& t, const std::filesystem::path& path) {
  write_file(path, encode_ppm(t));
}

}  // namespace cnc
