// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#include "fgq/fgq_file.hpp"

#include <cstring>
#include <limits>
#include <string>

#include "fgq/error.hpp"

namespace fgq {

namespace {

using grouping::FgqLayer;
using grouping::GroupPartition;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void i8(int v) { out_.push_back(static_cast<std::uint8_t>(static_cast<std::int8_t>(v))); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v & 0xFF));
    u8(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int b = 0; b < 4; ++b) u8(static_cast<std::uint8_t>((v >> (8 * b)) & 0xFF));
  }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string("fgq: truncated file while reading ") + what);
    }
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint8_t u8(const char* what) { return take(1, what)[0]; }
  int i8(const char* what) { return static_cast<std::int8_t>(u8(what)); }
  std::uint16_t u16(const char* what) {
    auto b = take(2, what);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  std::uint32_t u32(const char* what) {
    auto b = take(4, what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void write_dfp(Writer& w, const fixedpoint::DfpTensor& t) {
  w.i8(t.frac_bits);
  if (t.bits == 8) {
    for (auto m : t.mantissas) w.i8(m);
    return;
  }
  // 4-bit: two's-complement nibbles, first value in the low nibble
  for (std::size_t i = 0; i < t.size(); i += 2) {
    const auto lo = static_cast<std::uint8_t>(t.mantissas[i] & 0xF);
    const auto hi = i + 1 < t.size()
                        ? static_cast<std::uint8_t>(t.mantissas[i + 1] & 0xF)
                        : std::uint8_t{0};
    w.u8(static_cast<std::uint8_t>(lo | (hi << 4)));
  }
}

fixedpoint::DfpTensor read_dfp(Reader& r, int bits, std::size_t count,
                               const char* what) {
  fixedpoint::DfpTensor t;
  t.bits = bits;
  t.frac_bits = r.i8(what);
  t.mantissas.resize(count);
  if (bits == 8) {
    auto raw = r.take(count, what);
    for (std::size_t i = 0; i < count; ++i) {
      t.mantissas[i] = static_cast<std::int8_t>(raw[i]);
    }
    return t;
  }
  auto raw = r.take((count + 1) / 2, what);
  auto nibble = [](std::uint8_t v) {
    return static_cast<std::int32_t>(v & 0x8 ? static_cast<int>(v) - 16 : v);
  };
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t byte = raw[i / 2];
    t.mantissas[i] = nibble(i % 2 == 0 ? (byte & 0xF) : (byte >> 4));
  }
  if (count % 2 == 1 && (raw.back() >> 4) != 0) {
    throw FormatError(std::string("fgq: nonzero pad nibble in ") + what);
  }
  return t;
}

void check_bits(int bits, const char* what) {
  if (bits != 4 && bits != 8) {
    throw FormatError(std::string("fgq: ") + what + " bits must be 4 or 8, got " +
                      std::to_string(bits));
  }
}

}  // namespace

std::vector<std::uint8_t> serialize_fgq(std::span<const FgqLayer> layers) {
  if (layers.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw DomainError("fgq: too many layers for a u16 count");
  }
  Writer w;
  w.bytes(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>("FGQ1"), 4));
  w.u16(kFgqVersion);
  w.u16(static_cast<std::uint16_t>(layers.size()));
  for (const auto& layer : layers) {
    layer.validate();
    const auto& d = layer.partition.dims();
    w.u32(d.k);
    w.u32(d.c);
    w.u32(d.r);
    w.u32(d.s);
    w.u32(layer.partition.group_size());
    w.u8(layer.precision.weight_bits);
    w.u8(layer.precision.scale_bits);
    w.u8(layer.precision.activation_bits);
    if (layer.full_precision_weights) {
      write_dfp(w, layer.weights);
      continue;
    }
    write_dfp(w, layer.alphas);
    w.u32(static_cast<std::uint32_t>(layer.signs.element_count()));
    w.bytes(layer.signs.bytes());
  }
  return w.take();
}

std::vector<FgqLayer> parse_fgq(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  auto magic = r.take(4, "magic");
  if (std::memcmp(magic.data(), "FGQ", 3) != 0) {
    throw FormatError("fgq: bad magic");
  }
  if (magic[3] != '1') {
    throw UnknownVersionError(std::string("fgq: unknown format 'FGQ") +
                              static_cast<char>(magic[3]) + "'");
  }
  const auto version = r.u16("version");
  if (version != kFgqVersion) {
    throw UnknownVersionError("fgq: unknown version " + std::to_string(version));
  }
  const auto count = r.u16("layer count");
  std::vector<FgqLayer> layers(count);
  for (auto& layer : layers) {
    Dims4 d;
    d.k = r.u32("dims");
    d.c = r.u32("dims");
    d.r = r.u32("dims");
    d.s = r.u32("dims");
    const auto n = r.u32("group size");
    if (n < 1) throw FormatError("fgq: group size 0");
    layer.partition = GroupPartition(d, n);
    layer.precision.weight_bits = r.u8("precision");
    layer.precision.scale_bits = r.u8("precision");
    layer.precision.activation_bits = r.u8("precision");
    check_bits(layer.precision.activation_bits, "activation");

    if (layer.precision.weight_bits == 8) {
      layer.full_precision_weights = true;
      layer.weights = read_dfp(r, 8, d.count(), "weight block");
    } else if (layer.precision.weight_bits == 2) {
      check_bits(layer.precision.scale_bits, "scale");
      layer.alphas = read_dfp(r, layer.precision.scale_bits,
                              layer.partition.group_count(), "scale block");
      const auto elements = r.u32("sign count");
      if (elements != d.count()) {
        throw FormatError("fgq: sign count " + std::to_string(elements) +
                          " != K*C*R*S " + std::to_string(d.count()));
      }
      auto raw = r.take((std::size_t{elements} + 3) / 4, "sign block");
      layer.signs = PackedTernary::from_bytes(
          elements, std::vector<std::uint8_t>(raw.begin(), raw.end()));
    } else {
      throw FormatError("fgq: unsupported weight bits " +
                        std::to_string(layer.precision.weight_bits));
    }
    layer.validate();
  }
  if (!r.done()) throw FormatError("fgq: trailing bytes after last layer");
  return layers;
}

void write_fgq(const std::filesystem::path& path, std::span<const FgqLayer> layers) {
  write_file_bytes(path, serialize_fgq(layers));
}

std::vector<FgqLayer> read_fgq(const std::filesystem::path& path) {
  return parse_fgq(read_file_bytes(path));
}

}  // namespace fgq
