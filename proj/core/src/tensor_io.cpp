// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#include "fgq/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>

#include "fgq/error.hpp"

namespace fgq {

static_assert(std::endian::native == std::endian::little,
              "byte-level serializers assume a little-endian host");

namespace {

constexpr std::string_view kNpyMagic = "\x93NUMPY";
constexpr std::size_t kNpyAlign = 64;
// numpy reserves room so shape[0] can grow in place.
constexpr std::size_t kGrowthAxisMaxDigits = 21;

void require_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DataError(std::string(what) + ": non-finite value at index " +
                      std::to_string(i));
    }
  }
}

// Minimal parser for the python-literal dict numpy writes in NPY headers.
class HeaderParser {
 public:
  explicit HeaderParser(std::string_view text) : text_(text) {}

  void parse(std::string& descr, std::optional<bool>& fortran,
             std::optional<std::vector<std::size_t>>& shape) {
    skip_ws();
    expect('{');
    while (true) {
      skip_ws();
      if (peek() == '}') {
        ++pos_;
        break;
      }
      const std::string key = parse_string();
      skip_ws();
      expect(':');
      skip_ws();
      if (key == "descr") {
        descr = parse_string();
      } else if (key == "fortran_order") {
        fortran = parse_bool();
      } else if (key == "shape") {
        shape = parse_tuple();
      } else {
        throw FormatError("npy header: unexpected key '" + key + "'");
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      skip_ws();
      expect('}');
      break;
    }
    skip_ws();
    if (pos_ != text_.size()) {
      throw FormatError("npy header: trailing characters after dict");
    }
  }

 private:
  char peek() const {
    if (pos_ >= text_.size()) throw FormatError("npy header: unexpected end");
    return text_[pos_];
  }
  void expect(char c) {
    if (peek() != c) {
      throw FormatError(std::string("npy header: expected '") + c + "'");
    }
    ++pos_;
  }
  void skip_ws() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\n' || text_[pos_] == '\t')) {
      ++pos_;
    }
  }
  std::string parse_string() {
    const char quote = peek();
    if (quote != '\'' && quote != '"') {
      throw FormatError("npy header: expected quoted string");
    }
    ++pos_;
    const auto end = text_.find(quote, pos_);
    if (end == std::string_view::npos) {
      throw FormatError("npy header: unterminated string");
    }
    std::string out(text_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return out;
  }
  bool parse_bool() {
    if (text_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    throw FormatError("npy header: expected True or False");
  }
  std::vector<std::size_t> parse_tuple() {
    expect('(');
    std::vector<std::size_t> dims;
    while (true) {
      skip_ws();
      if (peek() == ')') {
        ++pos_;
        return dims;
      }
      std::size_t value = 0;
      bool any = false;
      while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
        value = value * 10 + static_cast<std::size_t>(text_[pos_] - '0');
        any = true;
        ++pos_;
      }
      // python may write 3L on old writers
      if (pos_ < text_.size() && text_[pos_] == 'L') ++pos_;
      if (!any) throw FormatError("npy header: bad shape entry");
      dims.push_back(value);
      skip_ws();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ')') {
        throw FormatError("npy header: bad shape tuple");
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string shape_repr(const std::vector<std::size_t>& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(shape[i]);
  }
  if (shape.size() == 1) out += ",";
  out += ")";
  return out;
}

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

WeightTensor::WeightTensor(Dims4 dims, std::vector<double> data)
    : dims_(dims), data_(std::move(data)) {
  if (data_.size() != dims_.count()) {
    throw ShapeError("weight tensor: data length " +
                     std::to_string(data_.size()) + " != K*C*R*S " +
                     std::to_string(dims_.count()));
  }
  require_finite(data_, "weight tensor");
}

std::size_t NpyArray::element_count() const {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

NpyArray parse_npy(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 10 ||
      std::memcmp(bytes.data(), kNpyMagic.data(), kNpyMagic.size()) != 0) {
    throw FormatError("npy: bad magic");
  }
  const std::uint8_t major = bytes[6];
  std::size_t header_len = 0;
  std::size_t prefix = 0;
  if (major == 1) {
    header_len = read_u16(bytes.data() + 8);
    prefix = 10;
  } else if (major == 2 || major == 3) {
    if (bytes.size() < 12) throw FormatError("npy: truncated header length");
    header_len = read_u32(bytes.data() + 8);
    prefix = 12;
  } else {
    throw FormatError("npy: unsupported format version " +
                      std::to_string(major));
  }
  if (bytes.size() < prefix + header_len) {
    throw FormatError("npy: truncated header");
  }
  std::string_view header(reinterpret_cast<const char*>(bytes.data() + prefix),
                          header_len);
  if (header.empty() || header.back() != '\n') {
    throw FormatError("npy: header not newline-terminated");
  }

  std::string descr;
  std::optional<bool> fortran;
  std::optional<std::vector<std::size_t>> shape;
  HeaderParser(header).parse(descr, fortran, shape);
  if (descr.empty() || !fortran || !shape) {
    throw FormatError("npy: header missing descr, fortran_order or shape");
  }

  NpyArray out;
  std::size_t item_size = 0;
  if (descr == "<f4") {
    out.dtype = NpyDtype::kFloat32;
    item_size = 4;
  } else if (descr == "<f8") {
    out.dtype = NpyDtype::kFloat64;
    item_size = 8;
  } else {
    throw UnsupportedLayoutError("npy: unsupported dtype '" + descr + "'");
  }
  if (*fortran) {
    throw UnsupportedLayoutError("npy: fortran_order arrays are not supported");
  }
  out.shape = *shape;

  const std::size_t count = out.element_count();
  const std::size_t data_offset = prefix + header_len;
  if (bytes.size() - data_offset != count * item_size) {
    throw FormatError("npy: payload is " +
                      std::to_string(bytes.size() - data_offset) +
                      " bytes, expected " + std::to_string(count * item_size));
  }
  out.data.resize(count);
  const std::uint8_t* payload = bytes.data() + data_offset;
  for (std::size_t i = 0; i < count; ++i) {
    if (item_size == 4) {
      float v;
      std::memcpy(&v, payload + i * 4, 4);
      out.data[i] = v;
    } else {
      double v;
      std::memcpy(&v, payload + i * 8, 8);
      out.data[i] = v;
    }
  }
  require_finite(out.data, "npy");
  return out;
}

std::vector<std::uint8_t> serialize_npy(const NpyArray& array) {
  if (array.data.size() != array.element_count()) {
    throw ShapeError("npy: data length does not match shape");
  }
  std::string header = "{'descr': '";
  header += array.dtype == NpyDtype::kFloat32 ? "<f4" : "<f8";
  header += "', 'fortran_order': False, 'shape': ";
  header += shape_repr(array.shape);
  header += ", }";
  if (!array.shape.empty()) {
    const std::size_t digits = std::to_string(array.shape.front()).size();
    if (digits < kGrowthAxisMaxDigits) {
      header.append(kGrowthAxisMaxDigits - digits, ' ');
    }
  }

  std::size_t hlen = header.size() + 1;
  int major = 1;
  std::size_t len_field = 2;
  std::size_t padlen = kNpyAlign - ((kNpyMagic.size() + 2 + len_field + hlen) % kNpyAlign);
  if (hlen + padlen > 0xFFFF) {
    major = 2;
    len_field = 4;
    padlen = kNpyAlign - ((kNpyMagic.size() + 2 + len_field + hlen) % kNpyAlign);
  }
  const std::size_t total_header = hlen + padlen;

  std::vector<std::uint8_t> out;
  const std::size_t item_size = array.dtype == NpyDtype::kFloat32 ? 4 : 8;
  out.reserve(kNpyMagic.size() + 2 + len_field + total_header +
              array.data.size() * item_size);
  out.insert(out.end(), kNpyMagic.begin(), kNpyMagic.end());
  out.push_back(static_cast<std::uint8_t>(major));
  out.push_back(0);
  for (std::size_t b = 0; b < len_field; ++b) {
    out.push_back(static_cast<std::uint8_t>((total_header >> (8 * b)) & 0xFF));
  }
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), padlen, static_cast<std::uint8_t>(' '));
  out.push_back('\n');

  std::uint8_t buf[8];
  for (double v : array.data) {
    if (item_size == 4) {
      const float f = static_cast<float>(v);
      std::memcpy(buf, &f, 4);
    } else {
      std::memcpy(buf, &v, 8);
    }
    out.insert(out.end(), buf, buf + item_size);
  }
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

NpyArray load_npy_array(const std::filesystem::path& path) {
  return parse_npy(read_file_bytes(path));
}

void save_npy_array(const std::filesystem::path& path, const NpyArray& array) {
  write_file_bytes(path, serialize_npy(array));
}

WeightTensor to_weight_tensor(const NpyArray& array) {
  if (array.shape.size() != 4) {
    throw UnsupportedLayoutError("weights must be 4-D (K, C, R, S); got rank " +
                                 std::to_string(array.shape.size()));
  }
  Dims4 dims{static_cast<std::uint32_t>(array.shape[0]),
             static_cast<std::uint32_t>(array.shape[1]),
             static_cast<std::uint32_t>(array.shape[2]),
             static_cast<std::uint32_t>(array.shape[3])};
  return WeightTensor(dims, array.data);
}

NpyArray to_npy_array(const WeightTensor& tensor, NpyDtype dtype) {
  const auto& d = tensor.dims();
  NpyArray out;
  out.shape = {d.k, d.c, d.r, d.s};
  out.dtype = dtype;
  out.data.assign(tensor.data().begin(), tensor.data().end());
  return out;
}

WeightTensor load_npy(const std::filesystem::path& path) {
  return to_weight_tensor(load_npy_array(path));
}

void save_npy(const std::filesystem::path& path, const WeightTensor& tensor,
              NpyDtype dtype) {
  save_npy_array(path, to_npy_array(tensor, dtype));
}

PackedTernary pack_ternary(std::span<const std::int8_t> signs) {
  PackedTernary out;
  out.element_count_ = signs.size();
  out.bytes_.assign((signs.size() + 3) / 4, 0);
  for (std::size_t i = 0; i < signs.size(); ++i) {
    std::uint8_t code;
    switch (signs[i]) {
      case 0: code = 0b00; break;
      case 1: code = 0b01; break;
      case -1: code = 0b11; break;
      default:
        throw DomainError("pack_ternary: value " + std::to_string(signs[i]) +
                          " at index " + std::to_string(i) +
                          " is not in {-1, 0, +1}");
    }
    out.bytes_[i / 4] |= static_cast<std::uint8_t>(code << (2 * (i % 4)));
  }
  return out;
}

PackedTernary PackedTernary::from_bytes(std::size_t element_count,
                                        std::vector<std::uint8_t> bytes) {
  if (bytes.size() != (element_count + 3) / 4) {
    throw FormatError("packed ternary: " + std::to_string(bytes.size()) +
                      " bytes cannot hold exactly " +
                      std::to_string(element_count) + " codes");
  }
  for (std::size_t i = 0; i < bytes.size() * 4; ++i) {
    const auto code = (bytes[i / 4] >> (2 * (i % 4))) & 0b11;
    if (i >= element_count) {
      if (code != 0) throw FormatError("packed ternary: nonzero pad bits");
    } else if (code == 0b10) {
      throw FormatError("packed ternary: reserved code 10 at element " +
                        std::to_string(i));
    }
  }
  PackedTernary out;
  out.element_count_ = element_count;
  out.bytes_ = std::move(bytes);
  return out;
}

std::int8_t PackedTernary::at(std::size_t i) const {
  const auto code = (bytes_[i / 4] >> (2 * (i % 4))) & 0b11;
  // 01 -> +1, 11 -> -1, 00 -> 0
  return code == 0 ? 0 : (code == 1 ? 1 : -1);
}

std::vector<std::int8_t> unpack_ternary(const PackedTernary& packed) {
  std::vector<std::int8_t> out(packed.element_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = packed.at(i);
  return out;
}

}  // namespace fgq
