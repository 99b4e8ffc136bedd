// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace fgq {

/// Shape of a convolution weight tensor: K output filters, C input channels,
/// R kernel rows, S kernel columns.
struct Dims4 {
  std::uint32_t k = 0;
  std::uint32_t c = 0;
  std::uint32_t r = 0;
  std::uint32_t s = 0;

  std::size_t count() const {
    return std::size_t{k} * c * r * s;
  }
  std::size_t offset(std::uint32_t ki, std::uint32_t ci, std::uint32_t ri,
                     std::uint32_t si) const {
    return ((std::size_t{ki} * c + ci) * r + ri) * s + si;
  }
  friend bool operator==(const Dims4&, const Dims4&) = default;
};

/// Dense full-precision weights in row-major (K, C, R, S) order. Values are
/// held as double regardless of the on-disk dtype. Immutable once built.
class WeightTensor {
 public:
  WeightTensor() = default;
  /// Throws ShapeError when data.size() != dims.count() and DataError when
  /// any value is not finite.
  WeightTensor(Dims4 dims, std::vector<double> data);

  const Dims4& dims() const { return dims_; }
  std::span<const double> data() const { return data_; }
  std::size_t size() const { return data_.size(); }
  double at(std::uint32_t k, std::uint32_t c, std::uint32_t r,
            std::uint32_t s) const {
    return data_[dims_.offset(k, c, r, s)];
  }
  friend bool operator==(const WeightTensor&, const WeightTensor&) = default;

 private:
  Dims4 dims_;
  std::vector<double> data_;
};

enum class NpyDtype : std::uint8_t { kFloat32, kFloat64 };

/// Generic C-order NPY array of any rank, values widened to double.
struct NpyArray {
  std::vector<std::size_t> shape;
  NpyDtype dtype = NpyDtype::kFloat32;
  std::vector<double> data;

  std::size_t element_count() const;
  friend bool operator==(const NpyArray&, const NpyArray&) = default;
};

/// Parses NPY v1.0/v2.0 bytes. Accepts little-endian '<f4' / '<f8' with
/// fortran_order False; anything else well-formed raises
/// UnsupportedLayoutError, malformed bytes raise FormatError and non-finite
/// values raise DataError.
NpyArray parse_npy(std::span<const std::uint8_t> bytes);

/// Serializes exactly as numpy.save does: v1.0 header (v2.0 only when the
/// header does not fit in 65535 bytes) padded to a 64-byte boundary.
std::vector<std::uint8_t> serialize_npy(const NpyArray& array);

NpyArray load_npy_array(const std::filesystem::path& path);
void save_npy_array(const std::filesystem::path& path, const NpyArray& array);

/// Loads a 4-D weight tensor; other ranks raise UnsupportedLayoutError.
WeightTensor load_npy(const std::filesystem::path& path);
void save_npy(const std::filesystem::path& path, const WeightTensor& tensor,
              NpyDtype dtype = NpyDtype::kFloat32);

WeightTensor to_weight_tensor(const NpyArray& array);
NpyArray to_npy_array(const WeightTensor& tensor, NpyDtype dtype);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes);

/// 2-bit ternary codes, four per byte, first element in bits 0-1.
/// 00 -> 0, 01 -> +1, 11 -> -1; 10 is reserved and never produced.
class PackedTernary {
 public:
  PackedTernary() = default;

  /// Validates a raw stream: byte count must be ceil(count/4), no code 10,
  /// trailing pad bits zero. Violations raise FormatError.
  static PackedTernary from_bytes(std::size_t element_count,
                                  std::vector<std::uint8_t> bytes);

  std::size_t element_count() const { return element_count_; }
  std::span<const std::uint8_t> bytes() const { return bytes_; }
  std::int8_t at(std::size_t i) const;

  friend bool operator==(const PackedTernary&, const PackedTernary&) = default;

 private:
  friend PackedTernary pack_ternary(std::span<const std::int8_t> signs);
  std::size_t element_count_ = 0;
  std::vector<std::uint8_t> bytes_;
};

/// Throws DomainError for values outside {-1, 0, +1}.
PackedTernary pack_ternary(std::span<const std::int8_t> signs);
std::vector<std::int8_t> unpack_ternary(const PackedTernary& packed);

}  // namespace fgq
