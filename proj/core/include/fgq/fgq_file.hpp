// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fgq/grouping.hpp"

namespace fgq {

/// FGQ1 model container; see FORMAT.md for the byte layout.
inline constexpr std::uint16_t kFgqVersion = 1;

std::vector<std::uint8_t> serialize_fgq(std::span<const grouping::FgqLayer> layers);

/// Throws UnknownVersionError for "FGQ<n>" magics other than FGQ1 or a
/// version field other than 1, and FormatError for any other malformed
/// input (bad magic, truncation, reserved code 10, nonzero pad bits,
/// trailing bytes).
std::vector<grouping::FgqLayer> parse_fgq(std::span<const std::uint8_t> bytes);

void write_fgq(const std::filesystem::path& path,
               std::span<const grouping::FgqLayer> layers);
std::vector<grouping::FgqLayer> read_fgq(const std::filesystem::path& path);

}  // namespace fgq
