// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace fgq::cli {

/// Bad flags, unknown solver, missing required input. Maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything one invocation needs. Populated from an optional key=value
/// config file first, then from flags, so flags win.
struct RunConfig {
  std::string command;
  std::vector<std::string> weights;
  std::string activations;
  std::string model;
  std::uint32_t group_size = 4;
  std::string solver = "brute";
  std::optional<int> act_bits;
  int scale_bits = 8;
  double prune_fraction = 0.0;
  std::string gaussian_rule = "sigma";
  std::uint64_t seed = 0;
  std::string out;
  std::string report = "json";
  std::optional<bool> exempt_first;

  // simulate
  std::uint32_t stride = 1;
  std::uint32_t pad = 0;

  // perf
  std::vector<std::string> layers;  // "K,C,R,S,HOUT,WOUT"
  std::string out_size = "1,1";
  bool sweep = false;
  double fma_cost = 1.0;
  double ternary_cost = 1.0 / 16.0;
  double exempt_cost = 1.0;

  // synth
  std::string dist = "gaussian";
  std::string dims;
  double scale = 1.0;
  bool nonneg = false;
};

/// Parses `key = value` lines ('#' starts a comment). Keys are the long flag
/// names without dashes; list keys (weights, layer) may repeat or hold
/// comma-separated paths. Throws UsageError on unknown keys or bad values.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// Throws UsageError when a field is outside its domain.
void validate(const RunConfig& config);

nlohmann::json cmd_analyze(const RunConfig& config);
nlohmann::json cmd_ternarize(const RunConfig& config);
nlohmann::json cmd_simulate(const RunConfig& config);
nlohmann::json cmd_perf(const RunConfig& config);
nlohmann::json cmd_synth(const RunConfig& config);

/// CSV rendering of a command report: the perf sweep, or one row per layer
/// with nested objects flattened to dotted column names.
std::string report_csv(const nlohmann::json& report);

/// Full command-line entry point. Returns 0 on success, 1 on runtime or
/// data errors and 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace fgq::cli
