// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "fgq/fgq.hpp"

namespace fgq::cli {

using nlohmann::json;

namespace {

constexpr std::uint32_t kSweepSizes[] = {1, 2, 4, 8, 16, 32, 64};

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  T out{};
  in >> out;
  if (in.fail() || !in.eof()) {
    throw UsageError("invalid value '" + value + "' for " + key);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw UsageError("invalid boolean '" + value + "' for " + key);
}

std::vector<std::uint32_t> parse_dims(const std::string& text, std::size_t min_rank,
                                      std::size_t max_rank, const char* what) {
  std::vector<std::uint32_t> out;
  for (const auto& part : split(text, ',')) {
    out.push_back(parse_number<std::uint32_t>(what, part));
  }
  if (out.size() < min_rank || out.size() > max_rank) {
    throw UsageError(std::string("bad ") + what + " '" + text + "'");
  }
  return out;
}

distfit::GaussianRule gaussian_rule(const RunConfig& c) {
  return c.gaussian_rule == "mean-abs" ? distfit::GaussianRule::kMeanAbs
                                       : distfit::GaussianRule::kSigma;
}

json number_or_null(double v) {
  return std::isfinite(v) ? json(v) : json(nullptr);
}

json metrics_json(const inference::ErrorMetrics& m) {
  return {{"max_abs", m.max_abs},
          {"rel_frobenius", number_or_null(m.rel_frobenius)},
          {"sqnr_db", number_or_null(m.sqnr_db)}};
}

json dims_json(const Dims4& d) { return json::array({d.k, d.c, d.r, d.s}); }

// Rethrows library errors with the failing layer attached.
template <typename Fn>
auto for_layer(std::size_t index, const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const IoError& e) {
    throw IoError("layer " + std::to_string(index) + " (" + path + "): " + e.what());
  } catch (const Error& e) {
    throw Error("layer " + std::to_string(index) + " (" + path + "): " + e.what());
  }
}

bool exempt(const RunConfig& c, std::size_t index, bool default_on) {
  return index == 0 && c.exempt_first.value_or(default_on);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

void flatten(const json& value, const std::string& prefix,
             std::vector<std::pair<std::string, std::string>>& cells) {
  if (value.is_object()) {
    for (const auto& [key, v] : value.items()) {
      flatten(v, prefix.empty() ? key : prefix + "." + key, cells);
    }
  } else if (value.is_array()) {
    std::string joined;
    for (const auto& v : value) {
      if (!joined.empty()) joined += "x";
      joined += v.is_string() ? v.get<std::string>() : v.dump();
    }
    cells.emplace_back(prefix, joined);
  } else if (value.is_string()) {
    cells.emplace_back(prefix, value.get<std::string>());
  } else {
    cells.emplace_back(prefix, value.is_null() ? "" : value.dump());
  }
}

}  // namespace

void apply_config_file(RunConfig& c, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::string line;
  int line_no = 0;
  bool weights_seen = false, layers_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path.string() + ":" + std::to_string(line_no) +
                       ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "weights") {
      if (!weights_seen) c.weights.clear();
      weights_seen = true;
      for (auto& p : split(value, ',')) c.weights.push_back(p);
    } else if (key == "layer") {
      if (!layers_seen) c.layers.clear();
      layers_seen = true;
      c.layers.push_back(value);
    } else if (key == "activations") {
      c.activations = value;
    } else if (key == "model") {
      c.model = value;
    } else if (key == "group-size") {
      c.group_size = parse_number<std::uint32_t>(key, value);
    } else if (key == "solver") {
      c.solver = value;
    } else if (key == "act-bits") {
      c.act_bits = parse_number<int>(key, value);
    } else if (key == "scale-bits") {
      c.scale_bits = parse_number<int>(key, value);
    } else if (key == "prune-frac") {
      c.prune_fraction = parse_number<double>(key, value);
    } else if (key == "gaussian-rule") {
      c.gaussian_rule = value;
    } else if (key == "seed") {
      c.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "out") {
      c.out = value;
    } else if (key == "report") {
      c.report = value;
    } else if (key == "exempt-first") {
      c.exempt_first = parse_bool(key, value);
    } else if (key == "stride") {
      c.stride = parse_number<std::uint32_t>(key, value);
    } else if (key == "pad") {
      c.pad = parse_number<std::uint32_t>(key, value);
    } else if (key == "out-size") {
      c.out_size = value;
    } else if (key == "sweep") {
      c.sweep = parse_bool(key, value);
    } else if (key == "fma-cost") {
      c.fma_cost = parse_number<double>(key, value);
    } else if (key == "ternary-cost") {
      c.ternary_cost = parse_number<double>(key, value);
    } else if (key == "exempt-cost") {
      c.exempt_cost = parse_number<double>(key, value);
    } else if (key == "dist") {
      c.dist = value;
    } else if (key == "dims") {
      c.dims = value;
    } else if (key == "scale") {
      c.scale = parse_number<double>(key, value);
    } else if (key == "nonneg") {
      c.nonneg = parse_bool(key, value);
    } else {
      throw UsageError(path.string() + ":" + std::to_string(line_no) +
                       ": unknown key '" + key + "'");
    }
  }
}

void validate(const RunConfig& c) {
  if (c.group_size < 1) throw UsageError("--group-size must be at least 1");
  if (c.act_bits && *c.act_bits != 4 && *c.act_bits != 8) {
    throw UsageError("--act-bits must be 4 or 8");
  }
  if (c.scale_bits != 4 && c.scale_bits != 8) {
    throw UsageError("--scale-bits must be 4 or 8");
  }
  if (!(c.prune_fraction >= 0.0 && c.prune_fraction < 1.0)) {
    throw UsageError("--prune-frac must be in [0, 1)");
  }
  if (c.report != "json" && c.report != "csv") {
    throw UsageError("--report must be json or csv");
  }
  if (c.gaussian_rule != "sigma" && c.gaussian_rule != "mean-abs") {
    throw UsageError("--gaussian-rule must be sigma or mean-abs");
  }
  if (c.stride < 1) throw UsageError("--stride must be at least 1");
  try {
    grouping::solver_from_string(c.solver);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

json cmd_analyze(const RunConfig& c) {
  validate(c);
  const auto rule = gaussian_rule(c);
  json layers = json::array();
  for (std::size_t i = 0; i < c.weights.size(); ++i) {
    const auto& path = c.weights[i];
    layers.push_back(for_layer(i, path, [&] {
      const WeightTensor tensor = load_npy(path);
      const auto w = tensor.data();
      const auto sel = distfit::select_distribution(w, c.prune_fraction);
      const auto uniform = distfit::estimate(w, distfit::Family::kUniform);

      const double dg = distfit::analytic_delta(sel.gaussian, rule);
      const double de = distfit::analytic_delta(sel.exponential);
      const double du = distfit::analytic_delta(uniform);
      const double eg = ternary::solve_with_threshold(w, dg).error;
      const double ee = ternary::solve_with_threshold(w, de).error;
      const double eu = ternary::solve_with_threshold(w, du).error;
      const bool gaussian = sel.family == distfit::Family::kGaussian;
      const double selected_error = gaussian ? eg : ee;
      const auto brute = ternary::solve_symmetric_brute(w);

      return json{
          {"index", i},
          {"path", path},
          {"dims", dims_json(tensor.dims())},
          {"n", tensor.size()},
          {"selected", distfit::to_string(sel.family)},
          {"gaussian",
           {{"sigma_hat", sel.gaussian.sigma_hat},
            {"ks_stat", sel.gaussian.ks_stat},
            {"delta", dg},
            {"error", eg}}},
          {"exponential",
           {{"mean_abs", sel.exponential.mean_abs},
            {"ks_stat", sel.exponential.ks_stat},
            {"delta", de},
            {"error", ee}}},
          {"uniform",
           {{"a_hat", uniform.a_hat},
            {"ks_stat", uniform.ks_stat},
            {"delta", du},
            {"error", eu}}},
          {"selected_delta", gaussian ? dg : de},
          {"selected_error", selected_error},
          {"brute", {{"delta", brute.delta_pos}, {"error", brute.error}}},
          {"improvement_percent",
           eg > 0.0 ? 100.0 * (eg - selected_error) / eg : 0.0},
      };
    }));
  }
  return {{"command", "analyze"},
          {"seed", c.seed},
          {"prune_fraction", c.prune_fraction},
          {"gaussian_rule", c.gaussian_rule},
          {"layers", layers}};
}

json cmd_ternarize(const RunConfig& c) {
  validate(c);
  if (c.out.empty()) throw UsageError("ternarize: --out PATH is required");
  if (c.weights.empty()) throw UsageError("ternarize: at least one --weights PATH");

  grouping::TernarizeOptions opt;
  opt.solver = grouping::solver_from_string(c.solver);
  opt.scale_bits = c.scale_bits;
  opt.activation_bits = c.act_bits.value_or(8);
  opt.prune_fraction = c.prune_fraction;
  opt.gaussian_rule = gaussian_rule(c);

  std::vector<grouping::FgqLayer> model;
  json layers = json::array();
  double pre_total = 0.0, post_total = 0.0;
  for (std::size_t i = 0; i < c.weights.size(); ++i) {
    const auto& path = c.weights[i];
    layers.push_back(for_layer(i, path, [&] {
      const WeightTensor w = load_npy(path);
      double energy = 0.0;
      for (double v : w.data()) energy += v * v;
      json entry{{"index", i}, {"path", path}, {"dims", dims_json(w.dims())}};

      if (exempt(c, i, false)) {
        auto layer = grouping::quantize_full_precision_layer(w, opt.activation_bits);
        const auto deq = grouping::dequantize(layer);
        const auto m = inference::error_metrics(w.data(), deq.data());
        const double err = m.rel_frobenius * m.rel_frobenius * energy;
        post_total += err;
        entry.update({{"path_kind", "dfp8"},
                      {"weight_frac_bits", layer.weights.frac_bits},
                      {"pre_quant_error", 0.0},
                      {"post_quant_error", err},
                      {"weight_energy", energy},
                      {"weight_sqnr_db", number_or_null(m.sqnr_db)}});
        model.push_back(std::move(layer));
        return entry;
      }

      auto result = grouping::fgq_ternarize(
          w, grouping::partition_static(w.dims(), c.group_size), opt);
      std::size_t kept = 0;
      for (const auto& g : result.groups) kept += g.kept_count;
      pre_total += result.solver_error;
      post_total += result.quantized_error;
      const auto deq = grouping::dequantize(result.layer);
      const auto m = inference::error_metrics(w.data(), deq.data());
      entry.update({{"path_kind", "ternary"},
                    {"group_size", c.group_size},
                    {"groups", result.layer.partition.group_count()},
                    {"solver", c.solver},
                    {"alpha_frac_bits", result.layer.alphas.frac_bits},
                    {"kept_fraction",
                     static_cast<double>(kept) / static_cast<double>(w.size())},
                    {"pre_quant_error", result.solver_error},
                    {"post_quant_error", result.quantized_error},
                    {"weight_energy", energy},
                    {"weight_sqnr_db", number_or_null(m.sqnr_db)}});
      if (result.analytic_delta) entry["analytic_delta"] = *result.analytic_delta;
      if (result.selected_family) {
        entry["selected_family"] = distfit::to_string(*result.selected_family);
      }
      model.push_back(std::move(result.layer));
      return entry;
    }));
  }
  write_fgq(c.out, model);
  return {{"command", "ternarize"},
          {"seed", c.seed},
          {"solver", c.solver},
          {"group_size", c.group_size},
          {"scale_bits", c.scale_bits},
          {"act_bits", opt.activation_bits},
          {"model_path", c.out},
          {"pre_quant_error", pre_total},
          {"post_quant_error", post_total},
          {"layers", layers}};
}

json cmd_simulate(const RunConfig& c) {
  validate(c);
  if (c.model.empty()) throw UsageError("simulate: --model PATH is required");
  if (c.activations.empty()) throw UsageError("simulate: --activations PATH is required");

  auto model = read_fgq(c.model);
  if (!c.weights.empty() && c.weights.size() != model.size()) {
    throw UsageError("simulate: pass one --weights file per model layer (" +
                     std::to_string(model.size()) + ")");
  }
  const inference::ConvSpec spec{c.stride, c.pad};
  inference::Activation x = inference::activation_from_npy(load_npy_array(c.activations));
  inference::Activation x_ref = x;

  json layers = json::array();
  std::optional<inference::ErrorMetrics> final_fp;
  for (std::size_t i = 0; i < model.size(); ++i) {
    auto& layer = model[i];
    if (c.act_bits) layer.precision.activation_bits = static_cast<std::uint8_t>(*c.act_bits);
    const auto xq = inference::quantize_activations(x, layer.precision.activation_bits);
    const auto result = inference::conv_fgq(layer, xq, spec);
    const auto exact = inference::conv_reference(grouping::dequantize(layer),
                                                 inference::dequantize(xq), spec);
    json entry{
        {"index", i},
        {"path_kind", layer.full_precision_weights ? "dfp8" : "ternary"},
        {"act_bits", layer.precision.activation_bits},
        {"act_frac_bits", xq.data.frac_bits},
        {"output_frac_bits", result.output_frac_bits},
        {"output_dims", json::array({result.output.channels, result.output.height,
                                     result.output.width})},
        {"vs_dequantized",
         metrics_json(inference::error_metrics(exact.values, result.output.values))},
    };
    if (!c.weights.empty()) {
      const auto& path = c.weights[i];
      const auto w = for_layer(i, path, [&] { return load_npy(path); });
      x_ref = inference::conv_reference(w, x_ref, spec);
      final_fp = inference::error_metrics(x_ref.values, result.output.values);
      entry["vs_full_precision"] = metrics_json(*final_fp);
    }
    layers.push_back(std::move(entry));
    x = result.output;
  }
  if (!c.out.empty()) {
    save_npy_array(c.out, inference::activation_to_npy(x, NpyDtype::kFloat64));
  }
  json report{{"command", "simulate"},
              {"seed", c.seed},
              {"model_path", c.model},
              {"stride", c.stride},
              {"pad", c.pad},
              {"layers", layers}};
  if (final_fp) report["final_vs_full_precision"] = metrics_json(*final_fp);
  return report;
}

json cmd_perf(const RunConfig& c) {
  validate(c);
  const auto hw = parse_dims(c.out_size, 2, 2, "--out-size");
  std::vector<perf::LayerShape> shapes;
  std::vector<bool> fixed_group;  // model layers keep their stored N
  for (const auto& spec : c.layers) {
    const auto v = parse_dims(spec, 6, 6, "--layer");
    shapes.push_back({{v[0], v[1], v[2], v[3]}, v[4], v[5], c.group_size, false});
    fixed_group.push_back(false);
  }
  for (std::size_t i = 0; i < c.weights.size(); ++i) {
    const auto& path = c.weights[i];
    const auto arr = for_layer(i, path, [&] { return load_npy_array(path); });
    if (arr.shape.size() != 4) throw UsageError("perf: '" + path + "' is not 4-D");
    shapes.push_back({{static_cast<std::uint32_t>(arr.shape[0]),
                       static_cast<std::uint32_t>(arr.shape[1]),
                       static_cast<std::uint32_t>(arr.shape[2]),
                       static_cast<std::uint32_t>(arr.shape[3])},
                      hw[0], hw[1], c.group_size, false});
    fixed_group.push_back(false);
  }
  if (!c.model.empty()) {
    for (const auto& layer : read_fgq(c.model)) {
      shapes.push_back({layer.partition.dims(), hw[0], hw[1],
                        layer.partition.group_size(), layer.full_precision_weights});
      fixed_group.push_back(true);
    }
  }
  if (!shapes.empty() && exempt(c, 0, true)) shapes.front().exempt = true;

  const perf::CostModel cost{c.fma_cost, c.ternary_cost, c.exempt_cost};
  auto speedup = [&](const perf::OpsReport& r) {
    return r.fma_baseline == 0 ? 0.0 : perf::project_speedup(r, cost);
  };

  json layers = json::array();
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto r = perf::count_ops(std::span(&shapes[i], 1));
    layers.push_back({{"index", i},
                      {"dims", dims_json(shapes[i].dims)},
                      {"out_size", json::array({shapes[i].out_h, shapes[i].out_w})},
                      {"group_size", shapes[i].group_size},
                      {"exempt", shapes[i].exempt},
                      {"fma_baseline", r.fma_baseline},
                      {"mult_count", r.mult_count},
                      {"ternary_acc_count", r.ternary_acc_count},
                      {"fraction_eliminated", r.fraction_eliminated}});
  }
  const auto total = perf::count_ops(shapes);
  json report{{"command", "perf"},
              {"seed", c.seed},
              {"group_size", c.group_size},
              {"cost_model",
               {{"fma_cost", cost.fma_cost},
                {"ternary_cost", cost.ternary_cost},
                {"exempt_cost", cost.exempt_cost}}},
              {"layers", layers},
              {"total",
               {{"fma_baseline", total.fma_baseline},
                {"mult_count", total.mult_count},
                {"ternary_acc_count", total.ternary_acc_count},
                {"exempt_fma", total.exempt_fma},
                {"fraction_eliminated", total.fraction_eliminated},
                {"projected_speedup", speedup(total)}}}};

  if (c.sweep || c.report == "csv") {
    json sweep = json::array();
    for (auto n : kSweepSizes) {
      auto swept = shapes;
      for (std::size_t i = 0; i < swept.size(); ++i) {
        if (!fixed_group[i] || !swept[i].exempt) swept[i].group_size = n;
      }
      const auto r = perf::count_ops(swept);
      sweep.push_back({{"group_size", n},
                       {"fma_baseline", r.fma_baseline},
                       {"mult_count", r.mult_count},
                       {"ternary_acc_count", r.ternary_acc_count},
                       {"fraction_eliminated", r.fraction_eliminated},
                       {"projected_speedup", speedup(r)}});
    }
    report["sweep"] = sweep;
  }
  return report;
}

json cmd_synth(const RunConfig& c) {
  if (c.out.empty()) throw UsageError("synth: --out PATH is required");
  const auto dims = parse_dims(c.dims, 3, 4, "--dims");
  if (!(c.scale > 0.0)) throw UsageError("synth: --scale must be positive");

  std::mt19937_64 rng(c.seed);
  std::size_t count = 1;
  for (auto d : dims) count *= d;
  std::vector<double> values(count);
  std::normal_distribution<double> normal(0.0, c.scale);
  std::exponential_distribution<double> expo(1.0 / c.scale);
  std::uniform_real_distribution<double> uniform(-c.scale, c.scale);
  std::bernoulli_distribution coin(0.5);
  for (auto& v : values) {
    if (c.dist == "gaussian") {
      v = normal(rng);
    } else if (c.dist == "exponential") {
      const double m = expo(rng);
      v = coin(rng) ? m : -m;
    } else if (c.dist == "uniform") {
      v = uniform(rng);
    } else {
      throw UsageError("synth: --dist must be gaussian, exponential or uniform");
    }
    if (c.nonneg) v = std::abs(v);
  }
  NpyArray arr;
  arr.shape.assign(dims.begin(), dims.end());
  arr.dtype = NpyDtype::kFloat32;
  arr.data = std::move(values);
  save_npy_array(c.out, arr);
  return {{"command", "synth"},
          {"seed", c.seed},
          {"dist", c.dist},
          {"scale", c.scale},
          {"nonneg", c.nonneg},
          {"dims", dims},
          {"out", c.out}};
}

std::string report_csv(const json& report) {
  const json& rows = report.contains("sweep") ? report["sweep"] : report["layers"];
  std::vector<std::string> columns;
  std::vector<std::map<std::string, std::string>> table;
  for (const auto& row : rows) {
    std::vector<std::pair<std::string, std::string>> cells;
    flatten(row, "", cells);
    std::map<std::string, std::string> record;
    for (auto& [k, v] : cells) {
      if (std::find(columns.begin(), columns.end(), k) == columns.end()) {
        columns.push_back(k);
      }
      record[k] = v;
    }
    table.push_back(std::move(record));
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out << (i ? "," : "") << columns[i];
  }
  out << "\n";
  for (const auto& record : table) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      const auto it = record.find(columns[i]);
      out << (i ? "," : "") << (it == record.end() ? "" : it->second);
    }
    out << "\n";
  }
  return out.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  int act_bits = 8;
  std::string exempt_first;
  std::string config_path;

  CLI::App app{"Fine-grained ternary quantization toolkit", "fgq"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value config file (flags win)");
    sub->add_option("--seed", cfg.seed, "seed recorded in reports");
    sub->add_option("--out", cfg.out, "output path");
    sub->add_option("--report", cfg.report, "report format: json or csv");
  };
  auto weights_opt = [&](CLI::App* sub) {
    sub->add_option("--weights", cfg.weights, "4-D weight NPY file(s), one per layer");
  };
  auto quant_opts = [&](CLI::App* sub) {
    sub->add_option("--group-size", cfg.group_size, "group size N along input channels");
    sub->add_option("--act-bits", act_bits, "activation bits (4 or 8)");
    sub->add_option("--scale-bits", cfg.scale_bits, "scale bits (4 or 8)");
    sub->add_option("--exempt-first", exempt_first,
                    "first layer takes the 8-bit weight path (true/false)");
  };

  auto* analyze = app.add_subcommand("analyze", "fit weight distributions per layer");
  common(analyze);
  weights_opt(analyze);
  analyze->add_option("--prune-frac", cfg.prune_fraction, "heavy-tail prune fraction");
  analyze->add_option("--gaussian-rule", cfg.gaussian_rule, "sigma or mean-abs");

  auto* ternarize = app.add_subcommand("ternarize", "write an FGQ1 model");
  common(ternarize);
  weights_opt(ternarize);
  quant_opts(ternarize);
  ternarize->add_option("--solver", cfg.solver, "brute, two_alpha, analytic_auto, "
                                                "analytic_gaussian, analytic_exponential, rms");
  ternarize->add_option("--prune-frac", cfg.prune_fraction, "heavy-tail prune fraction");
  ternarize->add_option("--gaussian-rule", cfg.gaussian_rule, "sigma or mean-abs");

  auto* simulate = app.add_subcommand("simulate", "emulate the low-precision convolution");
  common(simulate);
  weights_opt(simulate);
  simulate->add_option("--model", cfg.model, "FGQ1 model file");
  simulate->add_option("--activations", cfg.activations, "(C,H,W) activation NPY");
  simulate->add_option("--act-bits", act_bits, "override activation bits (4 or 8)");
  simulate->add_option("--stride", cfg.stride, "convolution stride");
  simulate->add_option("--pad", cfg.pad, "zero padding");

  auto* perf = app.add_subcommand("perf", "count multiplies vs ternary accumulations");
  common(perf);
  weights_opt(perf);
  quant_opts(perf);
  perf->add_option("--model", cfg.model, "FGQ1 model file");
  perf->add_option("--layer", cfg.layers, "K,C,R,S,HOUT,WOUT");
  perf->add_option("--out-size", cfg.out_size, "HOUT,WOUT for --weights/--model layers");
  perf->add_flag("--sweep", cfg.sweep, "add the N sweep 1..64");
  perf->add_option("--fma-cost", cfg.fma_cost, "cost of one full-precision multiply-add (default 1)");
  perf->add_option("--ternary-cost", cfg.ternary_cost, "cost of one ternary add/subtract (default 1/16)");
  perf->add_option("--exempt-cost", cfg.exempt_cost, "cost of one multiply in an exempt layer (default 1)");

  auto* synth = app.add_subcommand("synth", "write a seeded synthetic NPY fixture");
  common(synth);
  synth->add_option("--dist", cfg.dist, "gaussian, exponential or uniform");
  synth->add_option("--dims", cfg.dims, "K,C,R,S (weights) or C,H,W (activations)");
  synth->add_option("--scale", cfg.scale, "sigma / mean magnitude / half range");
  synth->add_flag("--nonneg", cfg.nonneg, "take absolute values");

  try {
    // Config values are applied first so explicitly given flags override them.
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i] == "--config") apply_config_file(cfg, args[i + 1]);
      if (args[i].rfind("--config=", 0) == 0) apply_config_file(cfg, args[i].substr(9));
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);

    auto given = [](CLI::App* sub, const char* name) {
      return sub->parsed() && sub->get_option(name)->count() > 0;
    };
    for (auto* sub : {ternarize, simulate, perf}) {
      if (given(sub, "--act-bits")) cfg.act_bits = act_bits;
    }
    for (auto* sub : {ternarize, perf}) {
      if (given(sub, "--exempt-first")) cfg.exempt_first = parse_bool("--exempt-first", exempt_first);
    }

    json report;
    bool report_to_out = false;
    if (analyze->parsed()) {
      cfg.command = "analyze";
      report = cmd_analyze(cfg);
      report_to_out = true;
    } else if (ternarize->parsed()) {
      cfg.command = "ternarize";
      report = cmd_ternarize(cfg);
    } else if (simulate->parsed()) {
      cfg.command = "simulate";
      report = cmd_simulate(cfg);
    } else if (perf->parsed()) {
      cfg.command = "perf";
      report = cmd_perf(cfg);
      report_to_out = true;
    } else {
      cfg.command = "synth";
      report = cmd_synth(cfg);
    }
    const std::string text = cfg.report == "csv" ? report_csv(report) : report.dump(2) + "\n";
    if (report_to_out && !cfg.out.empty()) {
      write_text(cfg.out, text);
    } else {
      out << text;
    }
    return 0;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "fgq: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    err << "fgq: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "fgq: error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace fgq::cli
