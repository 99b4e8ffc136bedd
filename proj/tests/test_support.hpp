// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0
//
// Oracles and fixtures shared by the unit and acceptance tests. Nothing in
// here calls into the library's solvers; the point is to have a second,
// independently written answer to compare against.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <regex>
#include <string>
#include <vector>

#include "fgq/fgq.hpp"

namespace fgq::testing {

using Rng = std::mt19937_64;

inline std::vector<double> gaussian_vector(Rng& rng, std::size_t n, double sigma = 1.0) {
  std::normal_distribution<double> d(0.0, sigma);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline std::vector<double> laplace_vector(Rng& rng, std::size_t n, double mean_abs = 1.0) {
  std::exponential_distribution<double> e(1.0 / mean_abs);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> v(n);
  for (auto& x : v) x = coin(rng) ? e(rng) : -e(rng);
  return v;
}

inline std::vector<double> uniform_vector(Rng& rng, std::size_t n, double a = 1.0) {
  std::uniform_real_distribution<double> u(-a, a);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// Mix of shapes: plain Gaussian, heavy tails, exact zeros and repeated
// magnitudes, so the tie-handling paths get exercised.
inline std::vector<double> mixed_vector(Rng& rng, std::size_t n) {
  std::uniform_int_distribution<int> kind(0, 3);
  switch (kind(rng)) {
    case 0:
      return gaussian_vector(rng, n);
    case 1:
      return laplace_vector(rng, n);
    case 2: {
      auto v = gaussian_vector(rng, n);
      std::bernoulli_distribution zero(0.3);
      for (auto& x : v) {
        if (zero(rng)) x = 0.0;
      }
      return v;
    }
    default: {
      std::uniform_int_distribution<int> level(-3, 3);
      std::vector<double> v(n);
      for (auto& x : v) x = 0.25 * level(rng);
      return v;
    }
  }
}

inline WeightTensor random_tensor(Rng& rng, Dims4 dims, double sigma = 1.0) {
  return WeightTensor(dims, gaussian_vector(rng, dims.count(), sigma));
}

inline double sum_squares(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

inline bool close_rel(double a, double b, double rel, double abs_floor = 0.0) {
  return std::abs(a - b) <= std::max(rel * std::max(std::abs(a), std::abs(b)), abs_floor);
}

// Minimum of ||w - alpha*s||^2 over all 3^n sign patterns s and alpha >= 0.
// Walks the patterns as a base-3 odometer, keeping <w,s> and ||s||^2 updated
// incrementally.
inline double exhaustive_ternary_error(std::span<const double> w) {
  const std::size_t n = w.size();
  const double energy = sum_squares(w);
  std::vector<int> digit(n, 0);  // 0, 1, 2 -> sign 0, +1, -1
  const int sign_of[3] = {0, 1, -1};
  double dot = 0.0;
  long count = 0;
  double best_score = 0.0;
  std::vector<int> best_digits;
  while (true) {
    std::size_t i = 0;
    while (i < n && digit[i] == 2) {
      dot -= w[i] * sign_of[2];
      count -= 1;
      digit[i] = 0;
      ++i;
    }
    if (i == n) break;
    const int old = sign_of[digit[i]];
    ++digit[i];
    const int now = sign_of[digit[i]];
    dot += w[i] * (now - old);
    count += now * now - old * old;
    if (count > 0 && dot > 0.0) {
      const double score = dot * dot / count;
      if (score > best_score) {
        best_score = score;
        best_digits = digit;
      }
    }
  }
  if (best_digits.empty()) return energy;
  // The running dot drifts over 3^n updates, so score the winner directly.
  std::vector<std::int8_t> s(n);
  double d = 0.0;
  long c = 0;
  for (std::size_t j = 0; j < n; ++j) {
    s[j] = static_cast<std::int8_t>(sign_of[best_digits[j]]);
    d += w[j] * s[j];
    c += s[j] * s[j];
  }
  double e = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double r = w[j] - d / c * s[j];
    e += r * r;
  }
  return e;
}

// Direct error for a given support and scale.
inline double pattern_error(std::span<const double> w, std::span<const std::int8_t> s,
                            double alpha) {
  double e = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = w[i] - alpha * s[i];
    e += d * d;
  }
  return e;
}

// Second convolution: scatters each input pixel into the outputs it feeds,
// instead of gathering per output as the library does.
inline inference::Activation conv_scatter(const WeightTensor& w,
                                          const inference::Activation& x,
                                          std::uint32_t stride, std::uint32_t pad) {
  const auto& d = w.dims();
  const long ho = (static_cast<long>(x.height) + 2 * pad - d.r) / stride + 1;
  const long wo = (static_cast<long>(x.width) + 2 * pad - d.s) / stride + 1;
  inference::Activation y;
  y.channels = d.k;
  y.height = static_cast<std::uint32_t>(ho);
  y.width = static_cast<std::uint32_t>(wo);
  y.values.assign(std::size_t{d.k} * ho * wo, 0.0);
  for (std::uint32_t c = 0; c < x.channels; ++c) {
    for (long iy = 0; iy < x.height; ++iy) {
      for (long ix = 0; ix < x.width; ++ix) {
        const double v = x.values[(std::size_t{c} * x.height + iy) * x.width + ix];
        for (std::uint32_t r = 0; r < d.r; ++r) {
          const long ty = iy + pad - r;
          if (ty < 0 || ty % stride != 0 || ty / stride >= ho) continue;
          for (std::uint32_t s = 0; s < d.s; ++s) {
            const long tx = ix + pad - s;
            if (tx < 0 || tx % stride != 0 || tx / stride >= wo) continue;
            for (std::uint32_t k = 0; k < d.k; ++k) {
              y.values[(std::size_t{k} * ho + ty / stride) * wo + tx / stride] +=
                  w.at(k, c, r, s) * v;
            }
          }
        }
      }
    }
  }
  return y;
}

inline inference::Activation random_activation(Rng& rng, std::uint32_t c, std::uint32_t h,
                                               std::uint32_t w, double sigma = 1.0) {
  inference::Activation a;
  a.channels = c;
  a.height = h;
  a.width = w;
  a.values = gaussian_vector(rng, std::size_t{c} * h * w, sigma);
  return a;
}

// Header fields pulled out with regular expressions, independent of the
// library's dictionary parser.
struct NpyHeaderFields {
  bool ok = false;
  int major = 0;
  std::string descr;
  bool fortran = false;
  std::vector<std::size_t> shape;
};

inline NpyHeaderFields reference_npy_header(const std::vector<std::uint8_t>& bytes) {
  NpyHeaderFields f;
  if (bytes.size() < 10 || bytes[0] != 0x93) return f;
  f.major = bytes[6];
  std::size_t len = 0, start = 0;
  if (f.major == 1) {
    len = bytes[8] | (bytes[9] << 8);
    start = 10;
  } else {
    len = bytes[8] | (bytes[9] << 8) | (std::size_t{bytes[10]} << 16) |
          (std::size_t{bytes[11]} << 24);
    start = 12;
  }
  const std::string header(bytes.begin() + start, bytes.begin() + start + len);
  std::smatch m;
  if (!std::regex_search(header, m, std::regex("'descr':\\s*'([^']*)'"))) return f;
  f.descr = m[1];
  if (!std::regex_search(header, m, std::regex("'fortran_order':\\s*(True|False)"))) return f;
  f.fortran = m[1] == "True";
  if (!std::regex_search(header, m, std::regex("'shape':\\s*\\(([^)]*)\\)"))) return f;
  const std::string dims = m[1];
  const std::regex num("\\d+");
  for (auto it = std::sregex_iterator(dims.begin(), dims.end(), num);
       it != std::sregex_iterator(); ++it) {
    f.shape.push_back(std::stoul(it->str()));
  }
  f.ok = true;
  return f;
}

struct NpyCorpusEntry {
  const char* name;
  const char* expect;  // ok, rank, layout, data
  const char* dtype;
  std::vector<std::size_t> shape;
  std::vector<std::uint8_t> bytes;
};

inline const std::vector<NpyCorpusEntry>& npy_corpus() {
  static const std::vector<NpyCorpusEntry> corpus = {
#include "data/npy_corpus.inc"
  };
  return corpus;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("fgq_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fgq::testing
