// Copyright 2026 The snnprune Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SNNPRUNE_DATA_IO_HPP_
#define SNNPRUNE_DATA_IO_HPP_

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <zlib.h>

#include "snnprune/tensor.hpp"

namespace snnprune {

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Dataset {
  Tensor inputs;  // [n x features], values in [0, 1]
  std::vector<int> labels;
  std::size_t classes = 0;
  std::string split;

  std::size_t size() const { return labels.size(); }
};

namespace detail {

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

inline std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& in) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
    throw IoError("zlib init failed");
  std::vector<std::uint8_t> out;
  out.reserve(in.size() * 4);
  std::vector<std::uint8_t> buf(1 << 16);
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = buf.data();
    zs.avail_out = static_cast<uInt>(buf.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw FormatError("corrupt gzip stream");
    }
    out.insert(out.end(), buf.data(), buf.data() + (buf.size() - zs.avail_out));
  }
  inflateEnd(&zs);
  return out;
}

inline std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
         (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

// Reads an IDX file; transparently inflates gzip. Falls back to "<path>.gz"
// when the plain path does not exist.
inline std::vector<std::uint8_t> read_idx_bytes(const std::string& path) {
  std::string actual = path;
  if (!std::filesystem::exists(actual) &&
      std::filesystem::exists(actual + ".gz"))
    actual += ".gz";
  std::vector<std::uint8_t> bytes = read_file_bytes(actual);
  if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b)
    bytes = gunzip(bytes);
  return bytes;
}

}  // namespace detail

// IDX image/label pair (big-endian header; magic 0x00000803 for images,
// 0x00000801 for labels). Pixels come out divided by 255.
inline Dataset load_mnist_idx(const std::string& images_path,
                              const std::string& labels_path,
                              const std::string& split = "train") {
  const auto img = detail::read_idx_bytes(images_path);
  if (img.size() < 16) throw FormatError("truncated IDX image file");
  if (detail::be32(img.data()) != 0x00000803u)
    throw FormatError("bad IDX image magic in " + images_path);
  const std::size_t n = detail::be32(img.data() + 4);
  const std::size_t rows = detail::be32(img.data() + 8);
  const std::size_t cols = detail::be32(img.data() + 12);
  if (img.size() != 16 + n * rows * cols)
    throw FormatError("truncated IDX image payload");

  const auto lab = detail::read_idx_bytes(labels_path);
  if (lab.size() < 8) throw FormatError("truncated IDX label file");
  if (detail::be32(lab.data()) != 0x00000801u)
    throw FormatError("bad IDX label magic in " + labels_path);
  const std::size_t nl = detail::be32(lab.data() + 4);
  if (lab.size() != 8 + nl) throw FormatError("truncated IDX label payload");
  if (nl != n)
    throw FormatError("image/label count mismatch: " + std::to_string(n) +
                      " vs " + std::to_string(nl));

  Dataset ds;
  ds.split = split;
  ds.classes = 10;
  ds.inputs = Tensor({n, rows * cols});
  for (std::size_t i = 0; i < n * rows * cols; ++i)
    ds.inputs[i] = static_cast<double>(img[16 + i]) / 255.0;
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ds.labels[i] = lab[8 + i];
    if (ds.labels[i] < 0 || ds.labels[i] >= 10)
      throw FormatError("label out of range");
  }
  return ds;
}

// Class-conditional Gaussian blobs with fixed unit-norm means, balanced
// round-robin labels, deterministic for a given seed. Linearly separable at
// the default spread. The class means depend only on `seed`; `noise_stream`
// selects an independent sample of the within-class noise, so train and test
// splits share means but not samples.
inline Dataset synthetic_dataset(std::uint64_t seed, std::size_t n,
                                 std::size_t classes, std::size_t features,
                                 double spread = 0.25,
                                 std::uint64_t noise_stream = 0) {
  if (n < 1 || classes < 1 || features < 1)
    throw std::invalid_argument("synthetic_dataset: n, classes, features >= 1");
  std::mt19937_64 mean_rng(seed);
  std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ull + noise_stream));
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<std::vector<double>> means(classes,
                                         std::vector<double>(features));
  for (auto& m : means) {
    double norm = 0.0;
    for (double& x : m) { x = gauss(mean_rng); norm += x * x; }
    norm = std::sqrt(norm);
    for (double& x : m) x /= norm > 0 ? norm : 1.0;
  }

  Dataset ds;
  ds.split = "train";
  ds.classes = classes;
  ds.inputs = Tensor({n, features});
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % classes;
    ds.labels[i] = static_cast<int>(c);
    for (std::size_t j = 0; j < features; ++j) {
      const double x = means[c][j] + spread * gauss(rng);
      ds.inputs[i * features + j] = std::clamp(0.5 + 0.4 * x, 0.0, 1.0);
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Binary checkpoint container: magic, version, little-endian lengths, raw
// f64 payloads. Round trips bit-exactly, including RNG state.

class BinWriter {
 public:
  explicit BinWriter(const std::string& path) : f_(path, std::ios::binary) {
    if (!f_) throw IoError("cannot open for write: " + path);
  }

  void u8(std::uint8_t v) { raw(&v, 1); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void u64(std::uint64_t v) { raw(&v, 8); }
  void i64(std::int64_t v) { raw(&v, 8); }
  void f64(double v) { raw(&v, 8); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void vec_f64(const std::vector<double>& v) {
    u64(v.size());
    raw(v.data(), v.size() * 8);
  }
  void vec_u8(const std::vector<std::uint8_t>& v) {
    u64(v.size());
    raw(v.data(), v.size());
  }
  void vec_u64(const std::vector<std::uint64_t>& v) {
    u64(v.size());
    raw(v.data(), v.size() * 8);
  }

  void close() {
    f_.flush();
    if (!f_) throw IoError("write failure");
    f_.close();
  }

 private:
  void raw(const void* p, std::size_t len) {
    f_.write(static_cast<const char*>(p), static_cast<std::streamsize>(len));
    if (!f_) throw IoError("write failure");
  }
  std::ofstream f_;
};

class BinReader {
 public:
  explicit BinReader(const std::string& path) : f_(path, std::ios::binary) {
    if (!f_) throw IoError("cannot open for read: " + path);
  }

  std::uint8_t u8() { std::uint8_t v; raw(&v, 1); return v; }
  std::uint32_t u32() { std::uint32_t v; raw(&v, 4); return v; }
  std::uint64_t u64() { std::uint64_t v; raw(&v, 8); return v; }
  std::int64_t i64() { std::int64_t v; raw(&v, 8); return v; }
  double f64() { double v; raw(&v, 8); return v; }
  std::string str() {
    const std::uint64_t len = checked_count(u64(), 1);
    std::string s(len, '\0');
    raw(s.data(), len);
    return s;
  }
  std::vector<double> vec_f64() {
    const std::uint64_t len = checked_count(u64(), 8);
    std::vector<double> v(len);
    raw(v.data(), len * 8);
    return v;
  }
  std::vector<std::uint8_t> vec_u8() {
    const std::uint64_t len = checked_count(u64(), 1);
    std::vector<std::uint8_t> v(len);
    raw(v.data(), len);
    return v;
  }
  std::vector<std::uint64_t> vec_u64() {
    const std::uint64_t len = checked_count(u64(), 8);
    std::vector<std::uint64_t> v(len);
    raw(v.data(), len * 8);
    return v;
  }

 private:
  std::uint64_t checked_count(std::uint64_t count, std::uint64_t elem_size) {
    // A declared length beyond the file size means a corrupt container;
    // fail before attempting a giant allocation.
    const auto pos = f_.tellg();
    f_.seekg(0, std::ios::end);
    const auto end = f_.tellg();
    f_.seekg(pos);
    const auto remaining = static_cast<std::uint64_t>(end - pos);
    if (count > remaining / elem_size)
      throw FormatError("checkpoint: declared length exceeds file size");
    return count;
  }

  void raw(void* p, std::size_t len) {
    f_.read(static_cast<char*>(p), static_cast<std::streamsize>(len));
    if (f_.gcount() != static_cast<std::streamsize>(len))
      throw FormatError("checkpoint: unexpected end of file");
  }
  std::ifstream f_;
};

// ---------------------------------------------------------------------------
// Metrics CSV. Fixed header, one flush per row, append never rewrites the
// header.

struct MetricsRow {
  std::uint64_t epoch = 0;
  std::string phase;
  double loss = 0.0;
  double acc = 0.0;
  double s = 0.0;
  double y = 0.0;
  double z = 0.0;
  double resource = 1.0;
  double counted_sparsity = 0.0;
};

class MetricsWriter {
 public:
  static constexpr const char* kHeader =
      "epoch,phase,loss,acc,s,y,z,resource,counted_sparsity";

  explicit MetricsWriter(const std::string& path) {
    const bool fresh = !std::filesystem::exists(path) ||
                       std::filesystem::file_size(path) == 0;
    f_.open(path, std::ios::app);
    if (!f_) throw IoError("cannot open metrics file: " + path);
    if (fresh) f_ << kHeader << "\n" << std::flush;
  }

  void append(const MetricsRow& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%llu,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g",
                  static_cast<unsigned long long>(r.epoch), r.phase.c_str(),
                  r.loss, r.acc, r.s, r.y, r.z, r.resource,
                  r.counted_sparsity);
    f_ << buf << "\n" << std::flush;
    if (!f_) throw IoError("metrics write failure");
  }

 private:
  std::ofstream f_;
};

}  // namespace snnprune

#endif  // SNNPRUNE_DATA_IO_HPP_
