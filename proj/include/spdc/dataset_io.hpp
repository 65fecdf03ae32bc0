#pragma once

// Binary SPD datasets ("SPDS") and raw float64 matrix dumps.
//
// SPDS layout, little-endian:
//   char[4] "SPDS" | u32 version (1) | u32 N | u32 d | u8 has_labels
//   N * d * d float64, each matrix row-major
//   N u32 labels            (only when has_labels != 0)

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spdc/error.hpp"
#include "spdc/spd.hpp"

namespace spdc {

struct SpdDataset {
  std::vector<SpdMatrix> points;
  std::optional<std::vector<int>> labels;

  Eigen::Index dim() const { return points.empty() ? 0 : points.front().dim(); }
};

namespace io {

inline constexpr std::uint32_t kSpdsVersion = 1;

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) bytes_.push_back(static_cast<char>((v >> s) & 0xff));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int s = 0; s < 64; s += 8) bytes_.push_back(static_cast<char>((bits >> s) & 0xff));
  }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }

  void flush_to(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out.write(bytes_.data(), static_cast<std::streamsize>(bytes_.size()));
    if (!out) throw IoError("short write to '" + path.string() + "'");
  }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  ByteReader(std::vector<unsigned char> bytes, std::string name) : bytes_(std::move(bytes)), name_(std::move(name)) {}

  static ByteReader open(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return {{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()}, path.string()};
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return std::bit_cast<double>(v);
  }
  void expect_magic(const char (&magic)[5]) {
    need(4);
    if (std::memcmp(bytes_.data() + pos_, magic, 4) != 0) throw IoError("'" + name_ + "': bad magic");
    pos_ += 4;
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw IoError("'" + name_ + "': truncated file");
  }

  std::vector<unsigned char> bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace io

inline void write_dataset(const SpdDataset& ds, const std::filesystem::path& path) {
  if (ds.points.empty()) throw UsageError("write_dataset: empty dataset");
  const Eigen::Index d = ds.dim();
  if (ds.labels && ds.labels->size() != ds.points.size())
    throw UsageError("write_dataset: label count does not match point count");
  io::ByteWriter w;
  w.raw("SPDS", 4);
  w.u32(io::kSpdsVersion);
  w.u32(static_cast<std::uint32_t>(ds.points.size()));
  w.u32(static_cast<std::uint32_t>(d));
  w.u8(ds.labels ? 1 : 0);
  for (const auto& x : ds.points) {
    if (x.dim() != d) throw DimensionError("write_dataset: points have differing dimensions");
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) w.f64(x(i, j));
  }
  if (ds.labels)
    for (int l : *ds.labels) {
      if (l < 0) throw UsageError("write_dataset: labels must be nonnegative");
      w.u32(static_cast<std::uint32_t>(l));
    }
  w.flush_to(path);
}

struct DatasetHeader {
  std::uint32_t n = 0;
  std::uint32_t d = 0;
  bool has_labels = false;
};

inline DatasetHeader read_dataset_header(io::ByteReader& r) {
  r.expect_magic("SPDS");
  const std::uint32_t version = r.u32();
  if (version != io::kSpdsVersion) throw IoError("SPDS: unsupported version " + std::to_string(version));
  DatasetHeader h;
  h.n = r.u32();
  h.d = r.u32();
  h.has_labels = r.u8() != 0;
  if (h.n == 0 || h.d == 0) throw IoError("SPDS: empty dataset");
  const std::size_t expected = static_cast<std::size_t>(h.n) * h.d * h.d * 8 + (h.has_labels ? 4u * h.n : 0u);
  if (r.remaining() != expected) throw IoError("SPDS: payload length does not match header");
  return h;
}

/// Matrices whose spectrum already clears `floor` are kept bit-for-bit;
/// anything else is regularized by make_spd.
inline SpdMatrix admit_spd(const Matrix& m, double floor) {
  const EigenPair eig = eigen_sym(detail::symmetric_part(m));
  if (eig.values.minCoeff() >= floor) return SpdMatrix::from_matrix(m);
  return make_spd(m, floor);
}

/// Every matrix is validated through make_spd; floor <= 0 selects the
/// scale-aware default per matrix.
inline SpdDataset read_dataset(const std::filesystem::path& path, double floor = 0.0) {
  io::ByteReader r = io::ByteReader::open(path);
  const DatasetHeader h = read_dataset_header(r);
  SpdDataset ds;
  ds.points.reserve(h.n);
  Matrix m(h.d, h.d);
  for (std::uint32_t k = 0; k < h.n; ++k) {
    for (Eigen::Index i = 0; i < h.d; ++i)
      for (Eigen::Index j = 0; j < h.d; ++j) m(i, j) = r.f64();
    if (!m.allFinite()) throw IoError("SPDS: matrix " + std::to_string(k) + " has non-finite entries");
    if (!detail::is_symmetric(m)) throw IoError("SPDS: matrix " + std::to_string(k) + " is not symmetric");
    ds.points.push_back(admit_spd(m, floor > 0.0 ? floor : default_floor(m)));
  }
  if (h.has_labels) {
    ds.labels.emplace();
    ds.labels->reserve(h.n);
    for (std::uint32_t k = 0; k < h.n; ++k) ds.labels->push_back(static_cast<int>(r.u32()));
  }
  return ds;
}

/// Raw little-endian row-major float64 dump plus "<path>.dims" holding
/// "rows cols".
inline void write_f64_matrix(const Matrix& m, const std::filesystem::path& path) {
  io::ByteWriter w;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) w.f64(m(i, j));
  w.flush_to(path);
  std::ofstream dims(path.string() + ".dims", std::ios::trunc);
  if (!dims) throw IoError("cannot write '" + path.string() + ".dims'");
  dims << m.rows() << " " << m.cols() << "\n";
}

inline Matrix read_f64_matrix(const std::filesystem::path& path) {
  std::ifstream dims(path.string() + ".dims");
  if (!dims) throw IoError("cannot open '" + path.string() + ".dims'");
  long rows = -1, cols = -1;
  if (!(dims >> rows >> cols) || rows < 0 || cols < 0) throw IoError("'" + path.string() + ".dims': malformed");
  io::ByteReader r = io::ByteReader::open(path);
  if (r.remaining() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * 8)
    throw IoError("'" + path.string() + "': size does not match .dims");
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = r.f64();
  return m;
}

}  // namespace spdc
