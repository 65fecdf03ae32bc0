#pragma once

// Region covariance descriptors over grayscale images, plus loaders for
// binary PGM (P5, 8-bit) and the raw float32 "RCMF" format.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spdc/error.hpp"
#include "spdc/spd.hpp"

namespace spdc {

/// Row-major intensities, nominally in [0, 1].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) throw UsageError("GrayImage: dimensions must be positive");
  }

  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

  /// Replicate padding outside the image.
  double clamped(int x, int y) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return at(x, y);
  }
};

/// Per-pixel feature maps sharing one width/height.
struct FeatureStack {
  int width = 0;
  int height = 0;
  std::vector<std::vector<double>> channels;
  std::vector<std::string> channel_names;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(channels.size()); }
};

struct Rect {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// (I, |dI/dx|, |dI/dy|, |d2I/dx2|, |d2I/dy2|) with central differences and
/// replicate borders.
inline FeatureStack texture_features(const GrayImage& img) {
  if (img.width < 3 || img.height < 3) throw UsageError("texture_features: image must be at least 3x3");
  if (img.pixels.size() != static_cast<std::size_t>(img.width) * img.height)
    throw DimensionError("texture_features: pixel count does not match dimensions");

  FeatureStack fs;
  fs.width = img.width;
  fs.height = img.height;
  fs.channel_names = {"intensity", "abs_dx", "abs_dy", "abs_dxx", "abs_dyy"};
  const std::size_t count = img.pixels.size();
  fs.channels.assign(5, std::vector<double>(count));
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * img.width + x;
      const double c = img.at(x, y);
      const double l = img.clamped(x - 1, y), r = img.clamped(x + 1, y);
      const double u = img.clamped(x, y - 1), d = img.clamped(x, y + 1);
      fs.channels[0][p] = c;
      fs.channels[1][p] = std::abs(0.5 * (r - l));
      fs.channels[2][p] = std::abs(0.5 * (d - u));
      fs.channels[3][p] = std::abs(l - 2.0 * c + r);
      fs.channels[4][p] = std::abs(u - 2.0 * c + d);
    }
  }
  return fs;
}

/// Sample covariance (divisor n - 1) of the feature vectors inside `region`.
inline Matrix region_sample_covariance(const FeatureStack& stack, const Rect& region) {
  if (stack.channels.empty()) throw UsageError("region_covariance: empty feature stack");
  if (region.w <= 0 || region.h <= 0 || region.x0 < 0 || region.y0 < 0 || region.x0 + region.w > stack.width ||
      region.y0 + region.h > stack.height)
    throw UsageError("region_covariance: region out of bounds");
  const long n = static_cast<long>(region.w) * region.h;
  if (n < 2) throw UsageError("region_covariance: region needs at least two pixels");

  const Eigen::Index d = stack.dim();
  Matrix features(n, d);
  long row = 0;
  for (int y = region.y0; y < region.y0 + region.h; ++y)
    for (int x = region.x0; x < region.x0 + region.w; ++x, ++row) {
      const std::size_t p = static_cast<std::size_t>(y) * stack.width + x;
      for (Eigen::Index c = 0; c < d; ++c) features(row, c) = stack.channels[static_cast<std::size_t>(c)][p];
    }
  const Eigen::RowVectorXd mean = features.colwise().mean();
  features.rowwise() -= mean;
  return features.transpose() * features / static_cast<double>(n - 1);
}

/// Region covariance descriptor, regularized by make_spd with `floor`.
inline SpdMatrix region_covariance(const FeatureStack& stack, const Rect& region, double floor) {
  return make_spd(region_sample_covariance(stack, region), floor);
}

/// Same, with the scale-aware default floor.
inline SpdMatrix region_covariance(const FeatureStack& stack, const Rect& region) {
  return make_spd(region_sample_covariance(stack, region));
}

/// Non-overlapping tile x tile rectangles in row-major order.
inline std::vector<Rect> grid_regions(int width, int height, int tile) {
  if (tile <= 0) throw UsageError("grid_regions: tile must be positive");
  if (width <= 0 || height <= 0 || width % tile != 0 || height % tile != 0)
    throw UsageError("grid_regions: image dimensions must be divisible by the tile size");
  std::vector<Rect> out;
  out.reserve(static_cast<std::size_t>(width / tile) * (height / tile));
  for (int y = 0; y < height; y += tile)
    for (int x = 0; x < width; x += tile) out.push_back({x, y, tile, tile});
  return out;
}

inline std::vector<Rect> grid_regions(const GrayImage& img, int tile) {
  return grid_regions(img.width, img.height, tile);
}

/// One descriptor per tile; floor <= 0 selects the scale-aware default.
inline std::vector<SpdMatrix> image_descriptors(const GrayImage& img, int tile, double floor = 0.0) {
  const FeatureStack fs = texture_features(img);
  std::vector<SpdMatrix> out;
  for (const Rect& r : grid_regions(img, tile))
    out.push_back(floor > 0.0 ? region_covariance(fs, r, floor) : region_covariance(fs, r));
  return out;
}

// ---- image IO ----

namespace detail {

inline std::uint32_t read_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

inline void write_u32_le(std::ostream& os, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b.data(), 4);
}

inline std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace detail

/// Binary PGM, 8-bit (maxval <= 255). Intensities scaled to [0, 1] by maxval.
inline GrayImage load_pgm(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = detail::read_all(path);
  std::size_t pos = 0;
  auto next_token = [&]() {
    std::string tok;
    while (pos < bytes.size()) {
      const char ch = static_cast<char>(bytes[pos]);
      if (ch == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos;
      } else {
        break;
      }
    }
    while (pos < bytes.size() && !std::isspace(bytes[pos])) tok.push_back(static_cast<char>(bytes[pos++]));
    return tok;
  };
  if (next_token() != "P5") throw IoError("'" + path.string() + "' is not a binary PGM (P5)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw IoError("'" + path.string() + "': malformed PGM header");
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
    throw IoError("'" + path.string() + "': unsupported PGM header (8-bit only)");
  ++pos;  // single whitespace before the raster
  const std::size_t count = static_cast<std::size_t>(w) * h;
  if (bytes.size() < pos + count) throw IoError("'" + path.string() + "': truncated PGM raster");
  GrayImage img(w, h);
  for (std::size_t i = 0; i < count; ++i) img.pixels[i] = static_cast<double>(bytes[pos + i]) / maxval;
  return img;
}

inline void save_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  for (double v : img.pixels) {
    const long q = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
    out.put(static_cast<char>(static_cast<unsigned char>(q)));
  }
}

/// Raw float32 image: "RCMF", u32 width, u32 height, u32 reserved, then
/// width*height little-endian floats in row-major order.
inline GrayImage load_rcmf(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = detail::read_all(path);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), "RCMF", 4) != 0)
    throw IoError("'" + path.string() + "' is not an RCMF image");
  const std::uint32_t w = detail::read_u32_le(bytes.data() + 4);
  const std::uint32_t h = detail::read_u32_le(bytes.data() + 8);
  if (w == 0 || h == 0) throw IoError("'" + path.string() + "': zero image dimension");
  const std::size_t count = static_cast<std::size_t>(w) * h;
  if (bytes.size() != 16 + 4 * count) throw IoError("'" + path.string() + "': payload length mismatch");
  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t bits = detail::read_u32_le(bytes.data() + 16 + 4 * i);
    float f;
    std::memcpy(&f, &bits, 4);
    img.pixels[i] = static_cast<double>(f);
  }
  return img;
}

inline void save_rcmf(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write("RCMF", 4);
  detail::write_u32_le(out, static_cast<std::uint32_t>(img.width));
  detail::write_u32_le(out, static_cast<std::uint32_t>(img.height));
  detail::write_u32_le(out, 0);
  for (double v : img.pixels) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    detail::write_u32_le(out, bits);
  }
}

/// Dispatches on extension: .pgm or .rcmf.
inline GrayImage load_image(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".pgm") return load_pgm(path);
  if (ext == ".rcmf") return load_rcmf(path);
  throw IoError("unsupported image extension '" + ext + "'");
}

}  // namespace spdc
