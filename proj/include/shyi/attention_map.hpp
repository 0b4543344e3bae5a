#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "shyi/error.hpp"

namespace shyi {

// Row-major real grid without value constraints. Used for gradients and
// intermediate buffers.
struct Plane {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  Plane() = default;
  Plane(std::size_t h, std::size_t w, double fill = 0.0)
      : height(h), width(w), values(h * w, fill) {}

  std::size_t size() const noexcept { return values.size(); }
  double& at(std::size_t r, std::size_t c) { return values[r * width + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * width + c]; }

  bool operator==(const Plane&) const = default;
};

// Per-token spatial attention mass. Nonnegative, with at least one positive
// entry so that its norm is never zero.
class AttentionMap {
 public:
  AttentionMap(std::size_t height, std::size_t width, std::vector<double> values)
      : height_(height), width_(width), values_(std::move(values)) {
    validate();
  }

  explicit AttentionMap(Plane plane)
      : AttentionMap(plane.height, plane.width, std::move(plane.values)) {}

  static AttentionMap constant(std::size_t height, std::size_t width, double value) {
    return AttentionMap(height, width, std::vector<double>(height * width, value));
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double at(std::size_t r, std::size_t c) const { return values_[r * width_ + c]; }

  bool same_shape(const AttentionMap& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  double max() const { return *std::max_element(values_.begin(), values_.end()); }

  Plane to_plane() const {
    Plane p(height_, width_);
    p.values = values_;
    return p;
  }

  bool operator==(const AttentionMap&) const = default;

 private:
  void validate() const {
    if (height_ == 0 || width_ == 0) {
      throw InputError("attention map dimensions must be positive");
    }
    if (values_.size() != height_ * width_) {
      throw InputError("attention map has " + std::to_string(values_.size()) +
                       " values, expected " + std::to_string(height_ * width_));
    }
    bool any_positive = false;
    for (double v : values_) {
      if (!std::isfinite(v) || v < 0.0) {
        throw InputError("attention map values must be finite and nonnegative");
      }
      any_positive = any_positive || v > 0.0;
    }
    if (!any_positive) throw InputError("attention map is identically zero");
  }

  std::size_t height_;
  std::size_t width_;
  std::vector<double> values_;
};

// CSV: first line "H,W", then H lines of W comma-separated values.
inline void write_csv(std::ostream& out, const AttentionMap& map) {
  out << map.height() << ',' << map.width() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t r = 0; r < map.height(); ++r) {
    for (std::size_t c = 0; c < map.width(); ++c) {
      if (c) out << ',';
      out << map.at(r, c);
    }
    out << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_double(const std::string& text, const std::string& context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw InputError(context + ": not a number: '" + text + "'");
  }
  while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
  if (used != text.size()) throw InputError(context + ": not a number: '" + text + "'");
  return v;
}

inline std::size_t parse_dim(const std::string& text, const std::string& context) {
  const double v = parse_double(text, context);
  if (v < 1 || v != std::floor(v)) throw InputError(context + ": bad dimension '" + text + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace detail

inline AttentionMap read_csv(std::istream& in, const std::string& source = "csv") {
  std::string line;
  if (!std::getline(in, line)) throw InputError(source + ": empty file");
  const auto header = detail::split_commas(line);
  if (header.size() != 2) throw InputError(source + ": header must be 'H,W'");
  const std::size_t h = detail::parse_dim(header[0], source);
  const std::size_t w = detail::parse_dim(header[1], source);
  std::vector<double> values;
  values.reserve(h * w);
  for (std::size_t r = 0; r < h; ++r) {
    if (!std::getline(in, line)) {
      throw InputError(source + ": expected " + std::to_string(h) + " rows");
    }
    const auto fields = detail::split_commas(line);
    if (fields.size() != w) {
      throw InputError(source + ": row " + std::to_string(r + 1) + " has " +
                       std::to_string(fields.size()) + " values, expected " +
                       std::to_string(w));
    }
    for (const auto& f : fields) values.push_back(detail::parse_double(f, source));
  }
  return AttentionMap(h, w, std::move(values));
}

inline void save_csv(const std::string& path, const AttentionMap& map) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_csv(out, map);
}

inline AttentionMap load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  return read_csv(in, path);
}

// ASCII PGM (P2), 8-bit, scaled so the map maximum becomes 255.
inline void write_pgm(std::ostream& out, const AttentionMap& map) {
  const double peak = map.max();
  out << "P2\n" << map.width() << ' ' << map.height() << "\n255\n";
  for (std::size_t r = 0; r < map.height(); ++r) {
    for (std::size_t c = 0; c < map.width(); ++c) {
      if (c) out << ' ';
      out << static_cast<int>(std::lround(255.0 * map.at(r, c) / peak));
    }
    out << '\n';
  }
}

inline void save_pgm(const std::string& path, const AttentionMap& map) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_pgm(out, map);
}

}  // namespace shyi
