#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "shyi/attention_map.hpp"
#include "shyi/error.hpp"

namespace shyi {

// Sampled isotropic 2-D Gaussian. Stored as its normalized 1-D factor; the
// 2-D weight at (i, j) is taps[i] * taps[j].
class SmoothingKernel {
 public:
  SmoothingKernel(std::size_t size, double sigma) : size_(size), sigma_(sigma) {
    if (size == 0 || size % 2 == 0) {
      throw InputError("kernel size must be odd and positive, got " + std::to_string(size));
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw InputError("kernel sigma must be positive");
    }
    const auto radius = static_cast<long>(size / 2);
    taps_.resize(size);
    double total = 0.0;
    for (long i = -radius; i <= radius; ++i) {
      const double w = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
      taps_[static_cast<std::size_t>(i + radius)] = w;
      total += w;
    }
    for (double& w : taps_) w /= total;
  }

  std::size_t size() const noexcept { return size_; }
  std::size_t radius() const noexcept { return size_ / 2; }
  double sigma() const noexcept { return sigma_; }
  const std::vector<double>& taps() const noexcept { return taps_; }
  double weight(std::size_t i, std::size_t j) const { return taps_[i] * taps_[j]; }

 private:
  std::size_t size_;
  double sigma_;
  std::vector<double> taps_;
};

inline SmoothingKernel make_kernel(std::size_t size, double sigma) {
  return SmoothingKernel(size, sigma);
}

namespace detail {

// Mirror without repeating the edge sample: -1 -> 1, n -> n-2.
inline std::size_t reflect_index(long i, std::size_t n) {
  if (n == 1) return 0;
  const long last = static_cast<long>(n) - 1;
  while (i < 0 || i > last) i = i < 0 ? -i : 2 * last - i;
  return static_cast<std::size_t>(i);
}

inline void check_kernel_fits(std::size_t height, std::size_t width,
                              const SmoothingKernel& kernel) {
  const std::size_t limit = 2 * std::min(height, width) - 1;
  if (kernel.size() > limit) {
    throw InputError("kernel size " + std::to_string(kernel.size()) + " exceeds " +
                     std::to_string(limit) + " for a " + std::to_string(height) + "x" +
                     std::to_string(width) + " map");
  }
}

// One separable pass. axis 0 runs along columns (vertical), 1 along rows.
// transpose = true applies the adjoint of the reflected convolution.
inline Plane convolve_axis(const Plane& in, const SmoothingKernel& kernel, int axis,
                           bool transpose) {
  const auto& taps = kernel.taps();
  const long radius = static_cast<long>(kernel.radius());
  Plane out(in.height, in.width, 0.0);
  const std::size_t n = axis == 0 ? in.height : in.width;
  for (std::size_t r = 0; r < in.height; ++r) {
    for (std::size_t c = 0; c < in.width; ++c) {
      const long pos = static_cast<long>(axis == 0 ? r : c);
      for (long k = -radius; k <= radius; ++k) {
        const std::size_t src = reflect_index(pos + k, n);
        const std::size_t sr = axis == 0 ? src : r;
        const std::size_t sc = axis == 0 ? c : src;
        const double w = taps[static_cast<std::size_t>(k + radius)];
        if (transpose) {
          out.at(sr, sc) += w * in.at(r, c);
        } else {
          out.at(r, c) += w * in.at(sr, sc);
        }
      }
    }
  }
  return out;
}

}  // namespace detail

// Gaussian blur with reflect-101 borders. Requires kernel size <= 2*min(H,W)-1
// so a single reflection always lands inside the map.
inline Plane smooth(const Plane& in, const SmoothingKernel& kernel) {
  detail::check_kernel_fits(in.height, in.width, kernel);
  if (kernel.size() == 1) return in;
  return detail::convolve_axis(detail::convolve_axis(in, kernel, 1, false), kernel, 0, false);
}

inline AttentionMap smooth(const AttentionMap& map, const SmoothingKernel& kernel) {
  return AttentionMap(smooth(map.to_plane(), kernel));
}

// Adjoint of smooth(): maps a gradient w.r.t. the smoothed map back to the
// unsmoothed one.
inline Plane smooth_transpose(const Plane& grad, const SmoothingKernel& kernel) {
  detail::check_kernel_fits(grad.height, grad.width, kernel);
  if (kernel.size() == 1) return grad;
  return detail::convolve_axis(detail::convolve_axis(grad, kernel, 0, true), kernel, 1, true);
}

}  // namespace shyi
