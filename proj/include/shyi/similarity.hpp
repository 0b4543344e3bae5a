#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "shyi/attention_map.hpp"
#include "shyi/error.hpp"

namespace shyi {

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

// Cosine of the angle between two flattened grids. Symmetric bit-for-bit:
// the dot product is commutative per element and the norm product is a
// single commutative multiply.
inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("cosine similarity: shape mismatch");
  const double na = std::sqrt(detail::dot(a, a));
  const double nb = std::sqrt(detail::dot(b, b));
  if (!(na > 0.0) || !(nb > 0.0)) throw InputError("cosine similarity: zero-norm input");
  return detail::dot(a, b) / (na * nb);
}

inline double cosine_similarity(const AttentionMap& a, const AttentionMap& b) {
  if (!a.same_shape(b)) throw InputError("cosine similarity: shape mismatch");
  return std::clamp(cosine_similarity(a.values(), b.values()), 0.0, 1.0);
}

// Adds upstream * d cos(a, b) / da into grad_a and likewise for b. Either
// gradient span may be empty to skip that side. Returns cos(a, b).
inline double cosine_backward(std::span<const double> a, std::span<const double> b,
                              double upstream, std::span<double> grad_a,
                              std::span<double> grad_b) {
  const double aa = detail::dot(a, a);
  const double bb = detail::dot(b, b);
  const double na = std::sqrt(aa);
  const double nb = std::sqrt(bb);
  if (!(na > 0.0) || !(nb > 0.0)) throw InputError("cosine similarity: zero-norm input");
  const double inv = 1.0 / (na * nb);
  const double cos = detail::dot(a, b) * inv;
  if (!grad_a.empty()) {
    const double self = cos / aa;
    for (std::size_t i = 0; i < a.size(); ++i) {
      grad_a[i] += upstream * (b[i] * inv - self * a[i]);
    }
  }
  if (!grad_b.empty()) {
    const double self = cos / bb;
    for (std::size_t i = 0; i < b.size(); ++i) {
      grad_b[i] += upstream * (a[i] * inv - self * b[i]);
    }
  }
  return cos;
}

}  // namespace shyi
