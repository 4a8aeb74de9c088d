#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "simbias/rng.hpp"

namespace simbias {

/// A point of {-1,+1}^n stored one bit per coordinate (set bit = +1).
/// Indices are 0-based.
class BitString {
 public:
  BitString() = default;

  /// All coordinates +1.
  static BitString ones(int n);
  static BitString random(int n, Engine& rng);
  /// Each value must be exactly -1 or +1.
  static BitString from_signs(std::span<const int> signs);
  /// Parses a string of '+'/'-' (or '1'/'0') characters.
  static BitString parse(const std::string& text);

  int size() const noexcept { return n_; }
  int operator[](int i) const noexcept {
    return (words_[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1ULL ? 1 : -1;
  }

  void flip(int i);
  BitString flipped(int i) const;
  BitString flipped(std::span<const int> indices) const;

  Eigen::VectorXd to_vector() const;
  std::string to_string() const;
  /// 64-bit content hash including the length.
  std::uint64_t digest() const noexcept;

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  explicit BitString(int n);
  void check_index(int i) const;

  int n_ = 0;
  std::vector<std::uint64_t> words_;

  friend int hamming(const BitString& x, const BitString& y);
};

/// Number of differing coordinates. Throws DimensionMismatch on length mismatch.
int hamming(const BitString& x, const BitString& y);

/// Inner product x.y = n - 2 h(x, y).
inline int dot(const BitString& x, const BitString& y) { return x.size() - 2 * hamming(x, y); }

/// Normalized overlap x.y/n in [-1, 1].
inline double overlap(const BitString& x, const BitString& y) {
  return static_cast<double>(dot(x, y)) / x.size();
}

}  // namespace simbias
