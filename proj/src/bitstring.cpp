#include "simbias/bitstring.hpp"

#include <bit>

#include "simbias/errors.hpp"

namespace simbias {

BitString::BitString(int n) : n_(n), words_((static_cast<std::size_t>(n) + 63) / 64, 0) {
  if (n < 1) throw ConfigError("bit string length must be >= 1");
}

BitString BitString::ones(int n) {
  BitString x(n);
  for (std::size_t w = 0; w < x.words_.size(); ++w) x.words_[w] = ~0ULL;
  if (n % 64) x.words_.back() = (1ULL << (n % 64)) - 1;
  return x;
}

BitString BitString::random(int n, Engine& rng) {
  BitString x(n);
  for (auto& w : x.words_) w = rng();
  if (n % 64) x.words_.back() &= (1ULL << (n % 64)) - 1;
  return x;
}

BitString BitString::from_signs(std::span<const int> signs) {
  BitString x(static_cast<int>(signs.size()));
  for (std::size_t i = 0; i < signs.size(); ++i) {
    if (signs[i] == 1) {
      x.words_[i >> 6] |= 1ULL << (i & 63);
    } else if (signs[i] != -1) {
      throw ConfigError("bit string entries must be -1 or +1");
    }
  }
  return x;
}

BitString BitString::parse(const std::string& text) {
  std::vector<int> signs;
  signs.reserve(text.size());
  for (char c : text) {
    if (c == '+' || c == '1') {
      signs.push_back(1);
    } else if (c == '-' || c == '0') {
      signs.push_back(-1);
    } else {
      throw ConfigError("unexpected character in bit string: '" + std::string(1, c) + "'");
    }
  }
  return from_signs(signs);
}

void BitString::check_index(int i) const {
  if (i < 0 || i >= n_) throw DimensionMismatch("bit index out of range");
}

void BitString::flip(int i) {
  check_index(i);
  words_[static_cast<std::size_t>(i) >> 6] ^= 1ULL << (i & 63);
}

BitString BitString::flipped(int i) const {
  BitString y = *this;
  y.flip(i);
  return y;
}

BitString BitString::flipped(std::span<const int> indices) const {
  BitString y = *this;
  for (int i : indices) y.flip(i);
  return y;
}

Eigen::VectorXd BitString::to_vector() const {
  Eigen::VectorXd v(n_);
  for (int i = 0; i < n_; ++i) v[i] = (*this)[i];
  return v;
}

std::string BitString::to_string() const {
  std::string s(static_cast<std::size_t>(n_), '-');
  for (int i = 0; i < n_; ++i)
    if ((*this)[i] > 0) s[static_cast<std::size_t>(i)] = '+';
  return s;
}

std::uint64_t BitString::digest() const noexcept {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(n_));
  for (auto w : words_) h = mix64(h ^ w);
  return h;
}

int hamming(const BitString& x, const BitString& y) {
  if (x.n_ != y.n_) throw DimensionMismatch("bit strings have different lengths");
  int h = 0;
  for (std::size_t w = 0; w < x.words_.size(); ++w) h += std::popcount(x.words_[w] ^ y.words_[w]);
  return h;
}

}  // namespace simbias
