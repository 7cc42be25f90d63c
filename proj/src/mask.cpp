/*
 * Copyright 2026 The levshap Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "levshap/mask.hpp"

#include <bit>

#include "levshap/errors.hpp"

namespace levshap {

namespace {

std::size_t word_count(int n) { return (static_cast<std::size_t>(n) + 63) / 64; }

}  // namespace

SubsetMask::SubsetMask(int n) : n_(n), words_(word_count(n), 0) {
  if (n < 0) throw DomainError("SubsetMask: negative player count");
}

SubsetMask SubsetMask::full(int n) {
  SubsetMask mask(n);
  for (int i = 0; i < n; ++i) mask.set(i);
  return mask;
}

SubsetMask SubsetMask::from_string(std::string_view bits) {
  SubsetMask mask(static_cast<int>(bits.size()));
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      mask.set(static_cast<int>(i));
    } else if (bits[i] != '0') {
      throw DomainError("SubsetMask: mask string must contain only '0'/'1'");
    }
  }
  return mask;
}

SubsetMask SubsetMask::from_players(int n, std::span<const int> players) {
  SubsetMask mask(n);
  for (int p : players) {
    if (p < 0 || p >= n) throw DomainError("SubsetMask: player out of range");
    mask.set(p);
  }
  return mask;
}

SubsetMask SubsetMask::from_index(int n, std::uint64_t index) {
  if (n > 64) throw DomainError("SubsetMask::from_index needs n <= 64");
  SubsetMask mask(n);
  if (n > 0) {
    mask.words_[0] = n == 64 ? index : (index & ((std::uint64_t{1} << n) - 1));
  }
  return mask;
}

void SubsetMask::set(int i, bool value) {
  const std::uint64_t bit = std::uint64_t{1} << (i & 63);
  auto& word = words_[static_cast<std::size_t>(i) >> 6];
  word = value ? (word | bit) : (word & ~bit);
}

int SubsetMask::popcount() const {
  int total = 0;
  for (auto w : words_) total += std::popcount(w);
  return total;
}

SubsetMask SubsetMask::complement() const {
  SubsetMask out(n_);
  for (std::size_t k = 0; k < words_.size(); ++k) out.words_[k] = ~words_[k];
  if (n_ % 64 != 0 && !out.words_.empty()) {
    out.words_.back() &= (std::uint64_t{1} << (n_ % 64)) - 1;
  }
  return out;
}

std::vector<int> SubsetMask::players() const {
  std::vector<int> out;
  for (std::size_t k = 0; k < words_.size(); ++k) {
    std::uint64_t w = words_[k];
    while (w != 0) {
      out.push_back(static_cast<int>(k * 64) + std::countr_zero(w));
      w &= w - 1;
    }
  }
  return out;
}

std::string SubsetMask::to_string() const {
  std::string out(static_cast<std::size_t>(n_), '0');
  for (int i = 0; i < n_; ++i) {
    if (test(i)) out[static_cast<std::size_t>(i)] = '1';
  }
  return out;
}

std::uint64_t SubsetMask::to_index() const {
  if (n_ > 64) throw DomainError("SubsetMask::to_index needs n <= 64");
  return words_.empty() ? 0 : words_[0];
}

std::size_t SubsetMaskHash::operator()(const SubsetMask& mask) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ull ^ static_cast<std::uint64_t>(mask.size());
  for (auto w : mask.words()) {
    h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

}  // namespace levshap
