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

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace levshap {

// Coalition of players as a bit vector. Bit i is player i+1; in the string
// form character i (leftmost first) is bit i.
class SubsetMask {
 public:
  SubsetMask() = default;
  explicit SubsetMask(int n);

  static SubsetMask full(int n);
  static SubsetMask from_string(std::string_view bits);
  // Zero-based player indices.
  static SubsetMask from_players(int n, std::span<const int> players);
  // Low n bits of `index` (n <= 64).
  static SubsetMask from_index(int n, std::uint64_t index);

  int size() const { return n_; }
  bool test(int i) const {
    return (words_[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1u;
  }
  void set(int i, bool value = true);
  int popcount() const;
  SubsetMask complement() const;
  std::vector<int> players() const;
  std::string to_string() const;
  // Integer form for n <= 64.
  std::uint64_t to_index() const;
  std::span<const std::uint64_t> words() const { return words_; }

  friend bool operator==(const SubsetMask&, const SubsetMask&) = default;
  friend std::strong_ordering operator<=>(const SubsetMask&,
                                          const SubsetMask&) = default;

 private:
  int n_ = 0;
  std::vector<std::uint64_t> words_;
};

struct SubsetMaskHash {
  std::size_t operator()(const SubsetMask& mask) const noexcept;
};

}  // namespace levshap
