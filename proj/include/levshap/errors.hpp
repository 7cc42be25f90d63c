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

#include <stdexcept>
#include <string>
#include <vector>

namespace levshap {

// Precondition violated by the caller (bad size, bad index, negative sigma).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Index outside [0, C(n,s)) or similar enumeration range.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Request would need more evaluations or memory than the exact routines allow.
class CostError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// A value oracle failed. Carries the batch (as wire-format mask strings) that
// was being evaluated.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, std::vector<std::string> batch = {})
      : std::runtime_error(what), batch_(std::move(batch)) {}
  const std::vector<std::string>& batch() const { return batch_; }

 private:
  std::vector<std::string> batch_;
};

// A linear solve could not produce a usable answer.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int rank, double rcond)
      : std::runtime_error(what), rank_(rank), rcond_(rcond) {}
  int rank() const { return rank_; }
  double rcond() const { return rcond_; }

 private:
  int rank_;
  double rcond_;
};

// A numerical identity that must hold by construction did not.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace levshap
