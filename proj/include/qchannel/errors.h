/*
 * Copyright 2026 The qchannel Authors.
 *
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

#ifndef QCHANNEL_ERRORS_H_
#define QCHANNEL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace qchannel {

// A violated precondition on an operation argument.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The interaction matrix produces zero curvature power and cannot be scaled.
class DegenerateInteraction : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exhaustive decoding would enumerate more supports than the configured cap.
class CapacityExceeded : public std::runtime_error {
 public:
  CapacityExceeded(const std::string& what, double requested, double cap)
      : std::runtime_error(what), requested_(requested), cap_(cap) {}

  double requested() const { return requested_; }
  double cap() const { return cap_; }

 private:
  double requested_;
  double cap_;
};

// Throws InvalidArgument with `message` unless `condition` holds.
inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace qchannel

#endif  // QCHANNEL_ERRORS_H_
