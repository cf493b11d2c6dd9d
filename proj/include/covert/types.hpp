// Copyright 2026 The Covertlink Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace covert {

using Byte = std::uint8_t;
using Bytes = std::vector<Byte>;

// One binary digit per element, values 0 or 1.
using Bit = std::uint8_t;
using BitStream = std::vector<Bit>;

// Complex baseband sample, unit energy for a clean primary QPSK point.
using IQSymbol = std::complex<double>;

// A sequence length does not satisfy an operation's framing rule.
class LengthError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// A field value is outside its legal range.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed external input (event logs, capture files, configs).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace covert
