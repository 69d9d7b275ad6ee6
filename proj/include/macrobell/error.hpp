// Copyright 2026 The macrobell Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace macrobell {

/// Precondition violated by a caller-supplied argument.
class InvalidInput : public std::invalid_argument {
   public:
    explicit InvalidInput(const std::string &what) : std::invalid_argument(what) {}
};

/// Not enough trials (or rounds) to form the requested statistic.
class InsufficientData : public std::runtime_error {
   public:
    explicit InsufficientData(const std::string &what) : std::runtime_error(what) {}
};

/// Quadrature or optimizer failed to reach its tolerance.
class NumericError : public std::runtime_error {
   public:
    explicit NumericError(const std::string &what) : std::runtime_error(what) {}
};

/// Requested computation does not fit the configured memory budget.
class ResourceError : public std::runtime_error {
   public:
    explicit ResourceError(const std::string &what) : std::runtime_error(what) {}
};

}  // namespace macrobell
