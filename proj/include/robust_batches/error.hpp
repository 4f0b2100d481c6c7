//
// Copyright 2026 The robust_batches Authors
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
//

#ifndef ROBUST_BATCHES_ERROR_HPP_
#define ROBUST_BATCHES_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace robust_batches {

// Caller violated an operation's contract (empty input, wrong shape,
// malformed file). The CLI maps this to exit status 2.
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// A numeric argument is outside the domain the operation is defined on.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace robust_batches

#endif  // ROBUST_BATCHES_ERROR_HPP_
