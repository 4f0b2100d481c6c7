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


// Command-line front end. Exit codes: 0 success, 2 usage or domain error
// (bad flags, malformed input, beta outside its range), 1 runtime failure.

#ifndef ROBUST_BATCHES_CLI_HPP_
#define ROBUST_BATCHES_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace robust_batches {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace robust_batches

#endif  // ROBUST_BATCHES_CLI_HPP_
