// Copyright 2026 The snnforge Authors
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

#ifndef SNNFORGE_CLI_HPP_
#define SNNFORGE_CLI_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "snnforge/dataset.hpp"

namespace snnforge {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Resolves a dataset reference:
//   synth:<blobs|spirals|xor_grid>[:N]   (N defaults to 1000)
//   idx:<images>,<labels>
//   csv:<path>[:C,H,W]
Dataset resolve_dataset(const std::string& ref, std::uint64_t seed);

// Runs the command line and returns the process exit code: 0 success,
// 2 usage error, 1 runtime error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace snnforge

#endif  // SNNFORGE_CLI_HPP_
