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

#ifndef SNNFORGE_FORMAT_HPP_
#define SNNFORGE_FORMAT_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace snnforge {

// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);
double parse_number(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);

}  // namespace snnforge

#endif  // SNNFORGE_FORMAT_HPP_
