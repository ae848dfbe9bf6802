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

#ifndef SNNFORGE_ERROR_HPP_
#define SNNFORGE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace snnforge {

// Base of every error raised by the library. The CLI maps these to exit
// code 1; UsageError maps to 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SNNFORGE_DEFINE_ERROR(Name)          \
  class Name : public Error {                \
   public:                                   \
    explicit Name(const std::string& what)   \
        : Error(#Name ": " + what) {}        \
  }

SNNFORGE_DEFINE_ERROR(ShapeMismatch);
SNNFORGE_DEFINE_ERROR(InvalidStride);
SNNFORGE_DEFINE_ERROR(NonFinite);
SNNFORGE_DEFINE_ERROR(InvalidArgument);
SNNFORGE_DEFINE_ERROR(UnfinalizedParams);
SNNFORGE_DEFINE_ERROR(EmptyClass);
SNNFORGE_DEFINE_ERROR(MissingLayer);
SNNFORGE_DEFINE_ERROR(IoError);
SNNFORGE_DEFINE_ERROR(FormatError);
SNNFORGE_DEFINE_ERROR(CountMismatch);
SNNFORGE_DEFINE_ERROR(UsageError);

#undef SNNFORGE_DEFINE_ERROR

}  // namespace snnforge

#endif  // SNNFORGE_ERROR_HPP_
