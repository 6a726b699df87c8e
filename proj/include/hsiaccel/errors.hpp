// Copyright (c) 2026, hsiaccel authors.
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//         http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace hsiaccel {

/// Base of every error raised by the toolkit. The CLI maps any of these to
/// exit code 1 with what() as the single-line diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define HSIACCEL_DEFINE_ERROR(Name)        \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

// Container / file errors.
HSIACCEL_DEFINE_ERROR(FormatError);
HSIACCEL_DEFINE_ERROR(TruncationError);
HSIACCEL_DEFINE_ERROR(DataError);
HSIACCEL_DEFINE_ERROR(IoError);

// Dataset errors.
HSIACCEL_DEFINE_ERROR(UnlabeledError);
HSIACCEL_DEFINE_ERROR(EmptyDatasetError);

// Network / execution errors.
HSIACCEL_DEFINE_ERROR(ConfigError);
HSIACCEL_DEFINE_ERROR(WeightShapeError);
HSIACCEL_DEFINE_ERROR(ShapeError);
HSIACCEL_DEFINE_ERROR(ModelError);

// Design-space exploration.
HSIACCEL_DEFINE_ERROR(InfeasibleError);

#undef HSIACCEL_DEFINE_ERROR

}  // namespace hsiaccel
