// Copyright 2026 The sercc Authors. All Rights Reserved.
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

#ifndef SERCC_ERROR_HPP_
#define SERCC_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace sercc {

/// Root of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SERCC_DEFINE_ERROR(Name)          \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

SERCC_DEFINE_ERROR(FormatError);      // malformed file or record
SERCC_DEFINE_ERROR(ValidationError);  // well-formed but violates an invariant
SERCC_DEFINE_ERROR(ArgumentError);    // bad function argument
SERCC_DEFINE_ERROR(ShapeError);       // tensor shapes do not conform
SERCC_DEFINE_ERROR(ConfigError);      // inconsistent configuration
SERCC_DEFINE_ERROR(TooShortError);    // not enough samples for one frame
SERCC_DEFINE_ERROR(EmptyBufferError);
SERCC_DEFINE_ERROR(OptimizerError);
SERCC_DEFINE_ERROR(TrainingError);
SERCC_DEFINE_ERROR(UndefinedMetricError);
SERCC_DEFINE_ERROR(AlignmentError);
SERCC_DEFINE_ERROR(EmptyReportError);
SERCC_DEFINE_ERROR(IoError);
SERCC_DEFINE_ERROR(TapeError);

#undef SERCC_DEFINE_ERROR

}  // namespace sercc

#endif  // SERCC_ERROR_HPP_
