// Copyright 2026 The SlideQC Authors. All Rights Reserved.
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

#ifndef SLIDEQC_ERRORS_H_
#define SLIDEQC_ERRORS_H_

#include <stdexcept>
#include <string>

namespace slideqc {

/// Bad input supplied by the caller: malformed files, out-of-range
/// parameters, violated preconditions. The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure while executing a well-formed request (I/O, backend, numerics).
/// The CLI maps this to exit code 1.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace slideqc

#endif  // SLIDEQC_ERRORS_H_
