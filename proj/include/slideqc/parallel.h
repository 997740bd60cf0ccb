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

#ifndef SLIDEQC_PARALLEL_H_
#define SLIDEQC_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace slideqc {

/// Resolves a requested worker count: values < 1 mean "all hardware
/// threads".
int ResolveWorkers(int requested);

/// Calls fn(i) for every i in [0, n) using up to `workers` threads. Indices
/// are split into contiguous chunks. Callers write results into slot i so
/// the output never depends on scheduling. The first exception thrown by any
/// worker is rethrown after all threads join.
void ParallelFor(std::size_t n, int workers,
                 const std::function<void(std::size_t)>& fn);

}  // namespace slideqc

#endif  // SLIDEQC_PARALLEL_H_
