// Copyright 2026 The Authors.
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

#ifndef ALSEG_ALLOCATOR_H_
#define ALSEG_ALLOCATOR_H_

namespace alseg {

// Keeps large short-lived activation buffers on the heap instead of fresh
// mmap pages, which otherwise cost a page-fault and zeroing per allocation.
// No-op outside glibc. Call once at program start.
void TuneAllocator();

}  // namespace alseg

#endif  // ALSEG_ALLOCATOR_H_
