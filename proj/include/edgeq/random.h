// Copyright 2026 The EdgeQ Authors
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

#ifndef EDGEQ_RANDOM_H_
#define EDGEQ_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace edgeq {

using Rng = std::mt19937_64;

// 64-bit FNV-1a. Stable across platforms, used for stream tags and config
// hashes.
uint64_t Fnv1a64(std::string_view bytes,
                 uint64_t basis = 0xcbf29ce484222325ULL);

// Derives an independent generator from a run seed and a stream tag
// ("env", "agent", "noise", ...). Identical (seed, tag) pairs always give
// identical streams.
Rng MakeStream(uint64_t seed, std::string_view tag);

// Mixes an extra 64-bit value into a seed (splitmix64 finalizer).
uint64_t MixSeed(uint64_t seed, uint64_t value);

}  // namespace edgeq

#endif  // EDGEQ_RANDOM_H_
