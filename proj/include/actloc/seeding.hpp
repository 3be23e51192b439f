// Copyright 2026 The ActLoc Authors. All Rights Reserved.
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

#ifndef ACTLOC_SEEDING_HPP_
#define ACTLOC_SEEDING_HPP_

#include <cstdint>

namespace actloc {

/// splitmix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a parent seed and a stream tag.
constexpr std::uint64_t mix_seed(std::uint64_t parent, std::uint64_t tag) {
  return splitmix64(splitmix64(parent) ^ (tag * 0xd1342543de82ef95ULL + 1));
}

// Stream tags for the per-episode seed split.
inline constexpr std::uint64_t kWorldStream = 0x776f726c64ULL;
inline constexpr std::uint64_t kAgentStream = 0x6167656e74ULL;

}  // namespace actloc

#endif  // ACTLOC_SEEDING_HPP_
