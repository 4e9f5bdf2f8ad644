// Copyright 2026 The Devarb Authors. All Rights Reserved.
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

#ifndef DEVARB_HASH_H_
#define DEVARB_HASH_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace devarb {

// 64-bit FNV-1a, for content stamps (not cryptographic).
uint64_t Fnv1a64(std::string_view data, uint64_t seed = 0xcbf29ce484222325ULL);

// 16 lowercase hex digits of Fnv1a64.
std::string HashHex(std::string_view data);

std::string HashFile(const std::string& path);

}  // namespace devarb

#endif  // DEVARB_HASH_H_
