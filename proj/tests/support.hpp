// Copyright 2026 The edgebot Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>

#include "edgebot/error.hpp"

namespace support {

/// Kind of the edgebot::Error thrown by fn, nullopt if nothing was thrown.
template <class Fn>
std::optional<edgebot::ErrorKind> thrown(Fn&& fn) {
  try {
    fn();
  } catch (const edgebot::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

}  // namespace support
