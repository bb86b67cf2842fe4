// Copyright 2026 The curdisc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <string_view>

namespace curdisc {

// Lower-case hex SHA-1 of `data`.
std::string Sha1Hex(std::string_view data);

// Git blob id of `content`: SHA-1 over "blob <size>\0<content>".
std::string GitBlobDigest(std::string_view content);

}  // namespace curdisc
