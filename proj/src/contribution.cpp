// Copyright 2026 The layercut Authors.
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

#include "layercut/contribution.hpp"

namespace layercut {

double cosine(std::span<const double> u, std::span<const double> v) {
  return detail::cosine_impl(u, v);
}

double cosine(std::span<const float> u, std::span<const float> v) {
  return detail::cosine_impl(u, v);
}

}  // namespace layercut
