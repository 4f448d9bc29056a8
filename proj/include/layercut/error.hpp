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

#ifndef LAYERCUT_ERROR_HPP
#define LAYERCUT_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace layercut {

/// Library-wide error. `component()` names the subsystem that failed
/// ("tensorstore", "topology", ...) so front ends can report it.
class Error : public std::runtime_error {
 public:
  Error(std::string component, const std::string& message)
      : std::runtime_error(component + ": " + message),
        component_(std::move(component)) {}

  const std::string& component() const noexcept { return component_; }

 private:
  std::string component_;
};

}  // namespace layercut

#endif  // LAYERCUT_ERROR_HPP
