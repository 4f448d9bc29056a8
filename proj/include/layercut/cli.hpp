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

#ifndef LAYERCUT_CLI_HPP
#define LAYERCUT_CLI_HPP

namespace layercut {

/// Entry point behind the `layercut` binary. Writes a JSON report with
/// schema_version "1" on stdout for every successful invocation.
/// Exit codes: 0 success, 1 usage error, 2 data/format error.
int cli_main(int argc, const char* const* argv);

}  // namespace layercut

#endif  // LAYERCUT_CLI_HPP
