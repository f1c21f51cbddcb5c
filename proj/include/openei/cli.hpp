// Copyright 2026 The OpenEI Authors
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

#pragma once

#include <ostream>

#include "openei/error.hpp"

namespace openei {

/// Process exit statuses of the `openei` tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,       // bad flags or configuration
  kExitInfeasible = 2,  // no model satisfies the selection
  kExitRuntime = 3,     // runtime or I/O failure
};

int exit_code_for(ErrorCode code) noexcept;

/// Runs the command line. Human output goes to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace openei
