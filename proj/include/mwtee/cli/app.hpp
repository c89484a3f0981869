// Copyright 2026 The mwtee Authors
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

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mwtee::cli {

// Process exit codes; each run outcome maps to exactly one.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,          // bad arguments, unreadable or unwritable files
    kExitConfig = 2,         // ConfigError, overlap, capacity or granularity
    kExitLocked = 3,         // secure boot refused the image
    kExitSecurityFault = 4,  // a guest tripped an isolation fault
};

// Full command line behaviour; `out` receives the report when no --out path
// is given, `err` the diagnostics.
int run_app(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mwtee::cli
