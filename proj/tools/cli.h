//
// Copyright 2026 The userdp Authors
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
//

#ifndef USERDP_TOOLS_CLI_H_
#define USERDP_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace userdp::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntimeError = 1;
inline constexpr int kExitUsageError = 2;

// Environment variable consulted for the seed when --seed is absent.
inline constexpr char kSeedEnvVar[] = "USERDP_SEED";

// Runs the `userdp` command line. `args` excludes the program name. Results
// go to `out` as one JSON object; failures go to `err` as a single-line JSON
// object {"error": {...}}.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace userdp::cli

#endif  // USERDP_TOOLS_CLI_H_
