/*
 * Copyright 2026 The absa-annotator Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ABSA_CLI_H_
#define ABSA_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace absa {

inline constexpr const char* kToolVersion = "0.1.0";

// Entry point of the `absa` tool. `args` excludes the program name.
// Returns the process exit code: 0 on success, 1 on a runtime failure and
// the CLI11 code (usually 105-109) on bad flags.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace absa

#endif  // ABSA_CLI_H_
