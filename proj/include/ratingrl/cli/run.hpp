/* Copyright 2026 The RatingRL Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ratingrl::cli {

// Process exit codes by error category.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,     // anything without a more specific category
  kExitConfig = 2,      // bad flags or config values
  kExitInput = 3,       // unreadable, malformed, missing or mismatched artifacts
  kExitNumeric = 4,     // non-finite values
  kExitGeneration = 5,  // synthetic data could not be produced
};

// Runs one subcommand. `args` excludes the program name. The one-line summary
// goes to `out`; progress and errors go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace ratingrl::cli
