// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "sv2v/config.hpp"

namespace sv2v::cli {

enum ExitCode { kSuccess = 0, kUsageError = 1, kRuntimeError = 2 };

/// Every setting a run can use, with defaults.
std::vector<ConfigKey> config_schema();

/// args[0] is the program name. Reports go to files under --out; `out`
/// receives short progress lines, `err` one-line diagnostics.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sv2v::cli
