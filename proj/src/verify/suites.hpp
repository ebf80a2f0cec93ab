// Copyright (c) 2026 Clarinet Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace clar::verify {

// Named self-check suites runnable from the CLI without any training state.
// Each check prints one "PASS name" / "FAIL name (detail)" line to out.
// Returns the number of failed checks. Unknown names throw ConfigError.
int run_suite(const std::string& name, std::ostream& out, bool verbose);

std::vector<std::string> suite_names();  // includes the umbrella "all"

}  // namespace clar::verify
