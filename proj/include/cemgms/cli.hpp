// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace cemgms {

/// Command-line entry point (subcommands: run, medium, export).
/// Returns the process exit code: 0 on success, 1 on usage errors, 2 on
/// runtime failures.
int run_cli(int argc, const char* const* argv);

}  // namespace cemgms
