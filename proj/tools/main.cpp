// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#include "cemgms/cli.hpp"

int main(int argc, char** argv) { return cemgms::run_cli(argc, argv); }
