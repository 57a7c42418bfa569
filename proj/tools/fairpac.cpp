// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The fairpac Authors

#include "fairpac/cli.hpp"

int main(int argc, char** argv) { return fairpac::run_cli(argc, argv); }
