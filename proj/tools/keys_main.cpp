// Copyright 2026 The KEYS Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "keys/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return keys::cli::run(args, std::cout, std::cerr);
}
