// Copyright 2026 The mnn Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <iostream>

#include "mnn/cli.h"

int main(int argc, char** argv) { return mnn::run_cli(argc, argv, std::cout, std::cerr); }
