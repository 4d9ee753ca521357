#include <iostream>

#include "logitaudit/cli.h"

int main(int argc, char** argv) {
  return logitaudit::cli::run(argc, argv, std::cout, std::cerr);
}
