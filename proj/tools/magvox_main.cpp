#include <string>
#include <vector>

#include "magvox/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return magvox::cli::run(args);
}
