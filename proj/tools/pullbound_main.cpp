#include <string>
#include <vector>

#include "pullbound/experiments.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return pullbound::run_cli(args);
}
