#include "persuade_sis/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return persuade_sis::cli::run(std::move(args));
}
