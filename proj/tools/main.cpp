#include <cstdlib>
#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  std::map<std::string, std::string> env;
  if (const char* t = std::getenv("FINSLER_THREADS")) env["FINSLER_THREADS"] = t;
  return finsler::cli::run_command(std::vector<std::string>(argv, argv + argc), env, std::cout, std::cerr);
}
