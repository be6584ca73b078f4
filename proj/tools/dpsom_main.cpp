#include <iostream>
#include <string>
#include <vector>

#include "dpsom/cli/app.hpp"

int main(int argc, char** argv) {
  dpsom::cli::tune_allocator();
  return dpsom::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
