#include <iostream>
#include <string>
#include <vector>

#include "cifboot/cli/app.hpp"

int main(int argc, char** argv) {
  return cifboot::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
