#include <iostream>
#include <string>
#include <vector>

#include "vpslam/cli.hpp"

int main(int argc, char** argv) {
  return vpslam::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
