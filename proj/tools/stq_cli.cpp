#include <string>
#include <vector>

#include "stq/cli.hpp"

int main(int argc, char** argv) {
  return stq::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
