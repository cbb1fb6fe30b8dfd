#include <string>
#include <vector>

#include "prescurv/cli.hpp"

int main(int argc, char** argv) {
  return prescurv::cli::dispatch(std::vector<std::string>(argv + 1, argv + argc));
}
