#include <string>
#include <vector>

#include "retrotrack/bench.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return retrotrack::bench_main(args);
}
