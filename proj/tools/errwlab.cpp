#include <iostream>
#include <string>
#include <vector>

#include "errw/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string invocation;
  for (int i = 0; i < argc; ++i) {
    if (i) invocation += ' ';
    invocation += argv[i];
  }
  errw::RunConfig config;
  try {
    config = errw::parse_cli(args);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  int code = errw::run_experiment(config, invocation);
  if (code == 0)
    std::cout << config.kind << ": ok (report in " << config.out << ")\n";
  else if (code == 2)
    std::cout << config.kind << ": statistical suspicion (report in " << config.out << ")\n";
  return code;
}
