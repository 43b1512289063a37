#include "magpeel/cli.hpp"

int main(int argc, char** argv) {
  int code = 0;
  const auto config = magpeel::cli::parse_args(argc, argv, code);
  if (!config) return code;
  return magpeel::cli::emit(*config, magpeel::cli::run(*config));
}
