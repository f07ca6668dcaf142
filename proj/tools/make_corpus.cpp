// Writes the synthetic stub-bundle corpus used by the tests to a directory,
// for trying the CLI by hand.
//
//   make_corpus <dir> [seed]

#include <cstdlib>
#include <iostream>

#include "synth.hpp"

int main(int argc, char** argv) {
  if (argc < 2 || argc > 3) {
    std::cerr << "usage: make_corpus <dir> [seed]\n";
    return 64;
  }
  const std::uint64_t seed = argc == 3 ? std::strtoull(argv[2], nullptr, 10) : 7;
  const auto paths = synth::write_corpus(argv[1], seed);
  std::cout << "wrote " << paths.root.string() << "\n";
  return 0;
}
