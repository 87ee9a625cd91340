#include <cstdio>

#include "ctlab/ctlab.hpp"

int main() {
  std::puts("demo placeholder");
  return 0;
}
