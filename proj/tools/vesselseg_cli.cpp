#include <cstdio>

int main() {
  std::puts("vesselseg: CLI under construction");
  return 0;
}
