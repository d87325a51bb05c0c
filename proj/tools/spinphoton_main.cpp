#include <cstdio>

int main() {
  std::puts("spinphoton: placeholder");
  return 0;
}
