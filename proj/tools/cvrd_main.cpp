#include <cstdio>

int main() {
    std::puts("cvrd: placeholder");
    return 0;
}
