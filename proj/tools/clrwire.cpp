#include <cstdio>

int main() {
    std::puts("clrwire: subcommands not wired up yet");
    return 1;
}
