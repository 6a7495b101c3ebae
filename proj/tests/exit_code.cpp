// exit_code <expected> <program> [args...]: runs the program and checks its exit status.
#include <cstdio>
#include <cstdlib>
#include <string>
#include <sys/wait.h>

int main(int argc, char** argv) {
    if (argc < 3) return 3;
    std::string cmd;
    for (int i = 2; i < argc; ++i) cmd += std::string("'") + argv[i] + "' ";
    cmd += ">/dev/null 2>&1";
    int st = std::system(cmd.c_str());
    int code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    std::printf("exit status %d, expected %s\n", code, argv[1]);
    return code == std::atoi(argv[1]) ? 0 : 1;
}
