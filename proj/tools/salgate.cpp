#include <string>
#include <vector>

#include "salgate/cli.hpp"

int main(int argc, char** argv) {
    return salgate::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
