#include <string>
#include <vector>

#include "coastal/cli.hpp"

int main(int argc, char** argv) {
    return coastal::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
