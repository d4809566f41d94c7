// Word-problem server speaking the line protocol: one word per line on stdin
// (space-separated generator names), "1"/"0" per line on stdout. Implements
// the infinite cyclic group with generators a, a^-1.
#include <iostream>
#include <sstream>
#include <string>

int main() {
    std::string line;
    while (std::getline(std::cin, line)) {
        std::istringstream in(line);
        std::string tok;
        long long sum = 0;
        bool ok = true;
        while (in >> tok) {
            if (tok == "a") {
                ++sum;
            } else if (tok == "a^-1") {
                --sum;
            } else {
                ok = false;
            }
        }
        std::cout << ((ok && sum == 0) ? "1" : "0") << std::endl;
    }
    return 0;
}
