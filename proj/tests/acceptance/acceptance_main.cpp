#include <iostream>

#include "criteria.hpp"

int main() {
    int failed = 0;
    for (const auto& r : ristwin::acceptance::run_all()) {
        std::cout << ristwin::acceptance::format_line(r) << '\n' << std::flush;
        if (!r.passed) ++failed;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
    return failed == 0 ? 0 : 1;
}
