// Prints the full classification tables for every system up to 2 x 5 x 5.

#include <iostream>

#include "slocc/enumerate.hpp"

int main() {
    using namespace slocc;
    const std::pair<int, int> systems[] = {{2, 2}, {2, 3}, {2, 4}, {3, 3}, {3, 4},
                                           {3, 5}, {4, 4}, {4, 5}, {5, 5}};
    for (const auto& [m, n] : systems) {
        std::cout << "## 2 x " << m << " x " << n << "\n\n";
        std::cout << render_table(enumerate_classes(m, n), table_format::markdown) << "\n";
    }
    return 0;
}
