#include <iostream>

int main() {
    std::cout << "heatlab: placeholder\n";
    return 0;
}
