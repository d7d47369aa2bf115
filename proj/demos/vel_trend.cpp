// Vertex extremal length from the root to growing spheres: the hexagonal
// lattice keeps growing, the degree-7 tessellation levels off.

#include <iostream>

#include "crflab/vel.hpp"

namespace {

void show(const char* name, const crflab::vel::TrendReport& rep) {
    std::cout << name << '\n';
    for (const auto& e : rep.entries)
        std::cout << "  radius " << e.radius << "  |sphere| " << e.sphere_size << "  VEL " << e.estimate.vel
                  << "  rounds " << e.estimate.iterations << '\n';
    std::cout << "  -> " << to_string(rep.label) << '\n';
}

}

int main() {
    using namespace crflab;
    show("hexagonal", vel::classify(build_hexagonal(12), {0}, {3, 6, 9, 12}));
    show("degree 7", vel::classify(build_constant_degree(7, 5), {0}, {2, 3, 4, 5}));
}
