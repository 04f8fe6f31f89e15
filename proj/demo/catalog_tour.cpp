// Loads the shipped catalog, lists its loops, and prints the two endpoints of A1.
#include <rauzy.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace rauzy;
    const Catalog c = load_catalog_file(argc > 1 ? argv[1] : RAUZY_DEFAULT_CATALOG);
    for (const auto& loop : enumerate_minimal_depth0_loops(c)) {
        const auto cls = classify_combining(loop.matrix);
        std::cout << loop.str() << "  [" << loop.matrix.str() << "]  active";
        for (int a : cls.active) std::cout << ' ' << a;
        if (cls.idle) std::cout << "  idle " << *cls.idle;
        std::cout << '\n';
    }
    EndpointRealizer r(c, 128);
    for (Direction d : {Direction::L, Direction::R}) {
        std::cout << "A1 " << to_char(d) << "-endpoint:";
        for (const auto& x : r.endpoint("A1", d).normalized()) std::cout << ' ' << to_decimal(x, 6);
        std::cout << '\n';
    }
}
