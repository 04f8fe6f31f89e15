// Runs Rauzy induction on a 4-IET and checks the length identity after each step.
#include <rauzy.hpp>

#include <iostream>

int main() {
    using namespace rauzy;
    const IET T = IET::parse("(4321) 2/10,3/10,4/10,1/10");
    IET cur = T;
    ConeMatrix M = ConeMatrix::identity(4);
    for (int k = 1; k <= 12; ++k) {
        InductionOutcome o = rauzy_step(cur);
        if (o.is_tie()) {
            std::cout << "step " << k << ": tie\n";
            break;
        }
        M = M * *o.matrix;
        cur = *o.successor;
        const bool exact = M.apply(cur.lengths.entries()) == T.lengths.entries();
        std::cout << "step " << k << ' ' << to_char(o.step()) << "  " << cur.str() << "  identity "
                  << (exact ? "holds" : "BROKEN") << '\n';
    }
    std::cout << "M = " << M.str() << '\n';
}
