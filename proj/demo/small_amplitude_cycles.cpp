// Builds the 3+3 small-amplitude construction, perturbs the eight-loop with it and counts the limit
// cycles the simulator finds on each annulus. Takes a minute or so.
#include "eightloop/simulator.hpp"
#include "eightloop/zeros.hpp"

#include <cstdio>

using namespace eightloop;

int main() {
    ConstructionCycles c = simulate_construction(Theorem4Target::ThreeThree);
    for (Annulus an : {Annulus::Right, Annulus::Left}) {
        ZeroReport z = count_envelope_zeros(c.envelope, an);
        std::printf("%s envelope zeros (s = h + 1/4):", to_string(an));
        for (const Zero& q : z.zeros) std::printf(" %.6g", q.h + 0.25);
        std::printf("\n");
    }
    for (const auto* side : {&c.right, &c.left})
        for (const LimitCycleFinding& f : *side)
            std::printf("cycle %s s = %.6g %s residual %.2e\n", to_string(f.annulus), f.h_star + 0.25, to_string(f.stability),
                        f.residual);
    std::printf("found %zu + %zu\n", c.right.size(), c.left.size());
}
