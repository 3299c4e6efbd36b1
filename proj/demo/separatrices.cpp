// Integrates the unstable separatrix of each projectivized Riccati flow and compares it with the
// corresponding ratio of Abelian integrals.
#include "eightloop/riccati.hpp"

#include <cmath>
#include <cstdio>

using namespace eightloop;

int main() {
    const std::vector<double> grid = interior_grid(12, 1e-3);
    for (RiccatiId id : {RiccatiId::Nu, RiccatiId::Omega, RiccatiId::U, RiccatiId::V, RiccatiId::W}) {
        RiccatiSystem sys = riccati_system(id);
        RatioCurve sep = separatrix(sys, grid), ref = ratio_curve(id, grid);
        GeometryReport g = check_geometry(sys);
        std::printf("# %s: saddle r = %.6g, slope %.6g, geometry %s\n", to_string(id), sys.saddle_r, sys.slope,
                    g.ok() ? "ok" : g.violations.front().c_str());
        std::printf("h,separatrix,ratio,difference\n");
        for (std::size_t i = 0; i < grid.size(); ++i)
            std::printf("%.6f,%.12f,%.12f,%.2e\n", grid[i], sep.value[i], ref.value[i], std::abs(sep.value[i] - ref.value[i]));
        std::printf("\n");
    }
}
