// For each target split R+L with R >= L, searches for a second-order envelope with at least R zeros
// on the right annulus and L on the left, and prints the counts of the best envelope found.
#include "eightloop/zeros.hpp"

#include <cstdio>

using namespace eightloop;

int main() {
    std::printf("target,found,reached,evaluations,alpha0,alpha1,beta0,beta1,gamma0,gamma1\n");
    for (int r = 0; r <= 5; ++r)
        for (int l = 0; l <= r && r + l <= 9; ++l) {
            SearchResult s = search_distribution(r, l, 1500, 7);
            const Envelope& e = s.best;
            std::printf("%d+%d,%d+%d,%s,%d,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g\n", r, l, s.right, s.left, s.reached ? "yes" : "no", s.evaluations,
                        e.alpha0, e.alpha1, e.beta0, e.beta1, e.gamma0, e.gamma1);
        }
}
