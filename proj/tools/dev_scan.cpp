// Development scratch: scan gradient-suite seeds and epsilons.
#include <cstdlib>
#include <iostream>

#include "fsrec/gradsuite.hpp"

using namespace fsrec;

int main(int argc, char** argv) {
    std::uint64_t seed_lo = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;
    std::uint64_t seed_hi = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : seed_lo + 1;
    double eps = argc > 3 ? std::strtod(argv[3], nullptr) : 1e-5;
    for (std::uint64_t seed = seed_lo; seed < seed_hi; ++seed) {
        double worst = 0.0;
        std::cout << "seed " << seed << ":";
        for (const auto& r : nn::run_gradient_suite(seed, eps)) {
            std::cout << " " << nn::to_string(r.mode) << "=" << r.max_rel_error;
            worst = std::max(worst, r.max_rel_error);
        }
        std::cout << (worst < 1e-4 ? "  PASS" : "  fail") << std::endl;
    }
    return 0;
}
