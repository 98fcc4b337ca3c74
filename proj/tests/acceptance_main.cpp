// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. FROZEN_ER_ACCEPT_QUICK=1 trims the Monte Carlo load for smoke use.

#include <cstdio>
#include <cstdlib>

#include "frozen_er/verify.hpp"

int main() {
    frozen_er::AcceptanceOptions opt;
    if (const char* q = std::getenv("FROZEN_ER_ACCEPT_QUICK"))
        opt.quick = q[0] == '1';
    const auto results = frozen_er::run_acceptance(opt);
    bool all = true;
    for (const auto& r : results) {
        std::printf("%s  criterion %2d: %s (%s) [%.1fs]\n", r.pass ? "PASS" : "FAIL",
                    r.id, r.name.c_str(), r.detail.c_str(), r.seconds);
        std::fflush(stdout);
        all = all && r.pass;
    }
    return all ? 0 : 1;
}
