/*
 * Acceptance gate: runs every registered verification check and prints one
 * pass/fail line per check. Exit status 0 only when all checks pass, so this
 * binary doubles as the release gate under ctest.
 */
#include <cstdio>
#include <exception>

#include "noisyopt/experiment.hpp"
#include "noisyopt/verify.hpp"

int main() {
    using namespace noisyopt;
    VerifyContext ctx(default_jobs());
    int failures = 0;
    for (const std::string& name : verification_names()) {
        try {
            const CheckOutcome o = run_verification(name, ctx);
            std::printf("[%s] %s: %s (expected: %s)\n",
                        o.pass ? "PASS" : "FAIL", o.name.c_str(),
                        o.measured.c_str(), o.expected.c_str());
            if (!o.pass) ++failures;
        } catch (const std::exception& e) {
            std::printf("[FAIL] %s: threw %s\n", name.c_str(), e.what());
            ++failures;
        }
        std::fflush(stdout);
    }
    if (failures == 0) {
        std::printf("all checks passed\n");
        return 0;
    }
    std::printf("%d check(s) failed\n", failures);
    return 1;
}
