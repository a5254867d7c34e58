#include <cstdio>

#include "proxid/sim.hpp"

using namespace proxid;

int main(int argc, char** argv) {
    for (int k = 1; k < argc; k++) {
        uint64_t seed = strtoull(argv[k], nullptr, 10);
        auto cov = [&](const ExperimentReport& r, size_t sweep, int est) {
            return r.per_sweep[sweep][est].coverage;
        };
        ExperimentConfig c6;
        c6.n_dgps = 2;
        c6.datasets_per_dgp = 16;
        c6.n = 4000;
        c6.bootstrap = 64;
        c6.seed = seed;
        c6.jobs = 2;
        c6.sweeps = {{"A_Y", {0.0, 0.8}}};
        ExperimentReport r6 = run_experiment(c6);
        bool ok6 = cov(r6, 0, 1) >= 0.65 && cov(r6, 1, 1) <= 0.08 && cov(r6, 0, 2) <= 0.08 &&
                   cov(r6, 1, 2) <= 0.08 && cov(r6, 0, 3) >= 0.88 && cov(r6, 1, 3) >= 0.88;
        printf("seed %llu c6: naive=%.3f->%.3f simple=%.3f->%.3f proxfd=%.3f->%.3f %s\n",
               (unsigned long long)seed, cov(r6, 0, 1), cov(r6, 1, 1), cov(r6, 0, 2),
               cov(r6, 1, 2), cov(r6, 0, 3), cov(r6, 1, 3), ok6 ? "OK" : "fail");
        fflush(stdout);

        ExperimentConfig c8 = c6;
        c8.sweeps = {{"U_Z", {0.0, 0.4}}, {"U_W", {0.0, 0.4}}};
        ExperimentReport r8 = run_experiment(c8);
        bool ok8 = cov(r8, 0, 3) <= 0.55 && cov(r8, 1, 3) >= 0.88;
        printf("seed %llu c8: proxfd=%.3f->%.3f oracle=%.3f->%.3f %s\n", (unsigned long long)seed,
               cov(r8, 0, 3), cov(r8, 1, 3), cov(r8, 0, 0), cov(r8, 1, 0), ok8 ? "OK" : "fail");
        fflush(stdout);
    }
    return 0;
}
