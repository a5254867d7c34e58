#include <chrono>
#include <cstdio>

#include "proxid/sim.hpp"

using namespace proxid;

static void show(const char* name, const ExperimentConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep = run_experiment(cfg);
    auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    printf("==== %s (%.1fs) ====\n%s\n", name, dt, rep.text_table().c_str());
}

int main(int argc, char** argv) {
    int which = argc > 1 ? atoi(argv[1]) : 0;

    if (which == 0 || which == 1) {
        ExperimentConfig cfg;  // criterion-5 shape
        cfg.n_dgps = 2;
        cfg.datasets_per_dgp = 16;
        cfg.n = 4000;
        cfg.seed = 20240901;
        show("table1 desk gaussian n=4000", cfg);
    }
    if (which == 6) {
        ExperimentConfig cfg;
        cfg.n_dgps = 2;
        cfg.datasets_per_dgp = 4;
        cfg.n = 32000;
        cfg.seed = 20240901;
        cfg.estimators = {EstimatorId::OracleBackdoor, EstimatorId::ProximalFrontDoor};
        show("proxfd n=32000", cfg);
    }
    if (which == 0 || which == 2) {
        ExperimentConfig cfg;  // criterion-6 shape
        cfg.n_dgps = 2;
        cfg.datasets_per_dgp = 16;
        cfg.n = 4000;
        cfg.bootstrap = 64;
        cfg.seed = 20240901;
        cfg.sweeps = {{"A_Y", {0.0, 0.8}}};
        show("table2 desk A_Y sweep", cfg);
    }
    if (which == 0 || which == 3) {
        ExperimentConfig cfg;  // criterion-7 shape
        cfg.n_dgps = 2;
        cfg.datasets_per_dgp = 16;
        cfg.n = 4000;
        cfg.seed = 20240901;
        cfg.sweeps = {{"Z_M", {0.0, 0.8}}, {"M_W", {0.0, 0.8}}};
        show("table3 desk Z_M=M_W sweep", cfg);
    }
    if (which == 0 || which == 4) {
        ExperimentConfig cfg;  // criterion-8 shape
        cfg.n_dgps = 2;
        cfg.datasets_per_dgp = 16;
        cfg.n = 4000;
        cfg.bootstrap = 64;
        cfg.seed = 20240901;
        cfg.sweeps = {{"U_Z", {0.0, 0.4}}, {"U_W", {0.0, 0.4}}};
        show("table4 desk U_Z=U_W sweep", cfg);
    }
    if (which == 5) {
        ExperimentConfig cfg;
        cfg.n_dgps = 2;
        cfg.datasets_per_dgp = 8;
        cfg.n = 4000;
        cfg.mode = SimMode::Binary;
        cfg.seed = 20240901;
        show("binary mode quick", cfg);
    }
    return 0;
}
