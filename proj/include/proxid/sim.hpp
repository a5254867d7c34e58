#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxid/rng.hpp"

namespace proxid {

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SimMode { Gaussian, Binary };

// Linear structural equation model over the simulation graph
// {C, U, Z, A, M, W, Y}: the control proxy Z causes the treatment, A is
// always binary, Z and M switch to clipped linear-probability Bernoulli
// mechanisms in binary mode, everything else is Gaussian with unit noise.
struct LinearSem {
    SimMode mode = SimMode::Gaussian;
    std::map<std::string, double> coef;  // edge keys like "A_Y", "U_Z"

    double get(const std::string& edge) const { return coef.at(edge); }
};

// the edges of the data-generating process, tails before heads
const std::vector<std::string>& sem_edges();

// every coefficient i.i.d. Unif(-2, 2); deterministic per seed
LinearSem sample_dgp(uint64_t seed, SimMode mode = SimMode::Gaussian);

struct Dataset {
    int n = 0;
    std::map<std::string, std::vector<double>> cols;  // U C Z W M A Y
    const std::vector<double>& col(const std::string& name) const { return cols.at(name); }
};

Dataset simulate(const LinearSem& sem, int n, uint64_t seed);

// Gaussian mode: the sum over directed A->...->Y path coefficient products.
// Binary mode: forward Monte-Carlo interventional contrast.
double true_ate(const LinearSem& sem, int mc_samples = 1000000, uint64_t mc_seed = 99);

enum class EstimatorId { OracleBackdoor, NaiveFrontDoor, SimpleProximal, ProximalFrontDoor };

std::string estimator_name(EstimatorId id);
std::optional<EstimatorId> estimator_from_name(const std::string& name);

// Point estimate of the ATE. The oracle sees U; everything else must not.
// Throws SimError on degenerate designs or GMM failures.
double estimate(EstimatorId id, const Dataset& data, uint64_t seed, int trajectories = 100);

// Percentile bootstrap over B row-resamples. Failed resamples are skipped
// and counted; the interval uses the successes.
struct BootstrapInterval {
    double lo = 0, hi = 0;
    int failures = 0;
    int successes = 0;
};
BootstrapInterval bootstrap_ci(EstimatorId id, const Dataset& data, int B, double level,
                               uint64_t seed, int trajectories = 100);

// --- experiment harness -------------------------------------------------------

struct ExperimentConfig {
    int n_dgps = 4;
    int datasets_per_dgp = 64;
    int n = 4000;
    SimMode mode = SimMode::Gaussian;
    int bootstrap = 0;  // 0: no intervals
    double level = 0.95;
    uint64_t seed = 20240901;
    int trajectories = 100;
    int jobs = 1;
    bool per_cell = false;
    std::map<std::string, double> overrides;            // edge -> value
    std::vector<std::pair<std::string, std::vector<double>>> sweeps;  // zipped lists
    std::vector<EstimatorId> estimators = {EstimatorId::OracleBackdoor, EstimatorId::NaiveFrontDoor,
                                           EstimatorId::SimpleProximal,
                                           EstimatorId::ProximalFrontDoor};
};

// flat key=value text: n_dgps, datasets_per_dgp, n, mode, bootstrap, level,
// seed, trajectories, jobs, per_cell, override.<edge>=v, sweep.<edge>=v1,v2,...
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

struct MetricRow {
    std::string estimator;
    double mean_abs_bias = 0;
    double pct_abs_bias = 0;
    double coverage = 0;  // -1 when no bootstrap ran
    double width = 0;
    int failures = 0;
};

struct CellEstimate {
    int sweep_index = 0, dgp = 0, dataset = 0;
    std::string estimator;
    double truth = 0;
    double est = 0;
    bool ok = false;
    double lo = 0, hi = 0;
    bool has_ci = false;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<std::string> sweep_labels;
    std::vector<std::vector<MetricRow>> per_sweep;  // [sweep][estimator]
    std::vector<CellEstimate> cells;                // filled when per_cell

    std::string results_csv() const;
    std::string text_table() const;
};

// Deterministic for a given config regardless of the job count.
ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace proxid
