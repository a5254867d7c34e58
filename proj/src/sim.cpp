#include "proxid/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>
#include <atomic>

#include "proxid/linalg.hpp"

namespace proxid {

namespace {

constexpr double kProbClip = 0.01;

double clip_prob(double p) { return std::min(0.99, std::max(kProbClip, p)); }

// binary mechanisms use a logistic link around an even base rate, clipped to
// keep every treatment arm reachable
double link_prob(double loc) { return clip_prob(1.0 / (1.0 + std::exp(-loc))); }

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

const std::vector<std::string>& sem_edges() {
    static const std::vector<std::string> edges = {
        "C_U", "U_A", "U_Y", "U_Z", "U_W", "C_A", "C_M", "C_Y", "C_W",
        "C_Z", "Z_A", "Z_M", "A_M", "A_Y", "M_Y", "M_W", "W_Y",
    };
    return edges;
}

LinearSem sample_dgp(uint64_t seed, SimMode mode) {
    LinearSem sem;
    sem.mode = mode;
    Rng rng(derive_seed(seed, 0xd69));
    for (const auto& e : sem_edges()) sem.coef[e] = rng.uniform(-2.0, 2.0);
    return sem;
}

Dataset simulate(const LinearSem& sem, int n, uint64_t seed) {
    Dataset d;
    d.n = n;
    for (const char* name : {"U", "C", "Z", "W", "M", "A", "Y"}) d.cols[name].resize(n);
    Rng rng(derive_seed(seed, 0x51e));
    const bool binary_zm = sem.mode == SimMode::Binary;
    auto& c = d.cols["C"];
    auto& u = d.cols["U"];
    auto& z = d.cols["Z"];
    auto& a = d.cols["A"];
    auto& m = d.cols["M"];
    auto& w = d.cols["W"];
    auto& y = d.cols["Y"];
    for (int i = 0; i < n; i++) {
        c[i] = rng.normal();
        u[i] = sem.get("C_U") * c[i] + rng.normal();
        double z_loc = sem.get("U_Z") * u[i] + sem.get("C_Z") * c[i];
        z[i] = binary_zm ? (rng.bernoulli(link_prob(z_loc)) ? 1.0 : 0.0) : z_loc + rng.normal();
        double p_a = link_prob(sem.get("U_A") * u[i] + sem.get("C_A") * c[i] +
                               sem.get("Z_A") * z[i]);
        a[i] = rng.bernoulli(p_a) ? 1.0 : 0.0;
        double m_loc = sem.get("A_M") * a[i] + sem.get("Z_M") * z[i] + sem.get("C_M") * c[i];
        m[i] = binary_zm ? (rng.bernoulli(link_prob(m_loc)) ? 1.0 : 0.0) : m_loc + rng.normal();
        w[i] = sem.get("M_W") * m[i] + sem.get("U_W") * u[i] + sem.get("C_W") * c[i] + rng.normal();
        y[i] = sem.get("A_Y") * a[i] + sem.get("M_Y") * m[i] + sem.get("W_Y") * w[i] +
               sem.get("U_Y") * u[i] + sem.get("C_Y") * c[i] + rng.normal();
    }
    return d;
}

double true_ate(const LinearSem& sem, int mc_samples, uint64_t mc_seed) {
    if (sem.mode == SimMode::Gaussian) {
        // directed A->Y paths: direct, through M, and through M then W
        return sem.get("A_Y") + sem.get("A_M") * sem.get("M_Y") +
               sem.get("A_M") * sem.get("M_W") * sem.get("W_Y");
    }
    // binary mode: the clipped Bernoulli mediator breaks path tracing
    Rng rng(derive_seed(mc_seed, 0x7e0));
    double total = 0;
    for (int i = 0; i < mc_samples; i++) {
        double c = rng.normal();
        double u = sem.get("C_U") * c + rng.normal();
        double z_loc = sem.get("U_Z") * u + sem.get("C_Z") * c;
        double z = rng.bernoulli(link_prob(z_loc)) ? 1.0 : 0.0;
        double eps_m = rng.uniform();  // shared noise across both arms
        double eps_w = rng.normal();
        double eps_y = rng.normal();
        double contrast = 0;
        for (int arm = 1; arm >= 0; arm--) {
            double m_loc = sem.get("A_M") * arm + sem.get("Z_M") * z + sem.get("C_M") * c;
            double m = (eps_m < link_prob(m_loc)) ? 1.0 : 0.0;
            double w = sem.get("M_W") * m + sem.get("U_W") * u + sem.get("C_W") * c + eps_w;
            double yv = sem.get("A_Y") * arm + sem.get("M_Y") * m + sem.get("W_Y") * w +
                        sem.get("U_Y") * u + sem.get("C_Y") * c + eps_y;
            contrast += arm == 1 ? yv : -yv;
        }
        total += contrast;
    }
    return total / mc_samples;
}

// --- small regression helpers --------------------------------------------------

namespace {

struct Design {
    std::vector<const std::vector<double>*> cols;  // regressors, intercept implicit
    const std::vector<double>* weights = nullptr;
};

// weighted OLS of y on (1, cols...); returns coefficients, intercept first
std::vector<double> ols(const Dataset& d, const std::vector<std::string>& regressors,
                        const std::string& target, const std::vector<double>* weights,
                        double* resid_sd = nullptr) {
    int n = d.n;
    int k = static_cast<int>(regressors.size()) + 1;
    Matrix xtx(k, k);
    std::vector<double> xty(k, 0.0);
    const auto& yv = d.col(target);
    std::vector<const std::vector<double>*> xs;
    for (const auto& r : regressors) xs.push_back(&d.col(r));
    for (int i = 0; i < n; i++) {
        double wgt = weights ? (*weights)[i] : 1.0;
        std::vector<double> row(k);
        row[0] = 1.0;
        for (int j = 1; j < k; j++) row[j] = (*xs[j - 1])[i];
        for (int p = 0; p < k; p++) {
            xty[p] += wgt * row[p] * yv[i];
            for (int q = 0; q < k; q++) xtx.at(p, q) += wgt * row[p] * row[q];
        }
    }
    std::vector<double> beta = lstsq_min_norm(xtx, xty, 1e-12);
    if (resid_sd) {
        double ss = 0, wsum = 0;
        for (int i = 0; i < n; i++) {
            double wgt = weights ? (*weights)[i] : 1.0;
            double fit = beta[0];
            for (size_t j = 0; j < xs.size(); j++) fit += beta[j + 1] * (*xs[j])[i];
            ss += wgt * (yv[i] - fit) * (yv[i] - fit);
            wsum += wgt;
        }
        *resid_sd = std::sqrt(std::max(1e-12, ss / std::max(1.0, wsum)));
    }
    return beta;
}

// logistic regression of a binary target on (1, cols...) via IRLS
std::vector<double> logistic(const Dataset& d, const std::vector<std::string>& regressors,
                             const std::string& target) {
    int n = d.n;
    int k = static_cast<int>(regressors.size()) + 1;
    std::vector<const std::vector<double>*> xs;
    for (const auto& r : regressors) xs.push_back(&d.col(r));
    const auto& yv = d.col(target);
    std::vector<double> beta(k, 0.0);
    for (int iter = 0; iter < 40; iter++) {
        Matrix h(k, k);
        std::vector<double> g(k, 0.0);
        for (int i = 0; i < n; i++) {
            std::vector<double> row(k);
            row[0] = 1.0;
            for (int j = 1; j < k; j++) row[j] = (*xs[j - 1])[i];
            double eta = 0;
            for (int j = 0; j < k; j++) eta += beta[j] * row[j];
            double p = 1.0 / (1.0 + std::exp(-eta));
            p = std::min(1.0 - 1e-9, std::max(1e-9, p));
            double wgt = p * (1 - p);
            for (int p2 = 0; p2 < k; p2++) {
                g[p2] += row[p2] * (yv[i] - p);
                for (int q = 0; q < k; q++) h.at(p2, q) += wgt * row[p2] * row[q];
            }
        }
        std::vector<double> step = lstsq_min_norm(h, g, 1e-10);
        double move = 0;
        for (int j = 0; j < k; j++) {
            beta[j] += step[j];
            move = std::max(move, std::fabs(step[j]));
        }
        if (move < 1e-10) break;
    }
    return beta;
}

double logistic_prob(const std::vector<double>& beta, const std::vector<double>& row) {
    double eta = beta[0];
    for (size_t j = 0; j < row.size(); j++) eta += beta[j + 1] * row[j];
    return 1.0 / (1.0 + std::exp(-eta));
}

double normal_pdf(double x, double mu, double sd) {
    double zr = (x - mu) / sd;
    return std::exp(-0.5 * zr * zr) / (sd * 2.50662827463100050242);
}

// solves the square cross-moment system E[g x^T] eta = E[g y]; a singular
// system (an unidentified bridge) is reported, not silently zeroed
std::vector<double> gmm_solve(const Matrix& g_mat, const std::vector<double>& h) {
    if (numeric_rank(g_mat, 1e-10) < g_mat.cols)
        throw SimError("gmm: singular moment system");
    return lstsq_min_norm(g_mat, h, 1e-12);
}

double percentile(std::vector<double> v, double q) {
    if (v.empty()) throw SimError("percentile of empty sample");
    std::sort(v.begin(), v.end());
    double pos = q * (v.size() - 1);
    size_t lo = static_cast<size_t>(pos);
    size_t hi = std::min(v.size() - 1, lo + 1);
    double frac = pos - lo;
    return v[lo] * (1 - frac) + v[hi] * frac;
}

double estimate_oracle_backdoor(const Dataset& d) {
    auto beta = ols(d, {"A", "Z", "U", "C"}, "Y", nullptr);
    return beta[1];
}

double estimate_naive_frontdoor(const Dataset& d) {
    // plug-in of the front-door functional with linear outcome/mediator
    // models and a logistic treatment model
    auto theta = ols(d, {"A", "M", "C"}, "Y", nullptr);   // E[Y | a, m, c]
    auto gamma = ols(d, {"A", "C"}, "M", nullptr);        // E[M | a, c]
    auto prop = logistic(d, {"C"}, "A");                  // p(A=1 | c)
    double total = 0;
    for (int i = 0; i < d.n; i++) {
        double ci = d.col("C")[i];
        double p1 = logistic_prob(prop, {ci});
        double inner1 = 0, inner0 = 0;
        for (int atil = 0; atil <= 1; atil++) {
            double pa = atil == 1 ? p1 : 1 - p1;
            double mu_m1 = gamma[0] + gamma[1] * 1.0 + gamma[2] * ci;
            double mu_m0 = gamma[0] + gamma[2] * ci;
            inner1 += pa * (theta[0] + theta[1] * atil + theta[2] * mu_m1 + theta[3] * ci);
            inner0 += pa * (theta[0] + theta[1] * atil + theta[2] * mu_m0 + theta[3] * ci);
        }
        total += inner1 - inner0;
    }
    return total / d.n;
}

double estimate_simple_proximal(const Dataset& d) {
    // linear outcome bridge b(W, A, C) solved from the moment conditions
    // E[(Y - b) g] = 0 with instruments g = (1, Z, A, C)
    int n = d.n;
    const auto &yv = d.col("Y"), &wv = d.col("W"), &av = d.col("A"), &cv = d.col("C"),
               &zv = d.col("Z");
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
    std::vector<double> eta = gmm_solve(g_mat, h);
    return eta[2];  // the A slot of b(W, A, C)
}

double estimate_proximal_frontdoor(const Dataset& d, uint64_t seed, int trajectories) {
    const int n = d.n;
    const auto &yv = d.col("Y"), &wv = d.col("W"), &av = d.col("A"), &cv = d.col("C"),
               &zv = d.col("Z"), &mv = d.col("M");
    bool m_binary = true;
    for (int i = 0; i < n && m_binary; i++)
        if (mv[i] != 0.0 && mv[i] != 1.0) m_binary = false;

    // mediator propensity p(M | A, Z, C); stabilized weights p(m)/p(m|a,z,c)
    // turn the observed rows into draws from the mediator-fixed kernel
    std::vector<double> weights(n);
    std::vector<double> m_model;
    double m_sd = 1.0;
    if (m_binary) {
        double m_rate = 0;
        for (int i = 0; i < n; i++) m_rate += mv[i];
        m_rate /= n;
        m_model = logistic(d, {"A", "Z", "C"}, "M");
        for (int i = 0; i < n; i++) {
            double p1 = logistic_prob(m_model, {av[i], zv[i], cv[i]});
            double pm = mv[i] == 1.0 ? p1 : 1 - p1;
            double marg = mv[i] == 1.0 ? m_rate : 1 - m_rate;
            weights[i] = marg / std::max(1e-6, pm);
        }
    } else {
        double m_mean = 0, m_var = 0;
        for (int i = 0; i < n; i++) m_mean += mv[i];
        m_mean /= n;
        for (int i = 0; i < n; i++) m_var += (mv[i] - m_mean) * (mv[i] - m_mean);
        double m_marg_sd = std::sqrt(std::max(1e-12, m_var / n));
        m_model = ols(d, {"A", "Z", "C"}, "M", nullptr, &m_sd);
        for (int i = 0; i < n; i++) {
            double mu = m_model[0] + m_model[1] * av[i] + m_model[2] * zv[i] + m_model[3] * cv[i];
            weights[i] = normal_pdf(mv[i], m_mean, m_marg_sd) /
                         std::max(1e-9, normal_pdf(mv[i], mu, m_sd));
        }
    }
    // truncate weights at the 2.5th and 97.5th percentiles
    double w_lo = percentile(weights, 0.025), w_hi = percentile(weights, 0.975);
    for (auto& wt : weights) wt = std::min(w_hi, std::max(w_lo, wt));

    // outcome bridge b(W, A, C, M) under the weighted kernel by GMM with
    // instruments (1, Z, A, C, M)
    Matrix g_mat(5, 5);
    std::vector<double> h(5, 0.0);
    for (int i = 0; i < n; i++) {
        double g[5] = {1.0, zv[i], av[i], cv[i], mv[i]};
        double x[5] = {1.0, wv[i], av[i], cv[i], mv[i]};
        for (int p = 0; p < 5; p++) {
            h[p] += weights[i] * g[p] * yv[i];
            for (int q = 0; q < 5; q++) g_mat.at(p, q) += weights[i] * g[p] * x[q];
        }
    }
    std::vector<double> eta = gmm_solve(g_mat, h);

    // treatment propensity and the weighted W regression; under the weighted
    // kernel W still depends on the mediator value, so M stays a regressor
    auto a_model = logistic(d, {"Z", "C"}, "A");
    double w_sd = 1.0;
    auto w_model = ols(d, {"A", "Z", "C", "M"}, "W", &weights, &w_sd);

    // sample trajectories of Y(1) and Y(0) per data row
    Rng rng(derive_seed(seed, 0x7a0));
    double total = 0;
    long count = 0;
    for (int i = 0; i < n; i++) {
        double zi = zv[i], ci = cv[i];
        double pa1 = logistic_prob(a_model, {zi, ci});
        for (int t = 0; t < trajectories; t++) {
            double contrast = 0;
            for (int arm = 1; arm >= 0; arm--) {
                double m_draw;
                if (m_binary) {
                    double p1 = logistic_prob(m_model, {double(arm), zi, ci});
                    m_draw = rng.bernoulli(clip_prob(p1)) ? 1.0 : 0.0;
                } else {
                    double mu =
                        m_model[0] + m_model[1] * arm + m_model[2] * zi + m_model[3] * ci;
                    m_draw = mu + m_sd * rng.normal();
                }
                double a_til = rng.bernoulli(clip_prob(pa1)) ? 1.0 : 0.0;
                double w_mu = w_model[0] + w_model[1] * a_til + w_model[2] * zi +
                              w_model[3] * ci + w_model[4] * m_draw;
                double w_draw = w_mu + w_sd * rng.normal();
                double y_hat =
                    eta[0] + eta[1] * w_draw + eta[2] * arm + eta[3] * ci + eta[4] * m_draw;
                contrast += arm == 1 ? y_hat : -y_hat;
            }
            total += contrast;
            count++;
        }
    }
    return total / count;
}

}  // namespace

std::string estimator_name(EstimatorId id) {
    switch (id) {
        case EstimatorId::OracleBackdoor: return "OracleBackdoor";
        case EstimatorId::NaiveFrontDoor: return "NaiveFrontDoor";
        case EstimatorId::SimpleProximal: return "SimpleProximal";
        case EstimatorId::ProximalFrontDoor: return "ProximalFrontDoor";
    }
    return "?";
}

std::optional<EstimatorId> estimator_from_name(const std::string& name) {
    for (EstimatorId id : {EstimatorId::OracleBackdoor, EstimatorId::NaiveFrontDoor,
                           EstimatorId::SimpleProximal, EstimatorId::ProximalFrontDoor})
        if (estimator_name(id) == name) return id;
    return std::nullopt;
}

double estimate(EstimatorId id, const Dataset& data, uint64_t seed, int trajectories) {
    switch (id) {
        case EstimatorId::OracleBackdoor: return estimate_oracle_backdoor(data);
        case EstimatorId::NaiveFrontDoor: return estimate_naive_frontdoor(data);
        case EstimatorId::SimpleProximal: return estimate_simple_proximal(data);
        case EstimatorId::ProximalFrontDoor:
            return estimate_proximal_frontdoor(data, seed, trajectories);
    }
    throw SimError("unknown estimator");
}

BootstrapInterval bootstrap_ci(EstimatorId id, const Dataset& data, int B, double level,
                               uint64_t seed, int trajectories) {
    if (B < 2) throw SimError("bootstrap needs B >= 2");
    std::vector<double> estimates;
    BootstrapInterval out;
    for (int b = 0; b < B; b++) {
        Rng rng(derive_seed(seed, 0xb00, b));
        Dataset resample;
        resample.n = data.n;
        for (const auto& [name, col] : data.cols) resample.cols[name].resize(data.n);
        for (int i = 0; i < data.n; i++) {
            int pick = rng.uniform_int(data.n);
            for (auto& [name, col] : resample.cols) col[i] = data.cols.at(name)[pick];
        }
        try {
            estimates.push_back(estimate(id, resample, derive_seed(seed, 0xb01, b), trajectories));
        } catch (const SimError&) {
            out.failures++;
        }
    }
    if (estimates.empty()) throw SimError("all bootstrap resamples failed");
    out.successes = static_cast<int>(estimates.size());
    double alpha = (1.0 - level) / 2.0;
    out.lo = percentile(estimates, alpha);
    out.hi = percentile(estimates, 1.0 - alpha);
    return out;
}

// --- experiment harness ---------------------------------------------------------

ExperimentConfig parse_experiment_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool any = false;
    while (std::getline(in, line)) {
        lineno++;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
        size_t start = 0;
        while (start < line.size() && std::isspace(static_cast<unsigned char>(line[start]))) start++;
        line = line.substr(start);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw SimError("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq), value = line.substr(eq + 1);
        any = true;
        try {
            if (key == "n_dgps") cfg.n_dgps = std::stoi(value);
            else if (key == "datasets_per_dgp") cfg.datasets_per_dgp = std::stoi(value);
            else if (key == "n") cfg.n = std::stoi(value);
            else if (key == "bootstrap") cfg.bootstrap = std::stoi(value);
            else if (key == "level") cfg.level = std::stod(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "trajectories") cfg.trajectories = std::stoi(value);
            else if (key == "jobs") cfg.jobs = std::stoi(value);
            else if (key == "per_cell") cfg.per_cell = value == "1" || value == "true";
            else if (key == "mode") {
                if (value == "gaussian") cfg.mode = SimMode::Gaussian;
                else if (value == "binary") cfg.mode = SimMode::Binary;
                else throw SimError("unknown mode '" + value + "'");
            } else if (key == "estimators") {
                cfg.estimators.clear();
                for (const auto& name : split(value, ',')) {
                    auto id = estimator_from_name(name);
                    if (!id) throw SimError("unknown estimator '" + name + "'");
                    cfg.estimators.push_back(*id);
                }
            } else if (key.rfind("override.", 0) == 0) {
                cfg.overrides[key.substr(9)] = std::stod(value);
            } else if (key.rfind("sweep.", 0) == 0) {
                std::vector<double> vals;
                for (const auto& v : split(value, ',')) vals.push_back(std::stod(v));
                cfg.sweeps.emplace_back(key.substr(6), vals);
            } else {
                throw SimError("unknown config key '" + key + "'");
            }
        } catch (const SimError&) {
            throw;
        } catch (const std::exception&) {
            throw SimError("config line " + std::to_string(lineno) + ": bad value for " + key);
        }
    }
    if (!any) throw SimError("empty config");
    if (cfg.n_dgps < 1 || cfg.datasets_per_dgp < 1 || cfg.n < 1)
        throw SimError("config counts must be >= 1");
    if (cfg.level <= 0 || cfg.level >= 1) throw SimError("level must be in (0, 1)");
    for (const auto& [edge, vals] : cfg.sweeps) {
        if (std::find(sem_edges().begin(), sem_edges().end(), edge) == sem_edges().end())
            throw SimError("unknown sweep edge '" + edge + "'");
        if (vals.empty() || vals.size() != cfg.sweeps.front().second.size())
            throw SimError("sweep lists must be non-empty and aligned");
    }
    for (const auto& [edge, v] : cfg.overrides)
        if (std::find(sem_edges().begin(), sem_edges().end(), edge) == sem_edges().end())
            throw SimError("unknown override edge '" + edge + "'");
    const char* env_seed = std::getenv("PROXID_SEED");
    if (env_seed) cfg.seed = std::stoull(env_seed);
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SimError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str());
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    ExperimentReport report;
    report.config = cfg;
    size_t sweep_count = cfg.sweeps.empty() ? 1 : cfg.sweeps.front().second.size();
    for (size_t s = 0; s < sweep_count; s++) {
        if (cfg.sweeps.empty()) {
            report.sweep_labels.push_back("base");
        } else {
            std::string label;
            for (const auto& [edge, vals] : cfg.sweeps) {
                if (!label.empty()) label += " ";
                std::ostringstream v;
                v << edge << "=" << vals[s];
                label += v.str();
            }
            report.sweep_labels.push_back(label);
        }
    }

    struct Cell {
        double est = 0;
        bool ok = false;
        double lo = 0, hi = 0;
        bool has_ci = false;
    };
    size_t n_est = cfg.estimators.size();
    auto cell_index = [&](size_t s, int i, int j, size_t e) {
        return ((s * cfg.n_dgps + i) * cfg.datasets_per_dgp + j) * n_est + e;
    };
    std::vector<Cell> cells(sweep_count * cfg.n_dgps * cfg.datasets_per_dgp * n_est);
    std::vector<double> truths(sweep_count * cfg.n_dgps, 0.0);

    // truths are cheap except in binary mode; compute serially for determinism
    std::vector<LinearSem> sems(sweep_count * cfg.n_dgps);
    for (size_t s = 0; s < sweep_count; s++) {
        for (int i = 0; i < cfg.n_dgps; i++) {
            LinearSem sem = sample_dgp(derive_seed(cfg.seed, 0xd6, i), cfg.mode);
            for (const auto& [edge, v] : cfg.overrides) sem.coef[edge] = v;
            for (const auto& [edge, vals] : cfg.sweeps) sem.coef[edge] = vals[s];
            sems[s * cfg.n_dgps + i] = sem;
            truths[s * cfg.n_dgps + i] =
                true_ate(sem, 1000000, derive_seed(cfg.seed, 0x7e, s, i));
        }
    }

    // grid cells are independent; per-cell seeds keep any schedule bit-identical
    std::vector<std::tuple<size_t, int, int>> jobs_list;
    for (size_t s = 0; s < sweep_count; s++)
        for (int i = 0; i < cfg.n_dgps; i++)
            for (int j = 0; j < cfg.datasets_per_dgp; j++) jobs_list.emplace_back(s, i, j);

    std::atomic<size_t> next_job{0};
    auto worker = [&]() {
        while (true) {
            size_t idx = next_job.fetch_add(1);
            if (idx >= jobs_list.size()) return;
            auto [s, i, j] = jobs_list[idx];
            const LinearSem& sem = sems[s * cfg.n_dgps + i];
            Dataset data = simulate(sem, cfg.n, derive_seed(cfg.seed, 0xda + s, i, j));
            for (size_t e = 0; e < n_est; e++) {
                Cell& cell = cells[cell_index(s, i, j, e)];
                uint64_t est_seed = derive_seed(cfg.seed, 0xe5 + s, i * 1000 + j, e);
                try {
                    cell.est = estimate(cfg.estimators[e], data, est_seed, cfg.trajectories);
                    cell.ok = true;
                } catch (const SimError&) {
                    cell.ok = false;
                }
                if (cfg.bootstrap >= 2 && cell.ok) {
                    try {
                        BootstrapInterval ci = bootstrap_ci(cfg.estimators[e], data, cfg.bootstrap,
                                                            cfg.level, est_seed, cfg.trajectories);
                        cell.lo = ci.lo;
                        cell.hi = ci.hi;
                        cell.has_ci = true;
                    } catch (const SimError&) {
                        cell.has_ci = false;
                    }
                }
            }
        }
    };
    int n_jobs = std::max(1, cfg.jobs);
    if (n_jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_jobs; t++) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (size_t s = 0; s < sweep_count; s++) {
        std::vector<MetricRow> rows;
        for (size_t e = 0; e < n_est; e++) {
            MetricRow row;
            row.estimator = estimator_name(cfg.estimators[e]);
            double bias_sum = 0, pct_sum = 0;
            double cover_sum = 0, width_sum = 0;
            int cover_n = 0;
            for (int i = 0; i < cfg.n_dgps; i++) {
                double truth = truths[s * cfg.n_dgps + i];
                double dev_sum = 0;
                int dev_n = 0;
                for (int j = 0; j < cfg.datasets_per_dgp; j++) {
                    const Cell& cell = cells[cell_index(s, i, j, e)];
                    if (!cell.ok) {
                        row.failures++;
                        continue;
                    }
                    dev_sum += cell.est - truth;
                    dev_n++;
                    if (cell.has_ci) {
                        cover_sum += (cell.lo <= truth && truth <= cell.hi) ? 1.0 : 0.0;
                        width_sum += cell.hi - cell.lo;
                        cover_n++;
                    }
                    if (cfg.per_cell) {
                        CellEstimate ce;
                        ce.sweep_index = static_cast<int>(s);
                        ce.dgp = i;
                        ce.dataset = j;
                        ce.estimator = row.estimator;
                        ce.truth = truth;
                        ce.est = cell.est;
                        ce.ok = cell.ok;
                        ce.lo = cell.lo;
                        ce.hi = cell.hi;
                        ce.has_ci = cell.has_ci;
                        report.cells.push_back(ce);
                    }
                }
                double mean_dev = dev_n > 0 ? dev_sum / dev_n : 0.0;
                bias_sum += std::fabs(mean_dev);
                pct_sum += std::fabs(mean_dev) / std::max(1e-12, std::fabs(truth));
            }
            row.mean_abs_bias = bias_sum / cfg.n_dgps;
            row.pct_abs_bias = pct_sum / cfg.n_dgps;
            row.coverage = cover_n > 0 ? cover_sum / cover_n : -1.0;
            row.width = cover_n > 0 ? width_sum / cover_n : 0.0;
            rows.push_back(row);
        }
        report.per_sweep.push_back(std::move(rows));
    }
    return report;
}

std::string ExperimentReport::results_csv() const {
    std::ostringstream out;
    out << "setting,estimator,mean_abs_bias,pct_abs_bias,coverage,width,failures\n";
    out.precision(6);
    out << std::fixed;
    for (size_t s = 0; s < per_sweep.size(); s++) {
        for (const auto& row : per_sweep[s]) {
            out << sweep_labels[s] << "," << row.estimator << "," << row.mean_abs_bias << ","
                << row.pct_abs_bias << ",";
            if (row.coverage >= 0)
                out << row.coverage;
            out << "," << row.width << "," << row.failures << "\n";
        }
    }
    return out.str();
}

std::string ExperimentReport::text_table() const {
    std::ostringstream out;
    bool with_ci = !per_sweep.empty() && !per_sweep[0].empty() && per_sweep[0][0].coverage >= 0;
    std::vector<std::string> metrics =
        with_ci ? std::vector<std::string>{"Coverage", "Width"}
                : std::vector<std::string>{"Mean Abs Bias", "Pct Abs Bias"};
    out << std::left;
    out.setf(std::ios::fixed);
    out.precision(3);
    out.width(22);
    out << "Estimator";
    for (const auto& metric : metrics)
        for (const auto& label : sweep_labels) {
            out.width(std::max<size_t>(12, label.size() + 2));
            out << (metric.substr(0, 3) + " " + label);
        }
    out << "\n";
    if (per_sweep.empty()) return out.str();
    for (size_t e = 0; e < per_sweep[0].size(); e++) {
        out.width(22);
        out << per_sweep[0][e].estimator;
        for (const auto& metric : metrics) {
            for (size_t s = 0; s < per_sweep.size(); s++) {
                const MetricRow& row = per_sweep[s][e];
                double v = metric == "Coverage"    ? row.coverage
                           : metric == "Width"     ? row.width
                           : metric == "Mean Abs Bias" ? row.mean_abs_bias
                                                       : row.pct_abs_bias;
                out.width(std::max<size_t>(12, sweep_labels[s].size() + 2));
                out << v;
            }
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace proxid
