#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "proxid/graph_text.hpp"
#include "proxid/json_io.hpp"
#include "proxid/proximal.hpp"
#include "proxid/sim.hpp"
#include "proxid/verify.hpp"

using namespace proxid;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNotIdentified = 2;
constexpr int kExitVerifyFailed = 3;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

int run_identify(const std::string& graph_path, const std::string& query_path, bool proximal,
                 const std::string& out_path) {
    Admg g = load_graph_file(graph_path);
    CausalQuery q = load_query_file(query_path);
    IdVerdict verdict = proximal ? proximal_identify(g, q) : identify(g, q);
    ordered_json j = verdict_to_json(verdict);
    if (!out_path.empty()) write_file(out_path, j.dump(2) + "\n");
    if (!verdict.identified) {
        std::cout << "not identified\n";
        std::cout << "witness district: {" << join_names(verdict.failure.witness_district)
                  << "}\n";
        std::cout << "stuck set: {" << join_names(verdict.failure.stuck) << "}\n";
        return kExitNotIdentified;
    }
    std::cout << render_text(verdict.success.estimand) << "\n";
    for (const auto& step : verdict.success.trace) {
        std::cout << "  [" << step.district << "] " << step.kind;
        if (!step.target.empty()) std::cout << " " << step.target;
        if (!step.m_star.empty()) std::cout << " m*=" << step.m_star;
        if (!step.z_set.empty()) std::cout << " z=" << step.z_set;
        if (!step.u_star.empty()) std::cout << " u*=" << step.u_star;
        if (!step.inductive_scope.empty()) std::cout << " inductive=" << step.inductive_scope;
        if (!step.reusing_scope.empty()) std::cout << " reusing=" << step.reusing_scope;
        if (!step.note.empty()) std::cout << " (" << step.note << ")";
        std::cout << "\n";
    }
    return kExitOk;
}

int run_verify(const std::string& graph_path, const std::string& query_path, bool proximal,
               int trials, uint64_t seed, double tol, const std::string& out_path) {
    Admg g = load_graph_file(graph_path);
    CausalQuery q = load_query_file(query_path);
    if (trials == 0) {
        std::cout << "verify: 0 trials requested, vacuously passing\n";
        return kExitOk;
    }
    VerifyConfig cfg;
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.tol = tol;
    cfg.proximal = proximal;
    VerifyReport rep = verify_query(g, q, cfg);
    if (!rep.identified) {
        std::cout << "query not identified; nothing to verify\n";
        return kExitNotIdentified;
    }
    std::cout << "trials: " << rep.trials << "  passed: " << rep.passed
              << "  rank-skipped: " << rep.skipped_rank << "  failed: " << rep.failed << "\n";
    std::cout << "max abs error: " << rep.max_err << "\n";
    if (rep.trials > 0)
        std::cout << "rank-check pass rate: "
                  << static_cast<double>(rep.trials - rep.skipped_rank) / rep.trials << "\n";
    if (rep.failed > 0) {
        std::string path = out_path.empty() ? "verify_failure_scm.json" : out_path;
        write_file(path, rep.first_failure_scm + "\n");
        std::cout << "first failing scm written to " << path << " for replay\n";
        return kExitVerifyFailed;
    }
    return kExitOk;
}

int run_simulate(const std::string& config_path, const std::string& out_dir, int jobs_override) {
    ExperimentConfig cfg = load_experiment_config(config_path);
    if (jobs_override > 0) cfg.jobs = jobs_override;
    ExperimentReport rep = run_experiment(cfg);
    fs::create_directories(out_dir);
    write_file(out_dir + "/results.csv", rep.results_csv());
    write_file(out_dir + "/table.txt", rep.text_table());

    ordered_json j;
    j["config"] = ordered_json::object();
    j["config"]["n_dgps"] = rep.config.n_dgps;
    j["config"]["datasets_per_dgp"] = rep.config.datasets_per_dgp;
    j["config"]["n"] = rep.config.n;
    j["config"]["mode"] = rep.config.mode == SimMode::Gaussian ? "gaussian" : "binary";
    j["config"]["bootstrap"] = rep.config.bootstrap;
    j["config"]["level"] = rep.config.level;
    j["config"]["seed"] = rep.config.seed;
    ordered_json sweeps = ordered_json::array();
    for (size_t s = 0; s < rep.sweep_labels.size(); s++) {
        ordered_json sj;
        sj["setting"] = rep.sweep_labels[s];
        ordered_json rows = ordered_json::array();
        for (const auto& row : rep.per_sweep[s]) {
            ordered_json rj;
            rj["estimator"] = row.estimator;
            rj["mean_abs_bias"] = row.mean_abs_bias;
            rj["pct_abs_bias"] = row.pct_abs_bias;
            if (row.coverage >= 0) {
                rj["coverage"] = row.coverage;
                rj["width"] = row.width;
            }
            rj["failures"] = row.failures;
            rows.push_back(rj);
        }
        sj["rows"] = rows;
        sweeps.push_back(sj);
    }
    j["results"] = sweeps;
    write_file(out_dir + "/report.json", j.dump(2) + "\n");

    if (rep.config.per_cell) {
        std::ostringstream cells;
        cells << "setting,dgp,dataset,estimator,truth,estimate,lo,hi\n";
        for (const auto& c : rep.cells) {
            cells << rep.sweep_labels[c.sweep_index] << "," << c.dgp << "," << c.dataset << ","
                  << c.estimator << "," << c.truth << "," << c.est << ",";
            if (c.has_ci) cells << c.lo << "," << c.hi;
            cells << "\n";
        }
        write_file(out_dir + "/estimates.csv", cells.str());
    }
    std::cout << rep.text_table();
    std::cout << "wrote " << out_dir << "/results.csv, report.json, table.txt\n";
    return kExitOk;
}

int run_report(const std::string& in_path) {
    std::string path = in_path;
    if (fs::is_directory(path)) path += "/report.json";
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    ordered_json j = ordered_json::parse(in);
    for (const auto& sweep : j.at("results")) {
        std::cout << "setting: " << sweep.at("setting").get<std::string>() << "\n";
        for (const auto& row : sweep.at("rows")) {
            std::cout << "  " << row.at("estimator").get<std::string>()
                      << "  bias=" << row.at("mean_abs_bias").get<double>()
                      << "  pct=" << row.at("pct_abs_bias").get<double>();
            if (row.contains("coverage"))
                std::cout << "  coverage=" << row.at("coverage").get<double>()
                          << "  width=" << row.at("width").get<double>();
            std::cout << "\n";
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"proxid: causal identification with proxies, plus the simulation bench"};
    app.require_subcommand(1);

    std::string graph_path, query_path, out_path, config_path, out_dir = "sim_out", in_path;
    bool proximal = false;
    int trials = 100;
    uint64_t seed = 1;
    double tol = 1e-8;
    int jobs = 0;

    auto* cmd_identify = app.add_subcommand("identify", "compile a query into an estimand");
    cmd_identify->add_option("--graph", graph_path, "graph file")->required();
    cmd_identify->add_option("--query", query_path, "query JSON file")->required();
    cmd_identify->add_flag("--proximal", proximal, "use the proximal engine");
    cmd_identify->add_option("--out", out_path, "write the verdict JSON here");

    auto* cmd_pid = app.add_subcommand("pid", "proximal identify (identify --proximal)");
    cmd_pid->add_option("--graph", graph_path, "graph file")->required();
    cmd_pid->add_option("--query", query_path, "query JSON file")->required();
    cmd_pid->add_option("--out", out_path, "write the verdict JSON here");

    auto* cmd_verify = app.add_subcommand("verify", "compare the estimand against random discrete oracles");
    cmd_verify->add_option("--graph", graph_path, "graph file")->required();
    cmd_verify->add_option("--query", query_path, "query JSON file")->required();
    cmd_verify->add_flag("--proximal", proximal, "use the proximal engine");
    cmd_verify->add_option("--trials", trials, "number of random SCMs");
    cmd_verify->add_option("--seed", seed, "master seed");
    cmd_verify->add_option("--tol", tol, "comparison tolerance");
    cmd_verify->add_option("--out", out_path, "replay file for the first failure");

    auto* cmd_simulate = app.add_subcommand("simulate", "run a simulation experiment");
    cmd_simulate->add_option("--config", config_path, "flat key=value config")->required();
    cmd_simulate->add_option("--out", out_dir, "output directory");
    cmd_simulate->add_option("--jobs", jobs, "worker thread cap");

    auto* cmd_report = app.add_subcommand("report", "re-render a saved report");
    cmd_report->add_option("--in", in_path, "report.json or its directory")->required();

    try {
        app.parse(argc, argv);
        if (cmd_identify->parsed()) return run_identify(graph_path, query_path, proximal, out_path);
        if (cmd_pid->parsed()) return run_identify(graph_path, query_path, true, out_path);
        if (cmd_verify->parsed())
            return run_verify(graph_path, query_path, proximal, trials, seed, tol, out_path);
        if (cmd_simulate->parsed()) return run_simulate(config_path, out_dir, jobs);
        if (cmd_report->parsed()) return run_report(in_path);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
