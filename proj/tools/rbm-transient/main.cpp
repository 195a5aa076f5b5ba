#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "rbm/model.hpp"
#include "rbm/montecarlo.hpp"
#include "rbm/quad.hpp"
#include "rbm/report.hpp"
#include "rbm/validate.hpp"

namespace {

struct ParamArgs {
    double r = 0.0;
    double sigma2 = 0.0;
    std::vector<double> queue;
};

struct MeasureArgs {
    std::string name = "identity";
    double theta = 0.5;
    double b = 1.0;
};

struct WeightArgs {
    std::string name = "power";
    double p = 0.0;
    double theta = 0.5;
};

void add_param_options(CLI::App* cmd, ParamArgs& a) {
    cmd->add_option("--r", a.r, "drift rate r (> 0)");
    cmd->add_option("--sigma2", a.sigma2, "diffusion variance sigma^2 (> 0)");
    cmd->add_option("--queue", a.queue,
                    "queue inputs lambda,mu,m,varA,varS (alternative to "
                    "--r/--sigma2)")
        ->delimiter(',')
        ->expected(5);
}

void add_measure_options(CLI::App* cmd, MeasureArgs& a) {
    cmd->add_option("--measure", a.name, "performance measure")
        ->check(CLI::IsMember({"identity", "square", "exponential", "indicator"}));
    cmd->add_option("--theta", a.theta, "rate for --measure exponential");
    cmd->add_option("--b", a.b, "threshold for --measure indicator");
}

void add_weight_options(CLI::App* cmd, WeightArgs& a) {
    cmd->add_option("--weight", a.name, "weight function for distributional bias")
        ->check(CLI::IsMember({"power", "exponential"}));
    cmd->add_option("--p", a.p, "exponent for --weight power (w(y) = y^p)");
    cmd->add_option("--wtheta", a.theta,
                    "rate for --weight exponential (w(y) = e^{theta y})");
}

void add_output_options(CLI::App* cmd, std::string& format, std::string& out) {
    cmd->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"csv", "json", "svg"}));
    cmd->add_option("--out", out, "output file (default: stdout)");
}

rbm::RbmParams resolve_params(
    const CLI::App* cmd, const ParamArgs& a,
    std::vector<std::pair<std::string, std::string>>& queue_meta) {
    const bool has_rs = cmd->count("--r") > 0 || cmd->count("--sigma2") > 0;
    const bool has_queue = cmd->count("--queue") > 0;
    if (has_rs && has_queue)
        throw std::invalid_argument(
            "give either --r/--sigma2 or --queue, not both");
    if (!has_rs && !has_queue)
        throw std::invalid_argument(
            "model parameters required: --r and --sigma2, or --queue");
    if (has_queue) {
        const double m_raw = a.queue[2];
        if (!(m_raw >= 1.0) || m_raw != static_cast<double>(static_cast<int>(m_raw)))
            throw std::invalid_argument("--queue server count m must be a "
                                        "positive integer");
        rbm::QueueParams q{a.queue[0], a.queue[1], static_cast<int>(m_raw),
                           a.queue[3], a.queue[4]};
        queue_meta = {{"queue_lambda", rbm::format_sig(q.lambda)},
                      {"queue_mu", rbm::format_sig(q.mu)},
                      {"queue_m", std::to_string(q.m)},
                      {"queue_var_a", rbm::format_sig(q.var_a)},
                      {"queue_var_s", rbm::format_sig(q.var_s)}};
        return rbm::from_queue(q);
    }
    if (cmd->count("--r") == 0 || cmd->count("--sigma2") == 0)
        throw std::invalid_argument("--r and --sigma2 must be given together");
    return rbm::RbmParams(a.r, a.sigma2);
}

rbm::PerformanceMeasure resolve_measure(const MeasureArgs& a) {
    if (a.name == "identity") return rbm::Identity{};
    if (a.name == "square") return rbm::Square{};
    if (a.name == "exponential") return rbm::Exponential{a.theta};
    return rbm::IndicatorAbove{a.b};
}

rbm::WeightFunction resolve_weight(const WeightArgs& a) {
    if (a.name == "power") return rbm::Power{a.p};
    return rbm::ExponentialWeight{a.theta};
}

void emit(const rbm::Table& table,
          const std::vector<std::pair<std::string, std::string>>& queue_meta,
          const std::string& format, const std::string& out, size_t x_column,
          const std::vector<size_t>& y_columns) {
    rbm::Table t = table;
    t.metadata.insert(t.metadata.begin(), queue_meta.begin(), queue_meta.end());
    std::string content;
    if (format == "csv")
        content = to_csv(t);
    else if (format == "json")
        content = to_json(t);
    else
        content = to_svg(t, x_column, y_columns);
    if (out.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream file(out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open output file: " + out);
    file << content;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Initial-transient analysis for one-dimensional reflected Brownian "
        "motion: transition laws, time-average bias constants, good starting "
        "states, mean-squared-error decompositions, and a simulation oracle."};
    app.require_subcommand(1);

    // density
    auto* density_cmd =
        app.add_subcommand("density", "tabulate the transition density and CDF");
    ParamArgs density_params;
    add_param_options(density_cmd, density_params);
    rbm::DensityRequest density_req{1.0, 0.0, 6.0, 100, false};
    density_cmd->add_option("--t", density_req.t, "time horizon (> 0)")
        ->required();
    density_cmd->add_option("--x", density_req.x, "initial state (>= 0)")
        ->required();
    density_cmd->add_option("--ymax", density_req.ymax, "grid upper endpoint")
        ->required();
    density_cmd->add_option("--n", density_req.n, "grid size")
        ->required()
        ->check(CLI::PositiveNumber);
    density_cmd->add_flag("--spectral", density_req.spectral,
                          "add the spectral-representation column");
    std::string density_format = "csv", density_out;
    add_output_options(density_cmd, density_format, density_out);

    // bias
    auto* bias_cmd = app.add_subcommand(
        "bias", "tabulate the bias constant h_c and the stationary benchmark");
    ParamArgs bias_params;
    MeasureArgs bias_measure;
    add_param_options(bias_cmd, bias_params);
    add_measure_options(bias_cmd, bias_measure);
    rbm::BiasRequest bias_req{4.0, 101};
    bias_cmd->add_option("--xmax", bias_req.xmax, "grid upper endpoint");
    bias_cmd->add_option("--n", bias_req.n, "grid size")
        ->check(CLI::PositiveNumber);
    std::string bias_format = "csv", bias_out;
    add_output_options(bias_cmd, bias_format, bias_out);

    // goodstates
    auto* good_cmd = app.add_subcommand(
        "goodstates", "solve for the set of good starting states");
    ParamArgs good_params;
    MeasureArgs good_measure;
    WeightArgs good_weight;
    add_param_options(good_cmd, good_params);
    add_measure_options(good_cmd, good_measure);
    add_weight_options(good_cmd, good_weight);
    std::string good_set;
    good_cmd->add_option("--set", good_set, "functional or distributional")
        ->required()
        ->check(CLI::IsMember({"functional", "distributional"}));
    std::vector<double> good_c = {1.0};
    good_cmd->add_option("--c", good_c, "tolerance multipliers c")
        ->delimiter(',');
    std::string good_format = "csv", good_out;
    add_output_options(good_cmd, good_format, good_out);

    // tolerance
    auto* tol_cmd = app.add_subcommand(
        "tolerance", "tabulate the threshold tolerance eps*(x)");
    ParamArgs tol_params;
    MeasureArgs tol_measure;
    add_param_options(tol_cmd, tol_params);
    add_measure_options(tol_cmd, tol_measure);
    rbm::ToleranceRequest tol_req{12.0, 121, 0.1};
    tol_cmd->add_option("--xmax", tol_req.xmax, "grid upper endpoint");
    tol_cmd->add_option("--n", tol_req.n, "grid size")
        ->check(CLI::PositiveNumber);
    tol_cmd->add_option("--level", tol_req.level, "crossing level to annotate");
    std::string tol_format = "csv", tol_out;
    add_output_options(tol_cmd, tol_format, tol_out);

    // mse
    auto* mse_cmd = app.add_subcommand(
        "mse", "tabulate the mean-squared-error decomposition");
    ParamArgs mse_params;
    MeasureArgs mse_measure;
    add_param_options(mse_cmd, mse_params);
    add_measure_options(mse_cmd, mse_measure);
    std::vector<double> mse_x = {0.0};
    std::vector<double> mse_t;
    mse_cmd->add_option("--x", mse_x, "initial states")->delimiter(',');
    mse_cmd->add_option("--t", mse_t, "time horizons")
        ->delimiter(',')
        ->required();
    std::string mse_format = "csv", mse_out;
    add_output_options(mse_cmd, mse_format, mse_out);

    // simulate
    auto* sim_cmd = app.add_subcommand(
        "simulate", "Monte Carlo time averages vs. the analytic predictions");
    ParamArgs sim_params;
    MeasureArgs sim_measure;
    add_param_options(sim_cmd, sim_params);
    add_measure_options(sim_cmd, sim_measure);
    double sim_x0 = 0.0;
    rbm::SimConfig sim_cfg;
    sim_cmd->add_option("--x0", sim_x0, "initial state (>= 0)");
    sim_cmd->add_option("--t", sim_cfg.horizon, "time horizon (> 0)")
        ->required();
    sim_cmd->add_option("--dt", sim_cfg.dt, "grid step");
    sim_cmd->add_option("--reps", sim_cfg.replications, "replication count")
        ->check(CLI::PositiveNumber);
    sim_cmd->add_option("--seed", sim_cfg.seed, "RNG seed");
    sim_cmd->add_flag("--antithetic", sim_cfg.antithetic,
                      "pair replications antithetically");
    std::string sim_format = "csv", sim_out;
    add_output_options(sim_cmd, sim_format, sim_out);

    // validate
    auto* val_cmd = app.add_subcommand(
        "validate", "run the acceptance checks and report pass/fail");
    bool val_slow = false;
    val_cmd->add_flag("--slow", val_slow,
                      "include the minutes-scale Monte Carlo checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (density_cmd->parsed()) {
            std::vector<std::pair<std::string, std::string>> queue_meta;
            const rbm::RbmParams p =
                resolve_params(density_cmd, density_params, queue_meta);
            const rbm::Table t = rbm::density_table(p, density_req);
            std::vector<size_t> ycols = {1};
            if (density_req.spectral) ycols.push_back(3);
            emit(t, queue_meta, density_format, density_out, 0, ycols);
        } else if (bias_cmd->parsed()) {
            std::vector<std::pair<std::string, std::string>> queue_meta;
            const rbm::RbmParams p =
                resolve_params(bias_cmd, bias_params, queue_meta);
            const rbm::PerformanceMeasure f = resolve_measure(bias_measure);
            rbm::validate(f, p);
            const rbm::Table t = rbm::bias_table(p, f, bias_req);
            emit(t, queue_meta, bias_format, bias_out, 0, {1});
        } else if (good_cmd->parsed()) {
            std::vector<std::pair<std::string, std::string>> queue_meta;
            const rbm::RbmParams p =
                resolve_params(good_cmd, good_params, queue_meta);
            rbm::Table t;
            if (good_set == "functional") {
                const rbm::PerformanceMeasure f = resolve_measure(good_measure);
                rbm::validate(f, p);
                t = rbm::goodstates_functional_table(p, f, good_c);
            } else {
                const rbm::WeightFunction w = resolve_weight(good_weight);
                rbm::validate(w, p);
                t = rbm::goodstates_distributional_table(p, w, good_c);
            }
            emit(t, queue_meta, good_format, good_out, 0, {1, 2});
        } else if (tol_cmd->parsed()) {
            std::vector<std::pair<std::string, std::string>> queue_meta;
            const rbm::RbmParams p =
                resolve_params(tol_cmd, tol_params, queue_meta);
            const rbm::PerformanceMeasure f = resolve_measure(tol_measure);
            rbm::validate(f, p);
            const rbm::Table t = rbm::tolerance_table(p, f, tol_req);
            emit(t, queue_meta, tol_format, tol_out, 0, {1});
        } else if (mse_cmd->parsed()) {
            std::vector<std::pair<std::string, std::string>> queue_meta;
            const rbm::RbmParams p =
                resolve_params(mse_cmd, mse_params, queue_meta);
            const rbm::PerformanceMeasure f = resolve_measure(mse_measure);
            rbm::validate(f, p);
            const rbm::Table t = rbm::mse_table(p, f, mse_x, mse_t);
            emit(t, queue_meta, mse_format, mse_out, 1, {6});
        } else if (sim_cmd->parsed()) {
            if (sim_format == "svg")
                throw std::invalid_argument(
                    "--format svg is not supported for simulate");
            std::vector<std::pair<std::string, std::string>> queue_meta;
            const rbm::RbmParams p =
                resolve_params(sim_cmd, sim_params, queue_meta);
            const rbm::PerformanceMeasure f = resolve_measure(sim_measure);
            rbm::validate(f, p);
            rbm::validate(sim_cfg);
            const rbm::Table t = rbm::simulate_table(p, f, sim_x0, sim_cfg);
            emit(t, queue_meta, sim_format, sim_out, 0, {});
        } else if (val_cmd->parsed()) {
            const auto results = rbm::run_acceptance_checks(val_slow);
            int ran = 0, passed = 0, skipped = 0;
            for (const auto& r : results) {
                std::cout << rbm::format_check_line(r) << "\n";
                if (!r.ran) {
                    ++skipped;
                    continue;
                }
                ++ran;
                if (r.passed) ++passed;
            }
            std::cout << "summary: " << passed << "/" << ran
                      << " checks passed, " << skipped << " skipped\n";
            return passed == ran ? 0 : 4;
        }
    } catch (const rbm::convergence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
