#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rbm/model.hpp"
#include "rbm/montecarlo.hpp"
#include "rbm/mse.hpp"
#include "rbm/poisson.hpp"
#include "rbm/report.hpp"
#include "rbm/transition.hpp"

namespace {

std::string cli_binary() {
    const char* p = std::getenv("RBM_CLI_PATH");
    return p ? std::string(p) : std::string();
}

struct CliResult {
    int code = -1;
    std::string output;
};

CliResult run_cli(const std::string& args) {
    static int counter = 0;
    const std::string capture = "/tmp/rbm_cli_test_" +
                                std::to_string(::getpid()) + "_" +
                                std::to_string(counter++) + ".out";
    const std::string cmd =
        "'" + cli_binary() + "' " + args + " > '" + capture + "' 2>&1";
    const int status = std::system(cmd.c_str());
    CliResult res;
    if (WIFEXITED(status)) res.code = WEXITSTATUS(status);
    std::ifstream in(capture, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    res.output = buf.str();
    std::remove(capture.c_str());
    return res;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (const char ch : text) {
        if (ch == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (const char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

struct CliTable {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> footers;
};

CliTable parse_table(const std::string& text) {
    CliTable t;
    bool have_header = false;
    for (const std::string& line : split_lines(text)) {
        if (line.rfind("# ", 0) == 0) {
            const std::string body = line.substr(2);
            const size_t eq = body.find('=');
            REQUIRE(eq != std::string::npos);
            t.metadata.emplace_back(body.substr(0, eq), body.substr(eq + 1));
        } else if (!have_header) {
            t.columns = split_csv(line);
            have_header = true;
        } else if (line.find(',') != std::string::npos) {
            t.rows.push_back(split_csv(line));
        } else {
            t.footers.push_back(line);
        }
    }
    return t;
}

std::string meta(const CliTable& t, const std::string& key) {
    for (const auto& [k, v] : t.metadata)
        if (k == key) return v;
    return "<missing " + key + ">";
}

// Mirror of the output grid: n points from 0 to hi, endpoint pinned.
std::vector<double> grid(double hi, int n) {
    std::vector<double> out;
    const double step = (hi - 0.0) / static_cast<double>(n - 1);
    for (int i = 0; i < n; ++i)
        out.push_back(i + 1 == n ? hi : 0.0 + step * static_cast<double>(i));
    return out;
}

#define REQUIRE_CLI()                                                \
    if (cli_binary().empty()) {                                      \
        MESSAGE("RBM_CLI_PATH not set; skipping CLI test");          \
        return;                                                      \
    }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("density csv matches library values") {
    REQUIRE_CLI();
    const auto res =
        run_cli("density --r 1 --sigma2 2 --t 1 --x 0 --ymax 6 --n 100");
    REQUIRE(res.code == 0);
    const CliTable t = parse_table(res.output);

    CHECK(meta(t, "r") == "1");
    CHECK(meta(t, "sigma2") == "2");
    CHECK(meta(t, "eta") == "1");
    CHECK(meta(t, "stationary_mean") == "1");
    CHECK(meta(t, "t") == "1");
    CHECK(meta(t, "x") == "0");
    REQUIRE(t.columns == std::vector<std::string>{"y", "p_closed", "cdf"});
    REQUIRE(t.rows.size() == 100);
    CHECK(t.footers.empty());

    const rbm::RbmParams p(1.0, 2.0);
    const std::vector<double> ys = grid(6.0, 100);
    for (size_t i = 0; i < ys.size(); ++i) {
        REQUIRE(t.rows[i].size() == 3);
        CHECK(t.rows[i][0] == rbm::format_sig(ys[i]));
        CHECK(t.rows[i][1] == rbm::format_sig(rbm::density(p, 1.0, 0.0, ys[i])));
        CHECK(t.rows[i][2] == rbm::format_sig(rbm::cdf(p, 1.0, 0.0, ys[i])));
    }
    CHECK(std::stod(t.rows.back()[2]) >= 0.999);
}

TEST_CASE("density spectral column and diff footer") {
    REQUIRE_CLI();
    const auto res = run_cli(
        "density --r 1 --sigma2 2 --t 1 --x 0.5 --ymax 4 --n 21 --spectral");
    REQUIRE(res.code == 0);
    const CliTable t = parse_table(res.output);

    REQUIRE(t.columns ==
            std::vector<std::string>{"y", "p_closed", "cdf", "p_spectral"});
    REQUIRE(t.rows.size() == 21);
    const rbm::RbmParams p(1.0, 2.0);
    const std::vector<double> ys = grid(4.0, 21);
    for (size_t i = 0; i < ys.size(); ++i) {
        REQUIRE(t.rows[i].size() == 4);
        CHECK(t.rows[i][3] ==
              rbm::format_sig(rbm::density_spectral(p, 1.0, 0.5, ys[i])));
    }
    REQUIRE(t.footers.size() == 1);
    const std::string prefix = "max_abs_diff=";
    REQUIRE(t.footers[0].rfind(prefix, 0) == 0);
    const double diff = std::stod(t.footers[0].substr(prefix.size()));
    CHECK(diff >= 0.0);
    CHECK(diff <= 1e-6);
}

TEST_CASE("bias table identity and cite footer") {
    REQUIRE_CLI();
    const auto res =
        run_cli("bias --r 1 --sigma2 2 --measure identity --xmax 4 --n 101");
    REQUIRE(res.code == 0);
    const CliTable t = parse_table(res.output);

    CHECK(meta(t, "measure") == "identity");
    REQUIRE(t.columns == std::vector<std::string>{"x", "h_c"});
    REQUIRE(t.rows.size() == 101);

    const rbm::RbmParams p(1.0, 2.0);
    const rbm::BiasFunction bias(p, rbm::Identity{});
    const std::vector<double> xs = grid(4.0, 101);
    for (size_t i = 0; i < xs.size(); ++i) {
        CHECK(t.rows[i][0] == rbm::format_sig(xs[i]));
        CHECK(t.rows[i][1] == rbm::format_sig(bias.h_centered(xs[i])));
        CHECK(std::fabs(std::stod(t.rows[i][1]) -
                        (0.5 * xs[i] * xs[i] - 1.0)) <= 1e-9);
    }

    REQUIRE(t.footers.size() == 1);
    const std::string expect =
        "cite_pi=" + rbm::format_sig(rbm::cite_functional(
                         p, rbm::Identity{}, rbm::Stationary{}));
    CHECK(t.footers[0] == expect);
    const double cite = std::stod(t.footers[0].substr(8));
    CHECK(std::fabs(cite - 1.1738714350218757) <= 1e-9);
}

TEST_CASE("bias table indicator measure") {
    REQUIRE_CLI();
    const auto res = run_cli(
        "bias --r 1 --sigma2 2 --measure indicator --b 1 --xmax 3 --n 61");
    REQUIRE(res.code == 0);
    const CliTable t = parse_table(res.output);

    CHECK(meta(t, "measure") == "indicator");
    CHECK(meta(t, "b") == "1");
    REQUIRE(t.rows.size() == 61);

    const rbm::RbmParams p(1.0, 2.0);
    const rbm::BiasFunction bias(p, rbm::IndicatorAbove{1.0});
    const std::vector<double> xs = grid(3.0, 61);
    for (size_t i = 0; i < xs.size(); ++i)
        CHECK(t.rows[i][1] == rbm::format_sig(bias.h_centered(xs[i])));
}

TEST_CASE("goodstates functional table") {
    REQUIRE_CLI();
    const auto res =
        run_cli("goodstates --r 1 --sigma2 2 --set functional --c 1");
    REQUIRE(res.code == 0);
    const CliTable t = parse_table(res.output);

    CHECK(meta(t, "set") == "functional");
    CHECK(meta(t, "measure") == "identity");
    REQUIRE(t.columns == std::vector<std::string>{"c", "lo", "hi"});
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][0] == "1");
    CHECK(std::fabs(std::stod(t.rows[0][1])) <= 1e-9);
    CHECK(std::fabs(std::stod(t.rows[0][2]) - 2.08512418576) <= 1e-6);
}

TEST_CASE("goodstates distributional table with empty row") {
    REQUIRE_CLI();
    const auto res = run_cli(
        "goodstates --r 1 --sigma2 2 --set distributional --c 0,1 "
        "--weight power --p 0");
    REQUIRE(res.code == 0);
    const CliTable t = parse_table(res.output);

    CHECK(meta(t, "set") == "distributional");
    CHECK(meta(t, "weight") == "power");
    CHECK(meta(t, "p") == "0");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0] == std::vector<std::string>{"0", "empty", "empty"});
    CHECK(t.rows[1][0] == "1");
    CHECK(std::fabs(std::stod(t.rows[1][1])) <= 1e-9);
    CHECK(std::fabs(std::stod(t.rows[1][2]) - 1.83718182764) <= 1e-6);
}

TEST_CASE("tolerance table and crossing footer") {
    REQUIRE_CLI();
    const auto res = run_cli(
        "tolerance --r 1 --sigma2 2 --xmax 12 --n 121 --level 0.1");
    REQUIRE(res.code == 0);
    const CliTable t = parse_table(res.output);

    CHECK(meta(t, "measure") == "identity");
    CHECK(meta(t, "level") == "0.1");
    REQUIRE(t.columns == std::vector<std::string>{"x", "eps_star"});
    REQUIRE(t.rows.size() == 121);

    const rbm::RbmParams p(1.0, 2.0);
    const std::vector<double> xs = grid(12.0, 121);
    for (size_t i = 0; i < xs.size(); ++i) {
        const double want = rbm::threshold_tolerance(p, rbm::Identity{}, xs[i]);
        if (std::isinf(want)) {
            CHECK(t.rows[i][1] == "inf");
        } else {
            const double got = std::stod(t.rows[i][1]);
            CHECK(std::fabs(got - want) <= 1e-9 * std::max(1.0, want));
        }
    }
    CHECK(std::fabs(std::stod(t.rows[0][1]) - 16.0 / 3.14159265358979324) <=
          1e-6);

    REQUIRE(t.footers.size() == 1);
    const std::string prefix = "eps_star=0.1 at x=";
    REQUIRE(t.footers[0].rfind(prefix, 0) == 0);
    const double crossing = std::stod(t.footers[0].substr(prefix.size()));
    CHECK(std::fabs(crossing - 10.191131614242504) <= 1e-6);
}

TEST_CASE("mse table single row") {
    REQUIRE_CLI();
    const auto res = run_cli("mse --r 1 --sigma2 2 --x 0 --t 10");
    REQUIRE(res.code == 0);
    const CliTable t = parse_table(res.output);

    REQUIRE(t.columns == std::vector<std::string>{"x", "t", "kappa2", "k_c",
                                                  "h_c_sq", "eh_c2", "total"});
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][0] == "0");
    CHECK(t.rows[0][1] == "10");
    CHECK(t.rows[0][2] == "4");
    CHECK(t.rows[0][3] == "-4");
    CHECK(t.rows[0][4] == "1");
    CHECK(t.rows[0][5] == "5");
    CHECK(std::fabs(std::stod(t.rows[0][6]) - 0.38) <= 1e-12);
}

TEST_CASE("svg output has plot structure") {
    REQUIRE_CLI();
    const auto res = run_cli(
        "density --r 1 --sigma2 2 --t 1 --x 0 --ymax 6 --n 40 --format svg");
    REQUIRE(res.code == 0);
    CHECK(res.output.find("<svg") != std::string::npos);
    CHECK(res.output.find("</svg>") != std::string::npos);
    CHECK(res.output.find("polyline") != std::string::npos);
    CHECK(res.output.find("p_closed") != std::string::npos);
}

TEST_CASE("json output round trips") {
    REQUIRE_CLI();
    const auto csv_res = run_cli("mse --r 1 --sigma2 2 --x 0 --t 10");
    const auto json_res =
        run_cli("mse --r 1 --sigma2 2 --x 0 --t 10 --format json");
    REQUIRE(csv_res.code == 0);
    REQUIRE(json_res.code == 0);

    const CliTable csv = parse_table(csv_res.output);
    const auto j = nlohmann::ordered_json::parse(json_res.output);
    CHECK(j["metadata"]["r"] == "1");
    CHECK(j["metadata"]["measure"] == "identity");
    REQUIRE(j["columns"].size() == csv.columns.size());
    REQUIRE(j["rows"].size() == csv.rows.size());
    for (size_t c = 0; c < csv.columns.size(); ++c)
        CHECK(j["columns"][c].get<std::string>() == csv.columns[c]);
    for (size_t i = 0; i < csv.rows.size(); ++i)
        for (size_t c = 0; c < csv.rows[i].size(); ++c)
            CHECK(j["rows"][i][c].get<std::string>() == csv.rows[i][c]);

    // serialize -> parse -> serialize is a fixed point
    CHECK(nlohmann::ordered_json::parse(json_res.output).dump(2) + "\n" ==
          json_res.output);
}

TEST_CASE("queue inputs map onto drift and variance") {
    REQUIRE_CLI();
    // lambda 1, mu 2, m 1, varA 1, varS 0.25: r = 2-1 = 1 and
    // sigma2 = 1^3*1 + 1*2^3*0.25 = 3, both exact in binary.
    const auto via_queue =
        run_cli("bias --queue 1,2,1,1,0.25 --xmax 2 --n 5");
    const auto direct = run_cli("bias --r 1 --sigma2 3 --xmax 2 --n 5");
    REQUIRE(via_queue.code == 0);
    REQUIRE(direct.code == 0);

    const CliTable t = parse_table(via_queue.output);
    CHECK(meta(t, "queue_lambda") == "1");
    CHECK(meta(t, "queue_mu") == "2");
    CHECK(meta(t, "queue_m") == "1");
    CHECK(meta(t, "queue_var_a") == "1");
    CHECK(meta(t, "queue_var_s") == "0.25");
    CHECK(meta(t, "r") == "1");
    CHECK(meta(t, "sigma2") == "3");

    std::vector<std::string> stripped;
    for (const std::string& line : split_lines(via_queue.output))
        if (line.rfind("# queue_", 0) != 0) stripped.push_back(line);
    CHECK(stripped == split_lines(direct.output));
}

TEST_CASE("simulate table is deterministic and matches library") {
    REQUIRE_CLI();
    const std::string args =
        "simulate --r 1 --sigma2 2 --t 2 --dt 0.05 --reps 8 --seed 777 "
        "--x0 1.5";
    const auto first = run_cli(args);
    const auto second = run_cli(args);
    REQUIRE(first.code == 0);
    REQUIRE(second.code == 0);
    CHECK(first.output == second.output);

    const CliTable t = parse_table(first.output);
    CHECK(meta(t, "x0") == "1.5");
    CHECK(meta(t, "t") == "2");
    CHECK(meta(t, "dt") == "0.05");
    CHECK(meta(t, "replications") == "8");
    CHECK(meta(t, "seed") == "777");
    CHECK(meta(t, "antithetic") == "false");
    REQUIRE(t.columns ==
            std::vector<std::string>{"quantity", "analytic", "empirical",
                                     "std_error", "ci_lo", "ci_hi"});
    REQUIRE(t.rows.size() == 4);
    CHECK(t.rows[0][0] == "alpha_mean");
    CHECK(t.rows[1][0] == "bias_constant");
    CHECK(t.rows[2][0] == "t_times_variance");
    CHECK(t.rows[3][0] == "mse");

    const rbm::RbmParams p(1.0, 2.0);
    const rbm::PerformanceMeasure f = rbm::Identity{};
    rbm::SimConfig cfg;
    cfg.seed = 777;
    cfg.dt = 0.05;
    cfg.horizon = 2.0;
    cfg.replications = 8;
    const rbm::TimeAverageEstimate est =
        rbm::estimate_time_average(p, f, 1.5, cfg);
    const double mean_f = rbm::equilibrium_expectation(p, f);
    const double h_c_x0 = rbm::h_centered(p, f, 1.5);

    CHECK(t.rows[0][1] == rbm::format_sig(mean_f + h_c_x0 / cfg.horizon));
    CHECK(t.rows[0][2] == rbm::format_sig(est.mean));
    CHECK(t.rows[0][3] == rbm::format_sig(est.std_error));
    CHECK(t.rows[0][4] == rbm::format_sig(est.ci_lo));
    CHECK(t.rows[0][5] == rbm::format_sig(est.ci_hi));

    CHECK(t.rows[1][1] == rbm::format_sig(h_c_x0));
    CHECK(t.rows[1][2] == rbm::format_sig(est.bias_constant));
    CHECK(t.rows[1][3] == rbm::format_sig(cfg.horizon * est.std_error));
    CHECK(t.rows[1][4] ==
          rbm::format_sig(cfg.horizon * (est.ci_lo - mean_f)));
    CHECK(t.rows[1][5] ==
          rbm::format_sig(cfg.horizon * (est.ci_hi - mean_f)));

    double ss = 0.0;
    for (const double a : est.alphas) {
        const double d = a - est.mean;
        ss += d * d;
    }
    const double raw_var = ss / static_cast<double>(est.alphas.size() - 1);
    const double tv = cfg.horizon * raw_var;
    const double tv_se =
        tv * std::sqrt(2.0 / static_cast<double>(est.alphas.size() - 1));
    CHECK(t.rows[2][1] == rbm::format_sig(rbm::kappa2(p, f)));
    CHECK(t.rows[2][2] == rbm::format_sig(tv));
    CHECK(t.rows[2][3] == rbm::format_sig(tv_se));
    CHECK(t.rows[2][4] == rbm::format_sig(tv - 1.959963984540054 * tv_se));
    CHECK(t.rows[2][5] == rbm::format_sig(tv + 1.959963984540054 * tv_se));

    const rbm::MseDecomposition decomp =
        rbm::mse_estimate(p, f, 1.5, cfg.horizon);
    const rbm::MseEstimate emp =
        rbm::empirical_mse_from_alphas(est.alphas, mean_f, false);
    CHECK(t.rows[3][1] == rbm::format_sig(decomp.total));
    CHECK(t.rows[3][2] == rbm::format_sig(emp.mse));
    CHECK(t.rows[3][3] == rbm::format_sig(emp.std_error));
    CHECK(t.rows[3][4] == rbm::format_sig(emp.ci_lo));
    CHECK(t.rows[3][5] == rbm::format_sig(emp.ci_hi));
}

TEST_CASE("exit codes") {
    REQUIRE_CLI();
    CHECK(run_cli("--help").code == 0);

    // argument and model validation problems report 2
    CHECK(run_cli("bias --r 1 --xmax 1 --n 3").code == 2);
    CHECK(run_cli("bias --xmax 1 --n 3").code == 2);
    CHECK(run_cli("bias --r 1 --sigma2 2 --queue 1,2,1,1,0.25 --xmax 1 --n 3")
              .code == 2);
    CHECK(run_cli("bias --r 1 --sigma2 2 --measure cubic --xmax 1 --n 3")
              .code == 2);
    CHECK(run_cli("bias --r 1 --sigma2 2 --frobnicate").code == 2);
    CHECK(run_cli("density --r 1 --sigma2 2 --x 0 --ymax 2 --n 5").code == 2);
    CHECK(run_cli("density --r 1 --sigma2 2 --t 1 --x -0.5 --ymax 2 --n 5")
              .code == 2);
    CHECK(run_cli("bias --queue 2,1,1,1,1 --xmax 1 --n 3").code == 2);
    CHECK(run_cli("bias --queue 1,2,1.5,1,0.25 --xmax 1 --n 3").code == 2);
    CHECK(run_cli("simulate --r 1 --sigma2 2 --t 1 --dt 2 --reps 4 --seed 1")
              .code == 2);
    CHECK(run_cli("simulate --r 1 --sigma2 2 --t 1 --dt 0.1 --reps 2 "
                  "--seed 1 --format svg")
              .code == 2);

    // spectral evaluation below its valid horizon reports 3
    CHECK(run_cli("density --r 1 --sigma2 2 --t 0.01 --x 0 --ymax 2 --n 5 "
                  "--spectral")
              .code == 3);
}

TEST_CASE("validate runs fast checks and skips slow ones") {
    REQUIRE_CLI();
    const auto res = run_cli("validate");
    CHECK(res.code == 0);
    CHECK(res.output.find("FAIL") == std::string::npos);
    CHECK(res.output.find("PASS 1 ") != std::string::npos);
    CHECK(res.output.find("PASS 10 ") != std::string::npos);
    CHECK(res.output.find("SKIP 7 ") != std::string::npos);
    CHECK(res.output.find("SKIP 8 ") != std::string::npos);
    CHECK(res.output.find("summary: 8/8 checks passed, 2 skipped") !=
          std::string::npos);
}

}  // TEST_SUITE("cli")
