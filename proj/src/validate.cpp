#include "rbm/validate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "rbm/distributional.hpp"
#include "rbm/model.hpp"
#include "rbm/montecarlo.hpp"
#include "rbm/mse.hpp"
#include "rbm/poisson.hpp"
#include "rbm/quad.hpp"
#include "rbm/report.hpp"
#include "rbm/rng.hpp"
#include "rbm/transition.hpp"

namespace rbm {

namespace {

using clock_type = std::chrono::steady_clock;

double elapsed_seconds(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

std::string fmt(double v) { return format_sig(v); }

struct ErrTracker {
    double max_err = 0.0;
    void note(double err) { max_err = std::max(max_err, std::abs(err)); }
};

// ---- criterion 1: functional good-state boundary -------------------------

CheckResult check_functional_boundary() {
    CheckResult r{1, "good-states functional right endpoint", true, false, "", 0};
    const auto start = clock_type::now();
    const RbmParams p(1.0, 2.0);
    const auto set = good_states_functional(p, Identity{}, 1.0);
    r.seconds = elapsed_seconds(start);
    if (set.size() != 1) {
        r.detail = "expected one interval, got " + std::to_string(set.size());
        return r;
    }
    const double lo = set.front().lo;
    const double hi = set.front().hi;
    r.passed = std::abs(lo) <= 1e-9 && std::abs(hi - 2.09) <= 0.01 &&
               r.seconds < 1.0;
    r.detail = "interval [" + fmt(lo) + ", " + fmt(hi) + "], target hi 2.09 +- 0.01";
    return r;
}

// ---- criterion 2: distributional good-state boundary ----------------------

CheckResult check_distributional_boundary() {
    CheckResult r{2, "good-states distributional right endpoint", true, false, "",
                  0};
    const auto start = clock_type::now();
    const RbmParams p(1.0, 2.0);
    const auto set = good_states_distributional(p, Power{0.0}, 1.0);
    r.seconds = elapsed_seconds(start);
    if (set.size() != 1) {
        r.detail = "expected one interval, got " + std::to_string(set.size());
        return r;
    }
    const double lo = set.front().lo;
    const double hi = set.front().hi;
    const double target = 1.84 * p.stationary_mean;
    r.passed = std::abs(lo) <= 1e-9 && std::abs(hi - target) <= 0.01 &&
               r.seconds < 10.0;
    r.detail = "interval [" + fmt(lo) + ", " + fmt(hi) + "], target hi " +
               fmt(target) + " +- 0.01";
    return r;
}

// ---- criterion 3: threshold tolerance region ------------------------------

CheckResult check_tolerance_region() {
    CheckResult r{3, "tolerance region at level 0.1", true, false, "", 0};
    const auto start = clock_type::now();
    const RbmParams p(1.0, 2.0);
    const auto region = tolerance_region(p, Identity{}, 0.1);
    r.seconds = elapsed_seconds(start);
    if (region.size() != 1) {
        r.detail = "expected one interval, got " + std::to_string(region.size());
        return r;
    }
    const double lo = region.front().lo;
    const double hi = region.front().hi;
    r.passed = std::abs(lo) <= 1e-9 && std::abs(hi - 10.19) <= 0.01 &&
               r.seconds < 1.0;
    r.detail = "interval [" + fmt(lo) + ", " + fmt(hi) + "], target hi 10.19 +- 0.01";
    return r;
}

// ---- criterion 4: scaling identities --------------------------------------

double interval_scale_error(const std::vector<Interval>& base,
                            const std::vector<Interval>& scaled, double mean) {
    if (base.size() != scaled.size())
        return std::numeric_limits<double>::infinity();
    double err = 0.0;
    for (size_t i = 0; i < base.size(); ++i) {
        const double denom = std::max(mean * std::abs(base[i].hi), 1e-12);
        err = std::max(err,
                       std::abs(scaled[i].lo - mean * base[i].lo) / denom);
        err = std::max(err,
                       std::abs(scaled[i].hi - mean * base[i].hi) / denom);
    }
    return err;
}

CheckResult check_scaling() {
    CheckResult r{4, "scale equivariance of good-state sets", true, false, "", 0};
    const auto start = clock_type::now();
    const RbmParams base(1.0, 2.0);
    const std::vector<std::pair<double, double>> params = {
        {2.0, 2.0}, {1.0, 8.0}, {0.5, 1.0}};
    double worst = 0.0;
    for (const double c : {0.5, 1.0, 2.0}) {
        const auto base_set = good_states_functional(base, Identity{}, c);
        for (const auto& [rr, s2] : params) {
            const RbmParams q(rr, s2);
            const auto scaled = good_states_functional(q, Identity{}, c);
            worst = std::max(
                worst, interval_scale_error(base_set, scaled, q.stationary_mean));
        }
    }
    for (const double pw : {0.0, 1.0}) {
        const auto base_set = good_states_distributional(base, Power{pw}, 1.0);
        for (const auto& [rr, s2] : params) {
            const RbmParams q(rr, s2);
            const auto scaled = good_states_distributional(q, Power{pw}, 1.0);
            worst = std::max(
                worst, interval_scale_error(base_set, scaled, q.stationary_mean));
        }
    }
    r.seconds = elapsed_seconds(start);
    r.passed = worst <= 1e-6;
    r.detail = "max relative endpoint error " + fmt(worst) + " (tol 1e-06)";
    return r;
}

// ---- criterion 5: closed form vs spectral density -------------------------

CheckResult check_representation_equivalence() {
    CheckResult r{5, "closed vs spectral transition density", true, false, "", 0};
    const auto start = clock_type::now();
    const RbmParams p(1.0, 2.0);
    double worst = 0.0;
    for (const double t : {0.5, 1.0, 5.0, 20.0})
        for (const double x : {0.0, 0.5, 1.0, 2.0, 5.0})
            for (const double y : {0.0, 0.5, 1.0, 2.0, 5.0})
                worst = std::max(worst, std::abs(density_spectral(p, t, x, y) -
                                                 density(p, t, x, y)));
    r.seconds = elapsed_seconds(start);
    r.passed = worst <= 1e-6 && r.seconds < 30.0;
    r.detail = "max |closed - spectral| = " + fmt(worst) + " (tol 1e-06)";
    return r;
}

// ---- criterion 6: analytic self-consistency suite -------------------------

double fd_second(const std::function<double(double)>& g, double x, double h) {
    return (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h);
}

double fd_first(const std::function<double(double)>& g, double x, double h) {
    return (g(x + h) - g(x - h)) / (2.0 * h);
}

CheckResult check_self_consistency() {
    CheckResult r{6, "analytic self-consistency suite", true, false, "", 0};
    const auto start = clock_type::now();
    const RbmParams p(1.0, 2.0);
    std::ostringstream detail;
    bool ok = true;

    // density normalization
    {
        ErrTracker e;
        QuadSpec spec;
        spec.abs_tol = 1e-11;
        spec.rel_tol = 1e-10;
        spec.tail_rate = 0.5 * p.eta;
        for (const double t : {0.25, 1.0, 5.0})
            for (const double x : {0.0, 1.0, 3.0}) {
                const auto q = integrate(
                    [&](double y) { return density(p, t, x, y); }, 0.0,
                    std::numeric_limits<double>::infinity(), spec);
                e.note(q.value - 1.0);
            }
        ok = ok && e.max_err <= 1e-8;
        detail << "normalization " << fmt(e.max_err);
    }

    // Chapman-Kolmogorov
    {
        ErrTracker e;
        QuadSpec spec;
        spec.abs_tol = 1e-9;
        spec.rel_tol = 1e-8;
        spec.tail_rate = 0.5 * p.eta;
        const double cases[2][4] = {{0.5, 0.7, 1.0, 2.0}, {1.0, 4.0, 0.0, 0.5}};
        for (const auto& c : cases) {
            const double t = c[0], s = c[1], x = c[2], y = c[3];
            const auto q = integrate(
                [&](double z) {
                    return density(p, t, x, z) * density(p, s, z, y);
                },
                0.0, std::numeric_limits<double>::infinity(), spec);
            e.note(q.value - density(p, t + s, x, y));
        }
        ok = ok && e.max_err <= 1e-6;
        detail << ", chapman-kolmogorov " << fmt(e.max_err);
    }

    // detailed balance
    {
        ErrTracker e;
        const double pairs[3][2] = {{0.3, 1.7}, {1.0, 2.0}, {2.5, 0.8}};
        for (const double t : {0.5, 1.0, 5.0})
            for (const auto& xy : pairs)
                e.note(stationary_density(p, xy[0]) * density(p, t, xy[0], xy[1]) -
                       stationary_density(p, xy[1]) * density(p, t, xy[1], xy[0]));
        ok = ok && e.max_err <= 1e-9;
        detail << ", detailed-balance " << fmt(e.max_err);
    }

    // Poisson residuals by central differences (closed forms)
    {
        ErrTracker e;
        const std::vector<PerformanceMeasure> measures = {
            Identity{}, Square{}, Exponential{0.5}, IndicatorAbove{1.0}};
        const double h = 1e-4;
        for (const auto& f : measures) {
            const BiasFunction bias(p, f);
            const double mean_f = equilibrium_expectation(p, f);
            auto hc = [&](double x) { return bias.h_centered(x); };
            for (const double x : {0.3, 0.8, 1.6, 2.4}) {
                const double res = 0.5 * p.sigma2 * fd_second(hc, x, h) -
                                   p.r * fd_first(hc, x, h) +
                                   (evaluate(f, x) - mean_f);
                e.note(res / std::max(1.0, std::abs(evaluate(f, x) - mean_f)));
            }
        }
        // variance-transient constant for Identity (closed form)
        const double kap2 = kappa2(p, Identity{});
        auto kc = [&](double x) { return k_c(p, Identity{}, x); };
        for (const double x : {0.3, 0.8, 1.6, 2.4}) {
            const double hp = x / p.r;  // h_c' for Identity
            const double res = 0.5 * p.sigma2 * fd_second(kc, x, 1e-4) -
                               p.r * fd_first(kc, x, 1e-4) +
                               (hp * hp - kap2 / p.sigma2);
            e.note(res / std::max(1.0, std::abs(hp * hp)));
        }
        ok = ok && e.max_err <= 1e-5;
        detail << ", poisson-residual " << fmt(e.max_err);
    }

    // centering of h_c and k_c under the stationary law
    {
        ErrTracker e;
        const std::vector<PerformanceMeasure> measures = {
            Identity{}, Square{}, Exponential{0.5}, IndicatorAbove{1.0}};
        for (const auto& f : measures) {
            const BiasFunction bias(p, f);
            QuadSpec spec;
            spec.abs_tol = 1e-12;
            spec.rel_tol = 1e-10;
            spec.tail_rate =
                std::holds_alternative<Exponential>(f) ? 0.5 * (p.eta - 0.5)
                                                       : 0.5 * p.eta;
            const auto q = integrate(
                [&](double y) {
                    return bias.h_centered(y) * stationary_density(p, y);
                },
                0.0, std::numeric_limits<double>::infinity(), spec);
            e.note(q.value);
        }
        {
            QuadSpec spec;
            spec.abs_tol = 1e-12;
            spec.rel_tol = 1e-10;
            spec.tail_rate = 0.5 * p.eta;
            const auto q = integrate(
                [&](double y) {
                    return k_c(p, Identity{}, y) * stationary_density(p, y);
                },
                0.0, std::numeric_limits<double>::infinity(), spec);
            e.note(q.value);
        }
        ok = ok && e.max_err <= 1e-8;
        detail << ", centering " << fmt(e.max_err);
    }

    // closed-form bias constants vs the integral solver
    {
        ErrTracker e;
        const std::vector<PerformanceMeasure> measures = {
            Identity{}, Square{}, Exponential{0.5}, IndicatorAbove{1.0}};
        for (const auto& f : measures) {
            const double mean_f = equilibrium_expectation(p, f);
            std::vector<double> kinks;
            double tail_rate = 0.5 * p.eta;
            if (const auto* ind = std::get_if<IndicatorAbove>(&f))
                kinks.push_back(ind->b);
            if (const auto* ex = std::get_if<Exponential>(&f))
                tail_rate = 0.5 * (p.eta - ex->theta);
            const PerformanceMeasure f_copy = f;
            GeneralPoissonSolver solver(
                p,
                [f_copy, mean_f](double y) {
                    return evaluate(f_copy, y) - mean_f;
                },
                kinks, tail_rate);
            const BiasFunction bias(p, f);
            for (const double x : {0.3, 1.0, 2.2, 4.0})
                e.note((bias.h_centered(x) - solver.h_centered(x)) /
                       std::max(1.0, std::abs(bias.h_centered(x))));
        }
        ok = ok && e.max_err <= 1e-7;
        detail << ", closed-vs-integral " << fmt(e.max_err);
    }

    // combined second-order coefficient identity for Identity
    {
        ErrTracker e;
        for (const auto& [rr, s2] :
             std::vector<std::pair<double, double>>{{1.0, 2.0}, {0.7, 1.3}}) {
            const RbmParams q(rr, s2);
            const double eh2 = eh_c_squared(q, Identity{});
            for (const double x : {0.0, 0.4, 1.0, 1.4142135623730951, 2.0, 3.5}) {
                const double hc = h_centered(q, Identity{}, x);
                const double computed =
                    q.sigma2 * k_c(q, Identity{}, x) + hc * hc + eh2;
                const double s4 = s2 * s2;
                const double poly = std::pow(x, 4) / (4 * rr * rr) +
                                    s2 * std::pow(x, 3) / (3 * rr * rr * rr) +
                                    s4 * x * x / (4 * std::pow(rr, 4)) -
                                    s4 * s4 / (8 * std::pow(rr, 6));
                e.note((computed - poly) / std::max(1.0, std::abs(poly)));
            }
        }
        ok = ok && e.max_err <= 1e-10;
        detail << ", coefficient-identity " << fmt(e.max_err);
    }

    r.seconds = elapsed_seconds(start);
    r.passed = ok;
    r.detail = detail.str();
    return r;
}

// ---- criteria 7 and 8: Monte Carlo bias and MSE ---------------------------

CheckResult check_mc_bias(TimeAverageEstimate& shared_est, bool& have_est) {
    CheckResult r{7, "Monte Carlo bias constant at x0=0", true, false, "", 0};
    const auto start = clock_type::now();
    const RbmParams p(1.0, 2.0);
    SimConfig cfg;
    cfg.seed = 20260801;
    cfg.dt = 1e-3;
    cfg.horizon = 50.0;
    cfg.replications = 10000;
    cfg.antithetic = false;
    shared_est = estimate_time_average(p, Identity{}, 0.0, cfg);
    have_est = true;
    r.seconds = elapsed_seconds(start);
    const double bc = shared_est.bias_constant;
    const double se_bc = cfg.horizon * shared_est.std_error;
    r.passed = se_bc < 0.15 && std::abs(bc - (-1.0)) <= 3.0 * se_bc;
    r.detail = "t*(mean-1) = " + fmt(bc) + " +- " + fmt(se_bc) +
               " (target -1, 3-sigma window " + fmt(3.0 * se_bc) + ")";
    return r;
}

CheckResult check_mc_mse(const TimeAverageEstimate& est, bool have_est) {
    CheckResult r{8, "Monte Carlo MSE at t=50", true, false, "", 0};
    const auto start = clock_type::now();
    const RbmParams p(1.0, 2.0);
    if (!have_est) {
        r.detail = "prerequisite simulation unavailable";
        r.seconds = elapsed_seconds(start);
        return r;
    }
    const double target = mse_estimate(p, Identity{}, 0.0, 50.0).total;
    std::vector<double> sq(est.alphas.size());
    for (size_t i = 0; i < sq.size(); ++i) {
        const double d = est.alphas[i] - 1.0;
        sq[i] = d * d;
    }
    const size_t n = sq.size();
    const double mse = pairwise_sum(sq.data(), n) / static_cast<double>(n);

    // nonparametric bootstrap of the replication mean
    const int B = 2000;
    Rng boot(987654321);
    std::vector<double> means;
    means.reserve(B);
    for (int b = 0; b < B; ++b) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i)
            s += sq[boot.next_u64() % n];
        means.push_back(s / static_cast<double>(n));
    }
    double mu = 0.0;
    for (const double m : means) mu += m;
    mu /= B;
    double ss = 0.0;
    for (const double m : means) ss += (m - mu) * (m - mu);
    const double se_boot = std::sqrt(ss / (B - 1));

    r.seconds = elapsed_seconds(start);
    r.passed = std::abs(mse - target) <= 3.0 * se_boot;
    r.detail = "empirical " + fmt(mse) + ", predicted " + fmt(target) +
               ", 3-sigma bootstrap window " + fmt(3.0 * se_boot);
    return r;
}

// ---- criterion 9: exact sampler law ---------------------------------------

CheckResult check_sampler_law() {
    CheckResult r{9, "exact transition sampler KS test", true, false, "", 0};
    const auto start = clock_type::now();
    const RbmParams p(1.0, 2.0);
    const size_t n = 100000;
    const double crit = std::sqrt(-0.5 * std::log(0.005)) /
                        std::sqrt(static_cast<double>(n));
    double worst = 0.0;
    uint64_t combo = 0;
    for (const double t : {0.25, 1.0, 5.0}) {
        for (const double x : {0.0, 1.0, 3.0}) {
            Rng rng = Rng::substream(424242, combo++);
            std::vector<double> ys(n);
            for (auto& y : ys) y = sample_transition(p, t, x, rng);
            std::sort(ys.begin(), ys.end());
            double d = 0.0;
            for (size_t i = 0; i < n; ++i) {
                const double F = cdf(p, t, x, ys[i]);
                d = std::max(d, std::max((i + 1.0) / n - F, F - i * 1.0 / n));
            }
            worst = std::max(worst, d);
        }
    }
    r.seconds = elapsed_seconds(start);
    r.passed = worst < crit && r.seconds < 30.0;
    r.detail = "max KS distance " + fmt(worst) + " vs 1% critical " + fmt(crit);
    return r;
}

// ---- criterion 10: CLI determinism ----------------------------------------

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

CheckResult check_cli_determinism() {
    CheckResult r{10, "simulate subcommand byte determinism", true, false, "", 0};
    const auto start = clock_type::now();
    const char* cli = std::getenv("RBM_CLI_PATH");
    if (cli != nullptr && *cli != '\0') {
        const std::string base =
            "/tmp/rbm_determinism_" + std::to_string(::getpid());
        const std::string out1 = base + "_1.csv";
        const std::string out2 = base + "_2.csv";
        const std::string args =
            " simulate --r 1 --sigma2 2 --measure identity --x0 1 --t 5"
            " --dt 0.001 --reps 64 --seed 777 --format csv --out ";
        bool ok = true;
        for (const std::string& out : {out1, out2}) {
            const std::string cmd = std::string("\"") + cli + "\"" + args + out;
            const int status = std::system(cmd.c_str());
            ok = ok && status != -1 && WIFEXITED(status) &&
                 WEXITSTATUS(status) == 0;
        }
        const std::string a = read_file(out1);
        const std::string b = read_file(out2);
        std::remove(out1.c_str());
        std::remove(out2.c_str());
        r.seconds = elapsed_seconds(start);
        r.passed = ok && !a.empty() && a == b;
        r.detail = "two CLI runs, " + std::to_string(a.size()) + " bytes" +
                   (r.passed ? ", identical" : ", MISMATCH");
        return r;
    }
    // in-process fallback when the CLI binary location is not provided
    const RbmParams p(1.0, 2.0);
    SimConfig cfg;
    cfg.seed = 777;
    cfg.dt = 1e-3;
    cfg.horizon = 5.0;
    cfg.replications = 64;
    const std::string a = to_csv(simulate_table(p, Identity{}, 1.0, cfg));
    const std::string b = to_csv(simulate_table(p, Identity{}, 1.0, cfg));
    r.seconds = elapsed_seconds(start);
    r.passed = !a.empty() && a == b;
    r.detail = "in-process fallback, " + std::to_string(a.size()) + " bytes" +
               (r.passed ? ", identical" : ", MISMATCH");
    return r;
}

}  // namespace

std::vector<CheckResult> run_acceptance_checks(bool include_slow) {
    std::vector<CheckResult> out;
    out.push_back(check_functional_boundary());
    out.push_back(check_distributional_boundary());
    out.push_back(check_tolerance_region());
    out.push_back(check_scaling());
    out.push_back(check_representation_equivalence());
    out.push_back(check_self_consistency());
    TimeAverageEstimate est;
    bool have_est = false;
    if (include_slow) {
        out.push_back(check_mc_bias(est, have_est));
        out.push_back(check_mc_mse(est, have_est));
    } else {
        out.push_back({7, "Monte Carlo bias constant at x0=0", false, false,
                       "skipped (slow)", 0});
        out.push_back({8, "Monte Carlo MSE at t=50", false, false,
                       "skipped (slow)", 0});
    }
    out.push_back(check_sampler_law());
    out.push_back(check_cli_determinism());
    return out;
}

std::string format_check_line(const CheckResult& r) {
    std::ostringstream line;
    line << (r.ran ? (r.passed ? "PASS" : "FAIL") : "SKIP") << " " << r.id
         << " " << r.name;
    char buf[32];
    std::snprintf(buf, sizeof(buf), " (%.2fs)", r.seconds);
    line << buf << ": " << r.detail;
    return line.str();
}

}  // namespace rbm
