#include "rbm/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <utility>

#include "rbm/quad.hpp"
#include "rbm/transition.hpp"

namespace rbm {

namespace {

constexpr double z_975 = 1.959963984540054;

struct GridLayout {
    size_t full_steps;  // steps of length dt
    double remainder;   // trailing partial step, 0 when the grid divides evenly
    size_t total_steps;
};

GridLayout grid_layout(const SimConfig& cfg) {
    const double ratio = cfg.horizon / cfg.dt;
    size_t full = static_cast<size_t>(std::floor(ratio + 1e-9));
    if (full < 1) full = 1;
    double rem = cfg.horizon - static_cast<double>(full) * cfg.dt;
    if (!(rem > 1e-12 * cfg.horizon)) rem = 0.0;
    return {full, rem, full + (rem > 0.0 ? 1 : 0)};
}

// One replication's time average with a concrete evaluator, so the hot loop
// avoids a variant dispatch per grid point.
template <class Eval>
double lindley_average(const RbmParams& p, double x0, const SimConfig& cfg,
                       Rng& rng, Eval fx) {
    const GridLayout g = grid_layout(cfg);
    const double sig_dt = std::sqrt(p.sigma2 * cfg.dt);
    const double drift = p.r * cfg.dt;
    double x = x0;
    double f_prev = fx(x0);
    double acc = 0.0;
    for (size_t k = 0; k < g.full_steps; ++k) {
        const double pre = x - drift + sig_dt * rng.normal();
        x = pre > 0.0 ? pre : 0.0;
        const double f_cur = fx(x);
        acc += 0.5 * (f_prev + f_cur) * cfg.dt;
        f_prev = f_cur;
    }
    if (g.remainder > 0.0) {
        const double h = g.remainder;
        const double pre = x - p.r * h + std::sqrt(p.sigma2 * h) * rng.normal();
        x = pre > 0.0 ? pre : 0.0;
        acc += 0.5 * (f_prev + fx(x)) * h;
    }
    return acc / cfg.horizon;
}

double replication_average(const RbmParams& p, const PerformanceMeasure& f,
                           double x0, const SimConfig& cfg, uint64_t index) {
    Rng rng = Rng::substream(cfg.seed, cfg.antithetic ? index / 2 : index,
                             cfg.antithetic && (index % 2 == 1));
    return std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, Identity>) {
                return lindley_average(p, x0, cfg, rng, [](double x) { return x; });
            } else if constexpr (std::is_same_v<M, Square>) {
                return lindley_average(p, x0, cfg, rng,
                                       [](double x) { return x * x; });
            } else if constexpr (std::is_same_v<M, Exponential>) {
                const double theta = m.theta;
                return lindley_average(p, x0, cfg, rng, [theta](double x) {
                    return std::exp(theta * x);
                });
            } else if constexpr (std::is_same_v<M, IndicatorAbove>) {
                const double b = m.b;
                return lindley_average(p, x0, cfg, rng, [b](double x) {
                    return x > b ? 1.0 : 0.0;
                });
            } else {
                const PerformanceMeasure wrapped = m;
                return lindley_average(p, x0, cfg, rng, [&wrapped](double x) {
                    return evaluate(wrapped, x);
                });
            }
        },
        f);
}

// Runs fn(i) for i in [0, n) on the worker pool; any index order is fine
// because each index writes only its own slot.
void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
    const size_t workers =
        std::min<size_t>(static_cast<size_t>(worker_count()), n);
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

// Collapses antithetic pairs into their means; a trailing unpaired
// replication stands alone. Without antithetic this is the identity.
std::vector<double> iid_units(const std::vector<double>& values, bool antithetic) {
    if (!antithetic) return values;
    std::vector<double> units;
    units.reserve(values.size() / 2 + 1);
    size_t i = 0;
    for (; i + 1 < values.size(); i += 2)
        units.push_back(0.5 * (values[i] + values[i + 1]));
    if (i < values.size()) units.push_back(values[i]);
    return units;
}

struct MeanSpread {
    double mean;
    double variance;   // sample variance of the units
    double std_error;  // of the mean
};

MeanSpread mean_and_spread(const std::vector<double>& units) {
    const size_t m = units.size();
    MeanSpread out{};
    out.mean = pairwise_sum(units.data(), m) / static_cast<double>(m);
    if (m < 2) {
        out.variance = std::numeric_limits<double>::quiet_NaN();
        out.std_error = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    std::vector<double> sq(m);
    for (size_t i = 0; i < m; ++i) {
        const double d = units[i] - out.mean;
        sq[i] = d * d;
    }
    out.variance = pairwise_sum(sq.data(), m) / static_cast<double>(m - 1);
    out.std_error = std::sqrt(out.variance / static_cast<double>(m));
    return out;
}

}  // namespace

void validate(const SimConfig& cfg) {
    if (!(std::isfinite(cfg.dt) && cfg.dt > 0.0))
        throw std::invalid_argument("SimConfig: dt must be positive");
    if (!(std::isfinite(cfg.horizon) && cfg.horizon > 0.0))
        throw std::invalid_argument("SimConfig: horizon must be positive");
    if (cfg.dt > cfg.horizon)
        throw std::invalid_argument("SimConfig: dt must not exceed horizon");
    if (cfg.replications < 1)
        throw std::invalid_argument("SimConfig: replications must be >= 1");
}

int worker_count() {
    if (const char* env = std::getenv("RBM_TRANSIENT_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && n >= 1) return static_cast<int>(std::min(n, 256L));
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

double pairwise_sum(const double* data, size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    const size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

double sample_transition(const RbmParams& p, double t, double x, Rng& rng) {
    if (!(std::isfinite(t) && t > 0.0))
        throw std::invalid_argument("sample_transition: t must be positive");
    if (!(std::isfinite(x) && x >= 0.0))
        throw std::invalid_argument("sample_transition: x must be nonnegative");
    const double u = rng.uniform();
    const double spread = std::sqrt(p.sigma2 * t);
    // F(t, x, .) is continuous and strictly increasing with F(0) = 0 and limit
    // 1, so doubling the upper endpoint must eventually enclose any u in (0,1).
    double hi = x + 4.0 * spread + 4.0 * p.stationary_mean;
    int guard = 0;
    while (cdf(p, t, x, hi) < u) {
        hi *= 2.0;
        if (++guard > 200)
            throw std::runtime_error(
                "sample_transition: failed to bracket the quantile");
    }
    const double tol = 1e-10 * (1.0 + x + spread + p.stationary_mean);
    return find_root([&](double y) { return cdf(p, t, x, y) - u; }, 0.0, hi, tol);
}

PathSample simulate_path(const RbmParams& p, double x0, const SimConfig& cfg,
                         Rng& rng) {
    validate(cfg);
    if (!(std::isfinite(x0) && x0 >= 0.0))
        throw std::invalid_argument("simulate_path: x0 must be nonnegative");
    const GridLayout g = grid_layout(cfg);
    PathSample path;
    path.times.reserve(g.total_steps + 1);
    path.states.reserve(g.total_steps + 1);
    path.local_time.reserve(g.total_steps + 1);
    path.times.push_back(0.0);
    path.states.push_back(x0);
    path.local_time.push_back(0.0);
    const double sig_dt = std::sqrt(p.sigma2 * cfg.dt);
    double x = x0;
    double local = 0.0;
    for (size_t k = 0; k < g.total_steps; ++k) {
        const bool partial = k >= g.full_steps;
        const double h = partial ? g.remainder : cfg.dt;
        const double scale = partial ? std::sqrt(p.sigma2 * h) : sig_dt;
        const double pre = x - p.r * h + scale * rng.normal();
        if (pre < 0.0) local -= pre;
        x = pre > 0.0 ? pre : 0.0;
        path.times.push_back(k + 1 == g.total_steps
                                 ? cfg.horizon
                                 : static_cast<double>(k + 1) * cfg.dt);
        path.states.push_back(x);
        path.local_time.push_back(local);
    }
    return path;
}

TimeAverageEstimate estimate_time_average(const RbmParams& p,
                                          const PerformanceMeasure& f, double x0,
                                          const SimConfig& cfg) {
    validate(cfg);
    validate(f, p);
    if (!(std::isfinite(x0) && x0 >= 0.0))
        throw std::invalid_argument(
            "estimate_time_average: x0 must be nonnegative");
    const size_t n = static_cast<size_t>(cfg.replications);
    std::vector<double> alphas(n);
    parallel_for(n, [&](size_t i) {
        alphas[i] = replication_average(p, f, x0, cfg, static_cast<uint64_t>(i));
    });

    const std::vector<double> units = iid_units(alphas, cfg.antithetic);
    const MeanSpread spread = mean_and_spread(units);

    TimeAverageEstimate est;
    est.mean = spread.mean;
    est.bias_constant = cfg.horizon * (spread.mean - equilibrium_expectation(p, f));
    est.variance = spread.variance;
    est.std_error = spread.std_error;
    est.ci_lo = spread.mean - z_975 * spread.std_error;
    est.ci_hi = spread.mean + z_975 * spread.std_error;
    est.replications = cfg.replications;
    est.alphas = std::move(alphas);
    return est;
}

MseEstimate empirical_mse_from_alphas(const std::vector<double>& alphas,
                                      double target, bool antithetic) {
    std::vector<double> sq(alphas.size());
    for (size_t i = 0; i < sq.size(); ++i) {
        const double d = alphas[i] - target;
        sq[i] = d * d;
    }
    const std::vector<double> units = iid_units(sq, antithetic);
    const MeanSpread spread = mean_and_spread(units);
    MseEstimate est;
    est.mse = spread.mean;
    est.std_error = spread.std_error;
    est.ci_lo = spread.mean - z_975 * spread.std_error;
    est.ci_hi = spread.mean + z_975 * spread.std_error;
    est.replications = static_cast<int>(alphas.size());
    return est;
}

MseEstimate empirical_mse(const RbmParams& p, const PerformanceMeasure& f,
                          double x0, const SimConfig& cfg) {
    const TimeAverageEstimate ta = estimate_time_average(p, f, x0, cfg);
    return empirical_mse_from_alphas(ta.alphas, equilibrium_expectation(p, f),
                                     cfg.antithetic);
}

}  // namespace rbm
