#pragma once

#include <cstdint>
#include <vector>

#include "rbm/model.hpp"
#include "rbm/rng.hpp"

namespace rbm {

struct SimConfig {
    uint64_t seed = 1;
    double dt = 1e-3;
    double horizon = 50.0;
    int replications = 1;
    bool antithetic = false;
};

void validate(const SimConfig& cfg);

// One grid-Lindley path with its reflection local time.
struct PathSample {
    std::vector<double> times;
    std::vector<double> states;
    std::vector<double> local_time;  // cumulative, nondecreasing
};

// Exact draw from the transition law p(t, x, .) by CDF inversion; no
// discretization bias.
double sample_transition(const RbmParams& p, double t, double x, Rng& rng);

// Grid-Lindley recursion X_{k+1} = max(X_k - r dt + sigma sqrt(dt) Z, 0),
// accumulating the reflection local time.
PathSample simulate_path(const RbmParams& p, double x0, const SimConfig& cfg,
                         Rng& rng);

struct TimeAverageEstimate {
    double mean;           // replication mean of alpha(t)
    double bias_constant;  // t * (mean - E f(X(inf)))
    double variance;       // sample variance of the iid units (pairs if antithetic)
    double std_error;      // standard error of the mean
    double ci_lo;          // 95% normal-theory interval
    double ci_hi;
    int replications;
    std::vector<double> alphas;  // per-replication time averages
};

// Replicated time averages alpha(t) = t^{-1} int_0^t f(X(s)) ds, trapezoidal
// accumulation on the grid, deterministic pairwise reduction.
TimeAverageEstimate estimate_time_average(const RbmParams& p,
                                          const PerformanceMeasure& f, double x0,
                                          const SimConfig& cfg);

struct MseEstimate {
    double mse;
    double std_error;
    double ci_lo;
    double ci_hi;
    int replications;
};

// Replication average of (alpha(t) - E f(X(inf)))^2 with a moment-based CI.
MseEstimate empirical_mse(const RbmParams& p, const PerformanceMeasure& f,
                          double x0, const SimConfig& cfg);

// Same statistic computed from an existing replication set (antithetic pairs
// are adjacent and collapse into single units for the CI).
MseEstimate empirical_mse_from_alphas(const std::vector<double>& alphas,
                                      double target, bool antithetic);

// Worker count: RBM_TRANSIENT_THREADS when set, hardware concurrency otherwise.
int worker_count();

// Deterministic pairwise (tree) sum, independent of thread scheduling.
double pairwise_sum(const double* data, size_t n);

}  // namespace rbm
