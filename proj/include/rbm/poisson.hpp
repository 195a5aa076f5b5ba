#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "rbm/model.hpp"
#include "rbm/quad.hpp"

namespace rbm {

struct Interval {
    double lo;
    double hi;
};

// Centered solution of the generator equation L k = -(g - E g(X(inf))) with
// k(0) = 0, k'(0) = 0, shifted so E k_c(X(inf)) = 0. Quadrature backend for
// arbitrary integrable g; kinks lists abscissae where g is not smooth,
// tail_rate bounds the exponential decay of the centering integrand.
class GeneralPoissonSolver {
public:
    GeneralPoissonSolver(const RbmParams& p, std::function<double(double)> g,
                         std::vector<double> kinks, double tail_rate);

    double mean_g() const { return mean_g_; }
    double mean_h() const { return mean_h_; }
    double h(double x) const;  // h(0) = 0 solution
    double h_centered(double x) const { return h(x) - mean_h_; }
    double h_centered_prime(double x) const;

private:
    RbmParams p_;
    std::function<double(double)> g_;
    std::vector<double> kinks_;
    double mean_g_;
    double mean_h_;
};

// Bias constant machinery for a performance measure: closed forms for
// Identity, Square, Exponential and IndicatorAbove, quadrature for Tabulated.
// Immutable after construction; the centering constant is cached eagerly.
class BiasFunction {
public:
    BiasFunction(const RbmParams& p, const PerformanceMeasure& f);

    double h(double x) const;
    double h_centered(double x) const;
    double h_centered_prime(double x) const;
    double mean_h() const;              // E h(X(inf))
    double equilibrium_mean() const;    // E f(X(inf))
    const RbmParams& params() const { return p_; }
    const PerformanceMeasure& measure() const { return f_; }
    // Abscissae where h_c' has a kink (for finite-difference exclusion zones
    // and quadrature splitting).
    std::vector<double> kinks() const;

private:
    RbmParams p_;
    PerformanceMeasure f_;
    double equilibrium_mean_;
    bool closed_form_;
    std::shared_ptr<const GeneralPoissonSolver> solver_;  // Tabulated backend

    double h_centered_closed(double x) const;
    double h_centered_prime_closed(double x) const;
};

double solve_h(const RbmParams& p, const PerformanceMeasure& f, double x);
double h_centered(const RbmParams& p, const PerformanceMeasure& f, double x);

// UNITE bias beta_f(mu) = |int h_c dmu|.
double unite_functional(const RbmParams& p, const PerformanceMeasure& f,
                        const InitialDistribution& mu);

// CITE bias beta-tilde_f(mu) = int |h_c| dmu.
double cite_functional(const RbmParams& p, const PerformanceMeasure& f,
                       const InitialDistribution& mu);

// Solution set of |h_c(x)| <= c * cite_functional(p, f, pi) as a union of
// disjoint intervals (possibly degenerate, possibly empty).
std::vector<Interval> good_states_functional(const RbmParams& p,
                                             const PerformanceMeasure& f,
                                             double c);

struct GoodStateRow {
    double c;
    std::vector<Interval> intervals;
};

std::vector<GoodStateRow> good_states_figure(const RbmParams& p,
                                             const PerformanceMeasure& f,
                                             const std::vector<double>& c_grid);

// Shared helpers for interval searches over |bias(x)| <= threshold.
std::vector<Interval> sublevel_intervals(const std::function<double(double)>& bias,
                                         double threshold, double x_step,
                                         double x_max_initial,
                                         bool extend_by_doubling);

}  // namespace rbm
