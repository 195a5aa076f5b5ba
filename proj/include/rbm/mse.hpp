#pragma once

#include "rbm/model.hpp"
#include "rbm/poisson.hpp"

namespace rbm {

// Four-term decomposition of E(alpha(t) - alpha)^2 into the t^{-1} variance
// term and the t^{-2} transient terms.
struct MseDecomposition {
    double kappa2;   // time-average variance constant
    double k_c_x;    // variance transient constant at x
    double h_c_sq;   // squared bias constant h_c(x)^2
    double eh_c2;    // E h_c(X(inf))^2
    double t;
    double total;    // kappa2/t + (sigma2*k_c_x + h_c_sq + eh_c2)/t^2
};

// kappa^2 = sigma^2 E h_c'(X(inf))^2; closed forms for Identity and Square,
// quadrature otherwise. Diverges for Exponential with 2*theta >= eta.
double kappa2(const RbmParams& p, const PerformanceMeasure& f);

// Centered solution of L k_c = -(h_c'^2 - E h_c'(X(inf))^2); closed form for
// Identity, the general Poisson machinery otherwise.
double k_c(const RbmParams& p, const PerformanceMeasure& f, double x);

// E h_c(X(inf))^2; Identity pinned to 5 sigma^8 / (16 r^6).
double eh_c_squared(const RbmParams& p, const PerformanceMeasure& f);

MseDecomposition mse_estimate(const RbmParams& p, const PerformanceMeasure& f,
                              double x, double t);

// t*(x) = h_c(x)^2 pi / (2 kappa^2).
double threshold_time(const RbmParams& p, const PerformanceMeasure& f, double x);

// eps*(x) = (2 kappa^2 / (|h_c(x)| |E f(X(inf))|)) (2/pi); +inf at bias zeros.
double threshold_tolerance(const RbmParams& p, const PerformanceMeasure& f,
                           double x);

// {x : eps*(x) >= level}, closed form for Identity, search otherwise.
std::vector<Interval> tolerance_region(const RbmParams& p,
                                       const PerformanceMeasure& f,
                                       double level);

struct ToleranceRow {
    double x;
    double eps_star;  // +inf marks a bias zero (figure gap)
};

std::vector<ToleranceRow> tolerance_figure(const RbmParams& p,
                                           const PerformanceMeasure& f,
                                           const std::vector<double>& x_grid);

}  // namespace rbm
