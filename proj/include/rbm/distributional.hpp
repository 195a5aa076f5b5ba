#pragma once

#include "rbm/model.hpp"
#include "rbm/poisson.hpp"

namespace rbm {

// Signed bias kernel in scaled coordinates u = eta*x, v = eta*y:
//   m(u, v) = 1 - (u+v) e^{-v}            for 0 <= v <= u,
//   m(u, v) = e^{-(v-u)} - (u+v) e^{-v}   for v > u.
// Continuous at v = u; integrates to zero in v for every u.
double kernel(double u, double v);

// beta_f(delta_x) = | int_0^inf f(y) (1/r) m(eta x, eta y) dy |; equals
// poisson::unite_functional at point masses.
double functional_bias_via_kernel(const RbmParams& p, const PerformanceMeasure& f,
                                  double x);

// Distributional bias beta(delta_x) = (1/r) int_0^inf |m(eta x, eta y)| w(y) dy.
double distributional_bias(const RbmParams& p, const WeightFunction& w, double x);

// beta-tilde(pi): the pi-average of beta(delta_x), by nested quadrature;
// cached per weight.
double cite_distributional_pi(const RbmParams& p, const WeightFunction& w);

// {x : beta(delta_x) <= c * beta-tilde(pi)}; may be empty for small c.
std::vector<Interval> good_states_distributional(const RbmParams& p,
                                                 const WeightFunction& w,
                                                 double c);

std::vector<GoodStateRow> good_states_distributional_figure(
    const RbmParams& p, const WeightFunction& w, const std::vector<double>& c_grid);

}  // namespace rbm
