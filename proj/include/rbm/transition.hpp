#pragma once

#include "rbm/model.hpp"
#include "rbm/quad.hpp"

namespace rbm {

// Point on the continuous spectrum of the generator, lambda < -gamma, with the
// reparametrization s = sigma sqrt(-2 (lambda + gamma)).
struct SpectralPoint {
    double lambda;
    double s;

    static SpectralPoint from_lambda(const RbmParams& p, double lambda);
    static SpectralPoint from_s(const RbmParams& p, double s);
};

// Minimum horizon for the spectral representation; below this the e^{lambda t}
// damping is too weak for the oscillatory quadrature to certify 1e-6.
inline constexpr double spectral_t_min = 0.05;

// Closed-form transition density p(t, x, y).
double density(const RbmParams& p, double t, double x, double y);

// P(X(t) <= y | X(0) = x); exact antiderivative of density in y.
double cdf(const RbmParams& p, double t, double x, double y);

// u_lambda(x) = e^{r x / sigma^2} (s cos(s x / sigma^2) - r sin(s x / sigma^2)).
double eigenfunction(const RbmParams& p, double lambda, double x);

// Transition density via the spectral decomposition; requires t >= spectral_t_min.
double density_spectral(const RbmParams& p, double t, double x, double y);

// E_x f(X(t)) via the spectral decomposition of the semigroup.
double expectation_spectral(const RbmParams& p, double t, double x,
                            const PerformanceMeasure& f);

double spectral_gap(const RbmParams& p);

}  // namespace rbm
