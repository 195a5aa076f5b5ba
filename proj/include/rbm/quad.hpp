#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace rbm {

// Tolerance and subdivision contract for the adaptive integrator. tail_rate is
// the exponential decay-rate hint used both by the -ln(u) substitution and by
// the envelope-truncation fallback for semi-infinite integrals.
struct QuadSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_subdivisions = 2000;
    double tail_rate = 1.0;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int subdivisions = 0;
};

class convergence_error : public std::runtime_error {
public:
    convergence_error(const std::string& what, double estimate, double achieved_error)
        : std::runtime_error(what), estimate_(estimate), achieved_(achieved_error) {}
    double estimate() const { return estimate_; }
    double achieved_error() const { return achieved_; }

private:
    double estimate_;
    double achieved_;
};

class no_sign_change_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Adaptive Gauss-Kronrod (G7/K15) integration of f over [a, b]; b may be
// +infinity, in which case the tail is folded onto (0,1] via v = a - ln(u)/rate
// with an envelope-truncation fallback. On convergence the returned error
// satisfies error <= max(abs_tol, rel_tol*|value|); otherwise throws
// convergence_error carrying the best estimate.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadSpec& spec = {});

// Brent root of g on [lo, hi]; requires a sign change, converges to bracket
// width <= tol. Throws no_sign_change_error when g(lo)*g(hi) > 0.
double find_root(const std::function<double(double)>& g, double lo, double hi,
                 double tol = 1e-12);

}  // namespace rbm
