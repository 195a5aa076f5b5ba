#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace rbm {

// Reflected Brownian motion on [0, inf): dX = -r dt + sigma dB + dL.
// Stationary law is Exponential(eta).
struct RbmParams {
    double r;
    double sigma2;
    double eta;              // 2r / sigma2
    double gamma;            // r^2 / (2 sigma2), the spectral gap
    double stationary_mean;  // 1 / eta

    RbmParams(double r_, double sigma2_) : r(r_), sigma2(sigma2_) {
        if (!(r > 0.0)) throw std::domain_error("RbmParams: r must be > 0");
        if (!(sigma2 > 0.0)) throw std::domain_error("RbmParams: sigma2 must be > 0");
        eta = 2.0 * r / sigma2;
        gamma = r * r / (2.0 * sigma2);
        stationary_mean = 1.0 / eta;
    }
};

// GI/G/m heavy-traffic inputs.
struct QueueParams {
    double lambda;  // arrival rate
    double mu;      // per-server service rate
    int m;          // server count
    double var_a;   // interarrival-time variance
    double var_s;   // service-time variance
};

struct Identity {};
struct Square {};
struct Exponential {
    double theta;  // f(x) = e^{theta x}; requires theta < eta at use sites
};
struct IndicatorAbove {
    double b;  // f(x) = 1{x > b}
};
// Piecewise-linear on the grid, constant beyond the last point (and before the
// first), so oracle comparisons are exact.
struct Tabulated {
    std::vector<double> x;
    std::vector<double> fx;
};

using PerformanceMeasure =
    std::variant<Identity, Square, Exponential, IndicatorAbove, Tabulated>;

struct PointMass {
    double x;
};
struct Stationary {};
struct TabulatedDensity {
    std::vector<double> x;
    std::vector<double> density;
};

using InitialDistribution = std::variant<PointMass, Stationary, TabulatedDensity>;

struct Power {
    double p;  // w(y) = y^p, p >= 0; Power{0} is the constant weight
};
struct ExponentialWeight {
    double theta;  // w(y) = e^{theta y}; requires theta < eta at use sites
};

using WeightFunction = std::variant<Power, ExponentialWeight>;

RbmParams from_queue(const QueueParams& q);

double stationary_density(const RbmParams& p, double x);

double evaluate(const PerformanceMeasure& f, double x);
double evaluate(const WeightFunction& w, double y);

// E f(X(inf)) under Exponential(eta): closed forms for the named measures,
// exact segment integration for Tabulated.
double equilibrium_expectation(const RbmParams& p, const PerformanceMeasure& f);

void validate(const PerformanceMeasure& f, const RbmParams& p);
void validate(const WeightFunction& w, const RbmParams& p);
void validate(const Tabulated& f);
void validate(const TabulatedDensity& d);

std::string measure_name(const PerformanceMeasure& f);

}  // namespace rbm
