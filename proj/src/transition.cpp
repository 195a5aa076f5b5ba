#include "rbm/transition.hpp"

#include <cmath>

#include "rbm/special.hpp"

namespace rbm {
namespace {

void check_txy(double t, double x, double y) {
    if (!(t > 0.0)) throw std::domain_error("transition: t must be > 0");
    if (x < 0.0 || y < 0.0) throw std::domain_error("transition: states must be >= 0");
}

// The trigonometric factor of the eigenfunction, C_s(z) = s cos(s z / sigma^2)
// - r sin(s z / sigma^2); u_s(z) = e^{r z / sigma^2} C_s(z).
double trig_factor(const RbmParams& p, double s, double z) {
    const double w = s * z / p.sigma2;
    return s * std::cos(w) - p.r * std::sin(w);
}

// Largest s with non-negligible e^{-s^2 t / (2 sigma^2)} damping.
double s_cutoff(const RbmParams& p, double t) {
    return std::sqrt(2.0 * p.sigma2 * 50.0 / t);
}

// Integrates g over [0, s_max] in half-period panels of the fastest
// oscillation frequency freq (radians per unit s), each panel adaptively.
double panel_integrate(const std::function<double(double)>& g, double s_max,
                       double freq, const QuadSpec& spec) {
    const double base = s_max / 8.0;
    const double panel =
        freq > 1e-12 ? std::min(pi_const / freq, base) : base;
    double total = 0.0;
    double a = 0.0;
    while (a < s_max) {
        const double b = std::min(a + panel, s_max);
        total += integrate(g, a, b, spec).value;
        a = b;
    }
    return total;
}

}  // namespace

SpectralPoint SpectralPoint::from_lambda(const RbmParams& p, double lambda) {
    if (!(lambda < -p.gamma))
        throw std::domain_error("SpectralPoint: lambda must lie below -gamma");
    const double sigma = std::sqrt(p.sigma2);
    return SpectralPoint{lambda, sigma * std::sqrt(-2.0 * (lambda + p.gamma))};
}

SpectralPoint SpectralPoint::from_s(const RbmParams& p, double s) {
    if (!(s > 0.0)) throw std::domain_error("SpectralPoint: s must be > 0");
    return SpectralPoint{-p.gamma - s * s / (2.0 * p.sigma2), s};
}

double density(const RbmParams& p, double t, double x, double y) {
    check_txy(t, x, y);
    const double st = std::sqrt(p.sigma2 * t);
    const double rt = p.r * t;
    return p.eta * std::exp(-p.eta * y) * norm_cdf((rt - x - y) / st) +
           norm_pdf((-rt + x - y) / st) / st +
           std::exp(-p.eta * y) * norm_pdf((-rt + x + y) / st) / st;
}

double cdf(const RbmParams& p, double t, double x, double y) {
    check_txy(t, x, y);
    const double st = std::sqrt(p.sigma2 * t);
    const double a = (y - x + p.r * t) / st;
    const double b = (p.r * t - x - y) / st;
    // F = Phi(a) - e^{-eta y} Phi(b), rearranged so F(t,x,0) = 0 exactly and
    // small-y evaluation stays cancellation-safe: a >= b always.
    const double phi_diff = (b >= 0.0) ? norm_cdf_upper(b) - norm_cdf_upper(a)
                                       : norm_cdf(a) - norm_cdf(b);
    const double value = norm_cdf(a) * (-std::expm1(-p.eta * y)) +
                         std::exp(-p.eta * y) * phi_diff;
    return std::min(1.0, std::max(0.0, value));
}

double eigenfunction(const RbmParams& p, double lambda, double x) {
    const SpectralPoint pt = SpectralPoint::from_lambda(p, lambda);
    return std::exp(p.r * x / p.sigma2) * trig_factor(p, pt.s, x);
}

double spectral_gap(const RbmParams& p) { return p.gamma; }

double density_spectral(const RbmParams& p, double t, double x, double y) {
    check_txy(t, x, y);
    if (t < spectral_t_min)
        throw convergence_error(
            "density_spectral: t below the spectral minimum horizon",
            std::numeric_limits<double>::quiet_NaN(),
            std::numeric_limits<double>::infinity());
    const double s_max = s_cutoff(p, t);
    const double freq = (x + y) / p.sigma2;
    QuadSpec panel_spec;
    panel_spec.abs_tol = 1e-13;
    panel_spec.rel_tol = 1e-11;
    auto g = [&](double s) {
        return std::exp(-s * s * t / (2.0 * p.sigma2)) * trig_factor(p, s, x) *
               trig_factor(p, s, y) / (s * s + p.r * p.r);
    };
    const double integral = panel_integrate(g, s_max, freq, panel_spec);
    return p.eta * std::exp(-p.eta * y) +
           (2.0 / (pi_const * p.sigma2)) *
               std::exp(p.r * (x - y) / p.sigma2 - p.gamma * t) * integral;
}

double expectation_spectral(const RbmParams& p, double t, double x,
                            const PerformanceMeasure& f) {
    if (!(t > 0.0)) throw std::domain_error("transition: t must be > 0");
    if (x < 0.0) throw std::domain_error("transition: states must be >= 0");
    if (t < spectral_t_min)
        throw convergence_error(
            "expectation_spectral: t below the spectral minimum horizon",
            std::numeric_limits<double>::quiet_NaN(),
            std::numeric_limits<double>::infinity());
    validate(f, p);
    // <f, u_s> integrands decay like e^{-(eta/2 - theta) y}; square
    // integrability against pi demands 2 theta < eta.
    double decay = 0.5 * p.eta;
    if (const auto* e = std::get_if<Exponential>(&f)) {
        if (!(2.0 * e->theta < p.eta))
            throw std::domain_error(
                "expectation_spectral: Exponential measure needs 2*theta < eta");
        decay -= std::max(e->theta, 0.0);
    }
    const double mean = equilibrium_expectation(p, f);

    QuadSpec inner_spec;
    inner_spec.abs_tol = 1e-12;
    inner_spec.rel_tol = 1e-10;
    double y_start = 0.0;
    if (const auto* ind = std::get_if<IndicatorAbove>(&f)) y_start = ind->b;
    const double y_max = y_start + 60.0 / decay;
    auto inner = [&](double s) {
        auto g = [&](double y) {
            return evaluate(f, y) * trig_factor(p, s, y) *
                   std::exp(-0.5 * p.eta * y);
        };
        const double y_panel =
            std::min(pi_const * p.sigma2 / std::max(s, 1e-3), 2.0 / decay);
        double total = 0.0;
        double a = y_start;
        while (a < y_max) {
            const double b = std::min(a + y_panel, y_max);
            total += integrate(g, a, b, inner_spec).value;
            a = b;
        }
        return p.eta * total;
    };

    const double s_max = s_cutoff(p, t);
    QuadSpec outer_spec;
    outer_spec.abs_tol = 1e-11;
    outer_spec.rel_tol = 1e-9;
    auto g = [&](double s) {
        return std::exp(-s * s * t / (2.0 * p.sigma2)) *
               std::exp(p.r * x / p.sigma2) * trig_factor(p, s, x) * inner(s) /
               (s * s + p.r * p.r);
    };
    const double integral = panel_integrate(g, s_max, x / p.sigma2, outer_spec);
    return mean +
           std::exp(-p.gamma * t) / (pi_const * p.r) * integral;
}

}  // namespace rbm
