#include "rbm/mse.hpp"

#include <algorithm>
#include <cmath>

#include "rbm/special.hpp"

namespace rbm {
namespace {

// Decay rate for quadratures of h_c'^2 and h_c^2 against pi.
double pi_square_tail_rate(const RbmParams& p, const PerformanceMeasure& f) {
    if (const auto* e = std::get_if<Exponential>(&f)) {
        if (!(2.0 * e->theta < p.eta))
            throw std::domain_error(
                "mse: Exponential measure needs 2*theta < eta for square "
                "integrability against pi");
        return 0.5 * (p.eta - 2.0 * std::max(e->theta, 0.0));
    }
    return 0.5 * p.eta;
}

double pi_average(const RbmParams& p, const BiasFunction& bias,
                  const std::function<double(double)>& g, double tail_rate) {
    QuadSpec spec;
    spec.abs_tol = 1e-12;
    spec.rel_tol = 1e-10;
    spec.tail_rate = tail_rate;
    auto integrand = [&](double x) {
        return g(x) * p.eta * std::exp(-p.eta * x);
    };
    std::vector<double> cuts = bias.kinks();
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    double a = 0.0;
    for (double cut : cuts) {
        if (cut > a) {
            total += integrate(integrand, a, cut, spec).value;
            a = cut;
        }
    }
    total += integrate(integrand, a, std::numeric_limits<double>::infinity(),
                       spec)
                 .value;
    return total;
}

}  // namespace

double kappa2(const RbmParams& p, const PerformanceMeasure& f) {
    validate(f, p);
    const double r = p.r, s2 = p.sigma2;
    if (std::holds_alternative<Identity>(f))
        return std::pow(s2, 3) / (2.0 * std::pow(r, 4));
    if (std::holds_alternative<Square>(f))
        return 7.0 * std::pow(s2, 5) / (2.0 * std::pow(r, 6));
    const double tail_rate = pi_square_tail_rate(p, f);
    BiasFunction bias(p, f);
    auto g = [&](double x) {
        const double d = bias.h_centered_prime(x);
        return d * d;
    };
    return s2 * pi_average(p, bias, g, tail_rate);
}

double k_c(const RbmParams& p, const PerformanceMeasure& f, double x) {
    if (x < 0.0) throw std::domain_error("k_c: x must be >= 0");
    validate(f, p);
    const double r = p.r, s2 = p.sigma2;
    if (std::holds_alternative<Identity>(f))
        return (2.0 * std::pow(r, 3) * std::pow(x, 3) +
                3.0 * r * r * s2 * x * x - 3.0 * std::pow(s2, 3)) /
               (6.0 * std::pow(r, 6));
    const double tail_rate = pi_square_tail_rate(p, f);
    BiasFunction bias(p, f);
    auto g = [bias](double y) {
        const double d = bias.h_centered_prime(y);
        return d * d;
    };
    GeneralPoissonSolver solver(p, g, bias.kinks(), tail_rate);
    return solver.h_centered(x);
}

double eh_c_squared(const RbmParams& p, const PerformanceMeasure& f) {
    validate(f, p);
    if (std::holds_alternative<Identity>(f))
        return 5.0 * std::pow(p.sigma2, 4) / (16.0 * std::pow(p.r, 6));
    const double tail_rate = pi_square_tail_rate(p, f);
    BiasFunction bias(p, f);
    auto g = [&](double x) {
        const double h = bias.h_centered(x);
        return h * h;
    };
    return pi_average(p, bias, g, tail_rate);
}

MseDecomposition mse_estimate(const RbmParams& p, const PerformanceMeasure& f,
                              double x, double t) {
    if (!(t > 0.0)) throw std::domain_error("mse_estimate: t must be > 0");
    MseDecomposition d{};
    d.kappa2 = kappa2(p, f);
    d.k_c_x = k_c(p, f, x);
    const double hc = h_centered(p, f, x);
    d.h_c_sq = hc * hc;
    d.eh_c2 = eh_c_squared(p, f);
    d.t = t;
    d.total = d.kappa2 / t +
              (p.sigma2 * d.k_c_x + d.h_c_sq + d.eh_c2) / (t * t);
    return d;
}

double threshold_time(const RbmParams& p, const PerformanceMeasure& f, double x) {
    const double beta = std::fabs(h_centered(p, f, x));
    const double k2 = kappa2(p, f);
    if (!(k2 > 0.0)) throw std::domain_error("threshold_time: kappa2 must be > 0");
    return beta * beta * pi_const / (2.0 * k2);
}

double threshold_tolerance(const RbmParams& p, const PerformanceMeasure& f,
                           double x) {
    const double mean = equilibrium_expectation(p, f);
    if (mean == 0.0)
        throw std::domain_error(
            "threshold_tolerance: undefined when E f(X(inf)) = 0");
    const double beta = std::fabs(h_centered(p, f, x));
    if (beta == 0.0) return std::numeric_limits<double>::infinity();
    const double k2 = kappa2(p, f);
    return 2.0 * k2 / (beta * std::fabs(mean)) * (2.0 / pi_const);
}

std::vector<Interval> tolerance_region(const RbmParams& p,
                                       const PerformanceMeasure& f,
                                       double level) {
    if (!(level > 0.0))
        throw std::domain_error("tolerance_region: level must be > 0");
    const double mean = equilibrium_expectation(p, f);
    if (mean == 0.0)
        throw std::domain_error(
            "tolerance_region: undefined when E f(X(inf)) = 0");
    const double k2 = kappa2(p, f);
    // eps*(x) >= level  <=>  |h_c(x)| <= 4 kappa^2 / (pi |mean| level).
    const double threshold = 4.0 * k2 / (pi_const * std::fabs(mean) * level);
    if (std::holds_alternative<Identity>(f)) {
        const double k = p.sigma2 * p.sigma2 / (4.0 * std::pow(p.r, 3));
        const double lo = std::sqrt(std::max(0.0, 2.0 * p.r * (k - threshold)));
        const double hi = std::sqrt(2.0 * p.r * (k + threshold));
        return {Interval{lo, hi}};
    }
    BiasFunction bias(p, f);
    auto abs_hc = [&](double x) { return std::fabs(bias.h_centered(x)); };
    return sublevel_intervals(abs_hc, threshold, p.stationary_mean / 50.0,
                              50.0 * p.stationary_mean, true);
}

std::vector<ToleranceRow> tolerance_figure(const RbmParams& p,
                                           const PerformanceMeasure& f,
                                           const std::vector<double>& x_grid) {
    std::vector<ToleranceRow> rows;
    rows.reserve(x_grid.size());
    for (double x : x_grid)
        rows.push_back(ToleranceRow{x, threshold_tolerance(p, f, x)});
    return rows;
}

}  // namespace rbm
