#include "rbm/model.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>

namespace rbm {

RbmParams from_queue(const QueueParams& q) {
    if (!(q.lambda > 0.0)) throw std::domain_error("from_queue: lambda must be > 0");
    if (!(q.mu > 0.0)) throw std::domain_error("from_queue: mu must be > 0");
    if (q.m < 1) throw std::domain_error("from_queue: m must be >= 1");
    if (q.var_a < 0.0 || q.var_s < 0.0)
        throw std::domain_error("from_queue: variances must be >= 0");
    const double r = q.m * q.mu - q.lambda;
    if (!(r > 0.0))
        throw std::domain_error("from_queue: unstable queue (m*mu <= lambda)");
    const double sigma2 = std::pow(q.lambda, 3) * q.var_a +
                          q.m * std::pow(q.mu, 3) * q.var_s;
    return RbmParams(r, sigma2);
}

double stationary_density(const RbmParams& p, double x) {
    if (x < 0.0) throw std::domain_error("stationary_density: x must be >= 0");
    return p.eta * std::exp(-p.eta * x);
}

void validate(const Tabulated& f) {
    if (f.x.size() < 2 || f.x.size() != f.fx.size())
        throw std::domain_error("Tabulated: need matching grids with >= 2 points");
    for (size_t i = 1; i < f.x.size(); ++i)
        if (!(f.x[i] > f.x[i - 1]))
            throw std::domain_error("Tabulated: grid must be strictly increasing");
    if (f.x.front() < 0.0)
        throw std::domain_error("Tabulated: support must lie in [0, inf)");
}

void validate(const TabulatedDensity& d) {
    if (d.x.size() < 2 || d.x.size() != d.density.size())
        throw std::domain_error("TabulatedDensity: need matching grids with >= 2 points");
    for (size_t i = 1; i < d.x.size(); ++i)
        if (!(d.x[i] > d.x[i - 1]))
            throw std::domain_error("TabulatedDensity: grid must be strictly increasing");
    if (d.x.front() < 0.0)
        throw std::domain_error("TabulatedDensity: support must lie in [0, inf)");
    for (double v : d.density)
        if (v < 0.0) throw std::domain_error("TabulatedDensity: density must be >= 0");
    double mass = 0.0;
    for (size_t i = 1; i < d.x.size(); ++i)
        mass += 0.5 * (d.density[i] + d.density[i - 1]) * (d.x[i] - d.x[i - 1]);
    if (std::fabs(mass - 1.0) > 1e-8)
        throw std::domain_error("TabulatedDensity: density must integrate to 1");
}

void validate(const PerformanceMeasure& f, const RbmParams& p) {
    if (const auto* e = std::get_if<Exponential>(&f)) {
        if (!(e->theta < p.eta))
            throw std::domain_error("Exponential measure: requires theta < eta");
    } else if (const auto* ind = std::get_if<IndicatorAbove>(&f)) {
        if (ind->b < 0.0)
            throw std::domain_error("IndicatorAbove: level b must be >= 0");
    } else if (const auto* tab = std::get_if<Tabulated>(&f)) {
        validate(*tab);
    }
}

void validate(const WeightFunction& w, const RbmParams& p) {
    if (const auto* pw = std::get_if<Power>(&w)) {
        if (pw->p < 0.0) throw std::domain_error("Power weight: p must be >= 0");
    } else if (const auto* e = std::get_if<ExponentialWeight>(&w)) {
        if (!(e->theta < p.eta))
            throw std::domain_error("ExponentialWeight: requires theta < eta");
    }
}

double evaluate(const PerformanceMeasure& f, double x) {
    return std::visit(
        [x](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Identity>) {
                return x;
            } else if constexpr (std::is_same_v<T, Square>) {
                return x * x;
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return std::exp(m.theta * x);
            } else if constexpr (std::is_same_v<T, IndicatorAbove>) {
                return x > m.b ? 1.0 : 0.0;
            } else {
                const auto& xs = m.x;
                if (x <= xs.front()) return m.fx.front();
                if (x >= xs.back()) return m.fx.back();
                auto it = std::upper_bound(xs.begin(), xs.end(), x);
                const size_t i = static_cast<size_t>(it - xs.begin());
                const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
                return m.fx[i - 1] + t * (m.fx[i] - m.fx[i - 1]);
            }
        },
        f);
}

double evaluate(const WeightFunction& w, double y) {
    return std::visit(
        [y](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Power>) {
                return m.p == 0.0 ? 1.0 : std::pow(y, m.p);
            } else {
                return std::exp(m.theta * y);
            }
        },
        w);
}

namespace {

// int_a^b (c0 + c1 y) eta e^{-eta y} dy, exact.
double linear_segment_mass(double eta, double a, double b, double c0, double c1) {
    auto anti = [&](double y) {
        return -std::exp(-eta * y) * (c0 + c1 * y + c1 / eta);
    };
    return anti(b) - anti(a);
}

}  // namespace

double equilibrium_expectation(const RbmParams& p, const PerformanceMeasure& f) {
    validate(f, p);
    return std::visit(
        [&p](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Identity>) {
                return p.stationary_mean;
            } else if constexpr (std::is_same_v<T, Square>) {
                return 2.0 / (p.eta * p.eta);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return p.eta / (p.eta - m.theta);
            } else if constexpr (std::is_same_v<T, IndicatorAbove>) {
                return std::exp(-p.eta * m.b);
            } else {
                double total = 0.0;
                if (m.x.front() > 0.0)
                    total += linear_segment_mass(p.eta, 0.0, m.x.front(),
                                                 m.fx.front(), 0.0);
                for (size_t i = 1; i < m.x.size(); ++i) {
                    const double slope =
                        (m.fx[i] - m.fx[i - 1]) / (m.x[i] - m.x[i - 1]);
                    const double icept = m.fx[i - 1] - slope * m.x[i - 1];
                    total += linear_segment_mass(p.eta, m.x[i - 1], m.x[i], icept,
                                                 slope);
                }
                total += m.fx.back() * std::exp(-p.eta * m.x.back());
                return total;
            }
        },
        f);
}

std::string measure_name(const PerformanceMeasure& f) {
    return std::visit(
        [](const auto& m) -> std::string {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Identity>) return "identity";
            else if constexpr (std::is_same_v<T, Square>) return "square";
            else if constexpr (std::is_same_v<T, Exponential>) return "exponential";
            else if constexpr (std::is_same_v<T, IndicatorAbove>) return "indicator";
            else return "tabulated";
        },
        f);
}

}  // namespace rbm
