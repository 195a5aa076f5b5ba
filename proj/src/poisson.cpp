#include "rbm/poisson.hpp"

#include <algorithm>
#include <cmath>

namespace rbm {
namespace {

// Integrates f over [a, b] splitting at the supplied kink abscissae.
double integrate_split(const std::function<double(double)>& f, double a, double b,
                       const std::vector<double>& kinks, const QuadSpec& spec) {
    std::vector<double> cuts{a};
    for (double k : kinks)
        if (k > a && k < b) cuts.push_back(k);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (size_t i = 1; i < cuts.size(); ++i)
        if (cuts[i] > cuts[i - 1])
            total += integrate(f, cuts[i - 1], cuts[i], spec).value;
    return total;
}

QuadSpec tight_spec(double tail_rate) {
    QuadSpec s;
    s.abs_tol = 1e-12;
    s.rel_tol = 1e-10;
    s.tail_rate = tail_rate;
    return s;
}

}  // namespace

GeneralPoissonSolver::GeneralPoissonSolver(const RbmParams& p,
                                           std::function<double(double)> g,
                                           std::vector<double> kinks,
                                           double tail_rate)
    : p_(p), g_(std::move(g)), kinks_(std::move(kinks)) {
    std::sort(kinks_.begin(), kinks_.end());
    QuadSpec spec = tight_spec(tail_rate);
    auto weighted = [this](double x) {
        return g_(x) * p_.eta * std::exp(-p_.eta * x);
    };
    mean_g_ = integrate_split(weighted, 0.0,
                              std::numeric_limits<double>::infinity(), kinks_,
                              spec);
    // E h(X(inf)) = -(2/sigma^2) int_0^inf int_0^x g_c(y)(e^{-eta y} -
    // e^{-eta x}) dy dx. Swapping the integration order collapses the double
    // integral (the divergent pieces cancel because g_c is pi-centered):
    // E h(X(inf)) = (2/sigma^2) int_0^inf g_c(y) (y + 1/eta) e^{-eta y} dy.
    auto mean_h_integrand = [this](double y) {
        return (g_(y) - mean_g_) * (y + 1.0 / p_.eta) *
               std::exp(-p_.eta * y);
    };
    mean_h_ = (2.0 / p_.sigma2) *
              integrate_split(mean_h_integrand, 0.0,
                              std::numeric_limits<double>::infinity(), kinks_,
                              spec);
}

double GeneralPoissonSolver::h(double x) const {
    if (x < 0.0) throw std::domain_error("GeneralPoissonSolver: x must be >= 0");
    if (x == 0.0) return 0.0;
    QuadSpec spec = tight_spec(p_.eta);
    auto f = [&](double y) {
        return (g_(y) - mean_g_) * std::expm1(p_.eta * (x - y));
    };
    return -integrate_split(f, 0.0, x, kinks_, spec) / p_.r;
}

double GeneralPoissonSolver::h_centered_prime(double x) const {
    if (x < 0.0) throw std::domain_error("GeneralPoissonSolver: x must be >= 0");
    if (x == 0.0) return 0.0;
    QuadSpec spec = tight_spec(p_.eta);
    auto f = [&](double y) {
        return (g_(y) - mean_g_) * std::exp(p_.eta * (x - y));
    };
    return -p_.eta / p_.r * integrate_split(f, 0.0, x, kinks_, spec);
}

BiasFunction::BiasFunction(const RbmParams& p, const PerformanceMeasure& f)
    : p_(p), f_(f) {
    validate(f_, p_);
    equilibrium_mean_ = equilibrium_expectation(p_, f_);
    closed_form_ = !std::holds_alternative<Tabulated>(f_);
    if (!closed_form_) {
        auto g = [f = f_](double x) { return evaluate(f, x); };
        const auto& tab = std::get<Tabulated>(f_);
        std::vector<double> kinks(tab.x.begin(), tab.x.end());
        solver_ = std::make_shared<const GeneralPoissonSolver>(
            p_, g, std::move(kinks), 0.5 * p_.eta);
    }
}

double BiasFunction::h_centered_closed(double x) const {
    const double r = p_.r, s2 = p_.sigma2;
    if (std::holds_alternative<Identity>(f_)) {
        return x * x / (2.0 * r) - s2 * s2 / (4.0 * r * r * r);
    }
    if (std::holds_alternative<Square>(f_)) {
        return x * x * x / (3.0 * r) + s2 * x * x / (2.0 * r * r) -
               s2 * s2 * s2 / (2.0 * std::pow(r, 4));
    }
    if (const auto* e = std::get_if<Exponential>(&f_)) {
        const double th = e->theta;
        if (th == 0.0) return 0.0;  // f constant, zero bias
        const double d = th * s2 - 2.0 * r;
        return (-th * th * s2 * s2 +
                4.0 * r * r * (-th * x + std::expm1(th * x)) +
                2.0 * th * r * s2 * (th * x - std::expm1(th * x))) /
               (th * r * d * d);
    }
    const auto& ind = std::get<IndicatorAbove>(f_);
    const double b = ind.b;
    const double ebr = std::exp(-2.0 * b * r / s2);
    if (x < b)
        return ebr * (s2 * std::expm1(2.0 * r * x / s2) - 2.0 * r * (b + x)) /
               (2.0 * r * r);
    return (-2.0 * b * r + 2.0 * r * x + s2 - ebr * (2.0 * r * (b + x) + s2)) /
           (2.0 * r * r);
}

double BiasFunction::h_centered_prime_closed(double x) const {
    const double r = p_.r, s2 = p_.sigma2;
    if (std::holds_alternative<Identity>(f_)) return x / r;
    if (std::holds_alternative<Square>(f_))
        return x * x / r + s2 * x / (r * r);
    if (const auto* e = std::get_if<Exponential>(&f_)) {
        const double th = e->theta;
        if (th == 0.0) return 0.0;
        return 2.0 * std::expm1(th * x) / (2.0 * r - th * s2);
    }
    const auto& ind = std::get<IndicatorAbove>(f_);
    if (x < ind.b)
        return std::exp(-p_.eta * ind.b) * std::expm1(p_.eta * x) / r;
    return -std::expm1(-p_.eta * ind.b) / r;
}

double BiasFunction::h_centered(double x) const {
    if (x < 0.0) throw std::domain_error("BiasFunction: x must be >= 0");
    return closed_form_ ? h_centered_closed(x) : solver_->h_centered(x);
}

double BiasFunction::h_centered_prime(double x) const {
    if (x < 0.0) throw std::domain_error("BiasFunction: x must be >= 0");
    if (closed_form_) return h_centered_prime_closed(x);
    // Central differences per the documented Tabulated accuracy rule.
    const double step = p_.stationary_mean * 1e-4;
    const double lo = std::max(0.0, x - step);
    return (solver_->h_centered(x + step) - solver_->h_centered(lo)) /
           (x + step - lo);
}

double BiasFunction::mean_h() const {
    return closed_form_ ? -h_centered_closed(0.0) : solver_->mean_h();
}

double BiasFunction::h(double x) const {
    return h_centered(x) - h_centered(0.0);
}

double BiasFunction::equilibrium_mean() const { return equilibrium_mean_; }

std::vector<double> BiasFunction::kinks() const {
    if (const auto* ind = std::get_if<IndicatorAbove>(&f_)) return {ind->b};
    if (const auto* tab = std::get_if<Tabulated>(&f_))
        return std::vector<double>(tab->x.begin(), tab->x.end());
    return {};
}

double solve_h(const RbmParams& p, const PerformanceMeasure& f, double x) {
    return BiasFunction(p, f).h(x);
}

double h_centered(const RbmParams& p, const PerformanceMeasure& f, double x) {
    return BiasFunction(p, f).h_centered(x);
}

namespace {

double tabulated_density_mass(const TabulatedDensity& d) {
    double mass = 0.0;
    for (size_t i = 1; i < d.x.size(); ++i)
        mass += 0.5 * (d.density[i] + d.density[i - 1]) * (d.x[i] - d.x[i - 1]);
    return mass;
}

double tabulated_density_value(const TabulatedDensity& d, double x) {
    if (x <= d.x.front() || x >= d.x.back()) return 0.0;
    auto it = std::upper_bound(d.x.begin(), d.x.end(), x);
    const size_t i = static_cast<size_t>(it - d.x.begin());
    const double t = (x - d.x[i - 1]) / (d.x[i] - d.x[i - 1]);
    return d.density[i - 1] + t * (d.density[i] - d.density[i - 1]);
}

// Locations where h_c changes sign on [0, x_max], by grid scan + Brent.
std::vector<double> sign_changes(const std::function<double(double)>& f,
                                 double x_max, double step) {
    std::vector<double> roots;
    double prev_x = 0.0, prev_f = f(0.0);
    for (double x = step; x <= x_max + 0.5 * step; x += step) {
        const double fx = f(x);
        if (prev_f == 0.0) {
            roots.push_back(prev_x);
        } else if ((prev_f > 0.0) != (fx > 0.0) && fx != 0.0) {
            roots.push_back(find_root(f, prev_x, x, 1e-12));
        }
        prev_x = x;
        prev_f = fx;
    }
    return roots;
}

double integral_against(const std::function<double(double)>& integrand,
                        const RbmParams& p, const BiasFunction& bias,
                        bool absolute) {
    // pi-average of h_c or |h_c|: split at kinks of h_c and, for |h_c|, at
    // its sign changes; exponential tail handled by the semi-infinite rule.
    double tail_rate = 0.5 * p.eta;
    if (const auto* e = std::get_if<Exponential>(&bias.measure()))
        tail_rate = 0.5 * (p.eta - std::max(e->theta, 0.0));
    std::vector<double> cuts = bias.kinks();
    const double scan_max = 50.0 * p.stationary_mean;
    if (absolute) {
        auto hc = [&](double x) { return bias.h_centered(x); };
        for (double z : sign_changes(hc, scan_max, p.stationary_mean / 50.0))
            cuts.push_back(z);
    }
    std::sort(cuts.begin(), cuts.end());
    QuadSpec spec = tight_spec(tail_rate);
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

double unite_functional(const RbmParams& p, const PerformanceMeasure& f,
                        const InitialDistribution& mu) {
    BiasFunction bias(p, f);
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PointMass>) {
                return std::fabs(bias.h_centered(m.x));
            } else if constexpr (std::is_same_v<T, Stationary>) {
                auto integrand = [&](double x) {
                    return bias.h_centered(x) * p.eta * std::exp(-p.eta * x);
                };
                return std::fabs(integral_against(integrand, p, bias, false));
            } else {
                validate(m);
                if (std::fabs(tabulated_density_mass(m) - 1.0) > 1e-6)
                    throw std::domain_error(
                        "unite_functional: initial density must integrate to 1");
                auto integrand = [&](double x) {
                    return bias.h_centered(x) * tabulated_density_value(m, x);
                };
                std::vector<double> cuts = bias.kinks();
                cuts.insert(cuts.end(), m.x.begin(), m.x.end());
                std::sort(cuts.begin(), cuts.end());
                QuadSpec spec = tight_spec(p.eta);
                double total = 0.0;
                for (size_t i = 1; i < cuts.size(); ++i) {
                    const double lo = std::max(cuts[i - 1], m.x.front());
                    const double hi = std::min(cuts[i], m.x.back());
                    if (lo < hi) total += integrate(integrand, lo, hi, spec).value;
                }
                return std::fabs(total);
            }
        },
        mu);
}

double cite_functional(const RbmParams& p, const PerformanceMeasure& f,
                       const InitialDistribution& mu) {
    BiasFunction bias(p, f);
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, PointMass>) {
                return std::fabs(bias.h_centered(m.x));
            } else if constexpr (std::is_same_v<T, Stationary>) {
                auto integrand = [&](double x) {
                    return std::fabs(bias.h_centered(x)) * p.eta *
                           std::exp(-p.eta * x);
                };
                return integral_against(integrand, p, bias, true);
            } else {
                validate(m);
                if (std::fabs(tabulated_density_mass(m) - 1.0) > 1e-6)
                    throw std::domain_error(
                        "cite_functional: initial density must integrate to 1");
                auto hc = [&](double x) { return bias.h_centered(x); };
                std::vector<double> cuts = bias.kinks();
                for (double z :
                     sign_changes(hc, m.x.back(), p.stationary_mean / 50.0))
                    cuts.push_back(z);
                cuts.insert(cuts.end(), m.x.begin(), m.x.end());
                std::sort(cuts.begin(), cuts.end());
                auto integrand = [&](double x) {
                    return std::fabs(bias.h_centered(x)) *
                           tabulated_density_value(m, x);
                };
                QuadSpec spec = tight_spec(p.eta);
                double total = 0.0;
                for (size_t i = 1; i < cuts.size(); ++i) {
                    const double lo = std::max(cuts[i - 1], m.x.front());
                    const double hi = std::min(cuts[i], m.x.back());
                    if (lo < hi) total += integrate(integrand, lo, hi, spec).value;
                }
                return total;
            }
        },
        mu);
}

std::vector<Interval> sublevel_intervals(
    const std::function<double(double)>& bias, double threshold, double x_step,
    double x_max_initial, bool extend_by_doubling) {
    auto g = [&](double x) { return bias(x) - threshold; };
    double x_max = x_max_initial;
    if (extend_by_doubling) {
        int rounds = 0;
        while (g(x_max) <= 0.0 && rounds < 20) {
            x_max *= 2.0;
            ++rounds;
        }
    }
    std::vector<Interval> result;
    const double tol = 1e-9;
    bool inside = g(0.0) <= 0.0;
    double open_at = 0.0;
    double prev_x = 0.0, prev_g = g(0.0);
    for (double x = x_step; x <= x_max + 0.5 * x_step; x += x_step) {
        const double gx = g(x);
        if ((prev_g > 0.0) != (gx > 0.0) && prev_g != 0.0 && gx != 0.0) {
            const double root = find_root(g, prev_x, x, tol);
            if (inside) {
                result.push_back(Interval{open_at, root});
                inside = false;
            } else {
                open_at = root;
                inside = true;
            }
        }
        prev_x = x;
        prev_g = gx;
    }
    if (inside) result.push_back(Interval{open_at, x_max});
    // Catch degenerate touch points (threshold exactly at a local minimum):
    // locate the grid minimum, refine by golden-section, and accept if the
    // refined value sits at the threshold.
    if (result.empty() && threshold >= 0.0) {
        double best_x = 0.0, best_v = g(0.0);
        for (double x = x_step; x <= x_max; x += x_step) {
            const double v = g(x);
            if (v < best_v) {
                best_v = v;
                best_x = x;
            }
        }
        double lo = std::max(0.0, best_x - x_step), hi = best_x + x_step;
        const double gr = 0.61803398874989484820;
        double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
        double f1 = g(m1), f2 = g(m2);
        for (int i = 0; i < 120 && hi - lo > 1e-13; ++i) {
            if (f1 <= f2) {
                hi = m2;
                m2 = m1;
                f2 = f1;
                m1 = hi - gr * (hi - lo);
                f1 = g(m1);
            } else {
                lo = m1;
                m1 = m2;
                f1 = f2;
                m2 = lo + gr * (hi - lo);
                f2 = g(m2);
            }
        }
        const double xm = 0.5 * (lo + hi);
        if (std::fabs(g(xm)) <= 1e-7 * std::max(1.0, std::fabs(threshold)))
            result.push_back(Interval{xm, xm});
    }
    return result;
}

std::vector<Interval> good_states_functional(const RbmParams& p,
                                             const PerformanceMeasure& f,
                                             double c) {
    if (c < 0.0)
        throw std::domain_error("good_states_functional: c must be >= 0");
    const double threshold = c * cite_functional(p, f, Stationary{});
    if (std::holds_alternative<Identity>(f)) {
        // |x^2/(2r) - sigma^4/(4 r^3)| <= T solves to an explicit interval.
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

std::vector<GoodStateRow> good_states_figure(const RbmParams& p,
                                             const PerformanceMeasure& f,
                                             const std::vector<double>& c_grid) {
    std::vector<GoodStateRow> rows;
    rows.reserve(c_grid.size());
    for (double c : c_grid)
        rows.push_back(GoodStateRow{c, good_states_functional(p, f, c)});
    return rows;
}

}  // namespace rbm
