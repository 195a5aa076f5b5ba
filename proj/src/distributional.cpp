#include "rbm/distributional.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace rbm {

double kernel(double u, double v) {
    if (u < 0.0 || v < 0.0) throw std::domain_error("kernel: arguments must be >= 0");
    if (v <= u) return 1.0 - (u + v) * std::exp(-v);
    return std::exp(-(v - u)) - (u + v) * std::exp(-v);
}

namespace {

// Sign-change points of m(u, .). The lower branch 1 - (u+v)e^{-v} is
// monotone on [0, u] with a root only when u >= 1; the upper branch
// e^{-v}(e^u - u - v) has its root exactly at v = e^u - u.
std::vector<double> kernel_roots(double u) {
    std::vector<double> roots;
    if (u >= 1.0) {
        auto lower = [u](double v) { return 1.0 - (u + v) * std::exp(-v); };
        if (lower(0.0) < 0.0)
            roots.push_back(find_root(lower, 0.0, u, 1e-13));
        else
            roots.push_back(0.0);
    }
    roots.push_back(std::exp(u) - u);
    return roots;
}

struct WeightSpec {
    double a;       // exponential growth rate of w in v-coordinates
    double power;   // polynomial growth of w in v-coordinates
    std::function<double(double)> w_of_v;
};

WeightSpec weight_in_v(const RbmParams& p, const WeightFunction& w) {
    validate(w, p);
    if (const auto* pw = std::get_if<Power>(&w)) {
        const double q = pw->p;
        return WeightSpec{0.0, q, [q](double v) {
                              return q == 0.0 ? 1.0 : std::pow(v, q);
                          }};
    }
    const double a = std::get<ExponentialWeight>(w).theta / p.eta;
    return WeightSpec{a, 0.0, [a](double v) { return std::exp(a * v); }};
}

// int_0^inf |m(u, v)| w(v) dv with the kink at v = u and the sign-change
// roots isolated; contributions beyond v_stop are below 1e-25 of scale.
double abs_kernel_integral(double u, const WeightSpec& ws, const QuadSpec& spec) {
    const double decay = 1.0 - ws.a;
    const double v_stop = u + (100.0 + 20.0 * ws.power) / decay;
    std::vector<double> cuts{0.0};
    if (u > 0.0 && u < v_stop) cuts.push_back(u);
    for (double rt : kernel_roots(u))
        if (rt > 0.0 && rt < v_stop) cuts.push_back(rt);
    std::sort(cuts.begin(), cuts.end());
    auto g = [&](double v) { return std::fabs(kernel(u, v)) * ws.w_of_v(v); };
    double total = 0.0;
    for (size_t i = 1; i < cuts.size(); ++i)
        if (cuts[i] > cuts[i - 1])
            total += integrate(g, cuts[i - 1], cuts[i], spec).value;
    QuadSpec tail = spec;
    tail.tail_rate = 0.5 * decay;
    total += integrate(g, cuts.back(), std::numeric_limits<double>::infinity(),
                       tail)
                 .value;
    return total;
}

std::mutex cite_cache_mutex;
std::map<std::pair<int, double>, double> cite_cache;

std::pair<int, double> cache_key(const RbmParams& p, const WeightFunction& w) {
    if (const auto* pw = std::get_if<Power>(&w)) return {0, pw->p};
    return {1, std::get<ExponentialWeight>(w).theta / p.eta};
}

}  // namespace

double functional_bias_via_kernel(const RbmParams& p, const PerformanceMeasure& f,
                                  double x) {
    if (x < 0.0)
        throw std::domain_error("functional_bias_via_kernel: x must be >= 0");
    validate(f, p);
    const double u = p.eta * x;
    double tail_rate = 0.5 * p.eta;
    if (const auto* e = std::get_if<Exponential>(&f))
        tail_rate = 0.5 * (p.eta - std::max(e->theta, 0.0));
    std::vector<double> cuts{0.0};
    if (x > 0.0) cuts.push_back(x);
    if (const auto* ind = std::get_if<IndicatorAbove>(&f)) {
        if (ind->b > 0.0) cuts.push_back(ind->b);
    } else if (const auto* tab = std::get_if<Tabulated>(&f)) {
        for (double z : tab->x)
            if (z > 0.0) cuts.push_back(z);
    }
    std::sort(cuts.begin(), cuts.end());
    auto g = [&](double y) {
        return evaluate(f, y) * kernel(u, p.eta * y) / p.r;
    };
    QuadSpec spec;
    spec.abs_tol = 1e-11;
    spec.rel_tol = 1e-9;
    spec.tail_rate = tail_rate;
    double total = 0.0;
    for (size_t i = 1; i < cuts.size(); ++i)
        if (cuts[i] > cuts[i - 1])
            total += integrate(g, cuts[i - 1], cuts[i], spec).value;
    total += integrate(g, cuts.back(), std::numeric_limits<double>::infinity(),
                       spec)
                 .value;
    return std::fabs(total);
}

double distributional_bias(const RbmParams& p, const WeightFunction& w, double x) {
    if (x < 0.0) throw std::domain_error("distributional_bias: x must be >= 0");
    const WeightSpec ws = weight_in_v(p, w);
    QuadSpec spec;
    spec.abs_tol = 1e-11;
    spec.rel_tol = 1e-9;
    const double integral = abs_kernel_integral(p.eta * x, ws, spec);
    // w(y) dy = w(v/eta) dv / eta; for Power(q) that is eta^{-q-1} v^q dv.
    const double scale = std::pow(p.eta, -ws.power - 1.0) / p.r;
    return scale * integral;
}

double cite_distributional_pi(const RbmParams& p, const WeightFunction& w) {
    const WeightSpec ws = weight_in_v(p, w);
    const auto key = cache_key(p, w);
    {
        std::lock_guard<std::mutex> lock(cite_cache_mutex);
        auto it = cite_cache.find(key);
        if (it != cite_cache.end())
            return std::pow(p.eta, -ws.power - 1.0) / p.r * it->second;
    }
    // Dimensionless double integral int e^{-u} int |m(u,v)| w_v(v) dv du;
    // inner tolerance 10x tighter than outer.
    QuadSpec inner;
    inner.abs_tol = 1e-11;
    inner.rel_tol = 1e-9;
    auto outer_integrand = [&](double u) {
        return std::exp(-u) * abs_kernel_integral(u, ws, inner);
    };
    QuadSpec outer;
    outer.abs_tol = 1e-10;
    outer.rel_tol = 1e-8;
    outer.tail_rate = 0.5 * (1.0 - ws.a);
    // The lower-branch root is born at u = 1; split there.
    const double head =
        integrate(outer_integrand, 0.0, 1.0, outer).value;
    const double tail =
        integrate(outer_integrand, 1.0, std::numeric_limits<double>::infinity(),
                  outer)
            .value;
    const double value = head + tail;
    {
        std::lock_guard<std::mutex> lock(cite_cache_mutex);
        cite_cache.emplace(key, value);
    }
    return std::pow(p.eta, -ws.power - 1.0) / p.r * value;
}

std::vector<Interval> good_states_distributional(const RbmParams& p,
                                                 const WeightFunction& w,
                                                 double c) {
    if (c < 0.0)
        throw std::domain_error("good_states_distributional: c must be >= 0");
    const double threshold = c * cite_distributional_pi(p, w);
    auto bias = [&](double x) { return distributional_bias(p, w, x); };
    return sublevel_intervals(bias, threshold, p.stationary_mean / 50.0,
                              20.0 * p.stationary_mean, true);
}

std::vector<GoodStateRow> good_states_distributional_figure(
    const RbmParams& p, const WeightFunction& w,
    const std::vector<double>& c_grid) {
    std::vector<GoodStateRow> rows;
    rows.reserve(c_grid.size());
    for (double c : c_grid)
        rows.push_back(GoodStateRow{c, good_states_distributional(p, w, c)});
    return rows;
}

}  // namespace rbm
